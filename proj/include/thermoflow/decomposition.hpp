#pragma once

// (P, G, S) decompositions: a splitter maps (x, t) in the domain D to
// (p, g, s) with p + g + s = t, giving (x, p) in P, (f_p x, g) in G and
// (f_{p+g} x, s) in S.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "thermoflow/core.hpp"
#include "thermoflow/segments.hpp"

namespace thermoflow {

struct Split {
    double p = 0.0;
    double g = 0.0;
    double s = 0.0;
};

/// Split with g ≈ t - p - s, adjusted by ulps (g first, then s) so that
/// (p + g) + s == t holds exactly in floating point.
inline Split make_split(double t, double p, double s) {
    p = std::clamp(p, 0.0, t);
    s = std::clamp(s, 0.0, t - p);
    const double g0 = std::max(0.0, t - p - s);
    for (int pass = 0; pass < 2; ++pass) {
        for (int dir : {1, -1}) {
            double g = g0, ss = s;
            for (int k = 0; k < 64; ++k) {
                if ((p + g) + ss == t && g >= 0.0 && ss >= 0.0) return {p, g, ss};
                if (pass == 0)
                    g = std::nextafter(g, dir > 0 ? kInf : -kInf);
                else
                    ss = std::nextafter(ss, dir > 0 ? kInf : -kInf);
            }
        }
        s = std::max(0.0, t - (p + g0));
    }
    return {p, g0, t - (p + g0)};
}

template <class P>
struct Decomposition {
    SegmentCollection<P> domain;
    std::function<bool(const OrbitSegment<P>&)> in_domain;  // unset: listed segments only
    std::function<Split(const OrbitSegment<P>&)> splitter;
    std::string name;
};

template <class P>
struct DecomposedCollections {
    SegmentCollection<P> prefix;  // P
    SegmentCollection<P> good;    // G
    SegmentCollection<P> suffix;  // S
};

template <FlowBackend B>
bool in_domain(const B& backend, const Decomposition<typename B::point_type>& dec,
               const OrbitSegment<typename B::point_type>& seg) {
    if (dec.in_domain) return dec.in_domain(seg);
    return collection_contains(backend, dec.domain, seg.start, seg.t);
}

template <FlowBackend B>
Split decompose(const B& backend, const Decomposition<typename B::point_type>& dec,
                const OrbitSegment<typename B::point_type>& seg) {
    if (!in_domain(backend, dec, seg)) throw Error(ErrorCode::NotInDomain, "segment is outside the decomposition's domain");
    return dec.splitter(seg);
}

/// P, G and S built from the listed segments of the domain.
template <FlowBackend B>
DecomposedCollections<typename B::point_type> decomposed(const B& backend,
                                                         const Decomposition<typename B::point_type>& dec) {
    DecomposedCollections<typename B::point_type> out;
    for (const auto& seg : dec.domain.segments) {
        const Split sp = dec.splitter(seg);
        out.prefix.segments.push_back({seg.start, sp.p, seg.id});
        out.good.segments.push_back({backend.evolve(seg.start, sp.p), sp.g, seg.id});
        out.suffix.segments.push_back({backend.evolve(seg.start, sp.p + sp.g), sp.s, seg.id});
    }
    return out;
}

/// G^M = {(x, t) in D : p <= M and s <= M}; M = +inf keeps all of D.
template <FlowBackend B>
SegmentCollection<typename B::point_type> filter_gm(const B&, const Decomposition<typename B::point_type>& dec,
                                                    double m) {
    if (m < 0.0) throw Error(ErrorCode::InvalidArgument, "M must be nonnegative");
    SegmentCollection<typename B::point_type> out;
    out.label = CollectionLabel::Derived;
    for (const auto& seg : dec.domain.segments) {
        const Split sp = dec.splitter(seg);
        if (sp.p <= m && sp.s <= m) out.segments.push_back(seg);
    }
    if (dec.domain.generator) {
        auto gen = dec.domain.generator;
        auto split = dec.splitter;
        out.generator = [gen, split, m](double t) {
            std::vector<typename B::point_type> keep;
            for (auto& x : gen(t)) {
                const Split sp = split(OrbitSegment<typename B::point_type>{x, t});
                if (sp.p <= m && sp.s <= m) keep.push_back(std::move(x));
            }
            return keep;
        };
    }
    return out;
}

template <class P>
struct InducedDecomposition {
    Decomposition<P> dec;
    bool empty = true;
};

/// Restriction of a decomposition of D₁ ⊂ O(U₁) to D₀ = D₁ ∩ Λ×R+, where Λ is
/// given by its membership test.  D₀ may be empty; the flag says so for the
/// listed segments.
template <FlowBackend B>
InducedDecomposition<typename B::point_type> induce_on_lambda(const B& backend,
                                                              const Decomposition<typename B::point_type>& dec,
                                                              const Neighborhood<typename B::point_type>& lambda) {
    using P = typename B::point_type;
    InducedDecomposition<P> out;
    out.dec.splitter = dec.splitter;
    out.dec.name = dec.name + "|lambda";
    out.dec.domain.label = CollectionLabel::Lambda;
    for (const auto& seg : dec.domain.segments)
        if (segment_in_neighborhood(backend, seg, lambda)) out.dec.domain.segments.push_back(seg);
    if (dec.domain.generator) {
        auto gen = dec.domain.generator;
        out.dec.domain.generator = [&backend, gen, lambda](double t) {
            std::vector<P> keep;
            for (auto& x : gen(t))
                if (segment_in_neighborhood(backend, OrbitSegment<P>{x, t}, lambda)) keep.push_back(std::move(x));
            return keep;
        };
    }
    out.dec.in_domain = [&backend, dec, lambda](const OrbitSegment<P>& seg) {
        return in_domain(backend, dec, seg) && segment_in_neighborhood(backend, seg, lambda);
    };
    out.empty = out.dec.domain.segments.empty();
    return out;
}

/// Everything good: (x, t) -> (0, t, 0).
template <class P>
std::function<Split(const OrbitSegment<P>&)> trivial_splitter() {
    return [](const OrbitSegment<P>& seg) { return Split{0.0, seg.t, 0.0}; };
}

/// Prefix and suffix are the initial and final runs of the orbit spent
/// within distance r0 of `center` (sampled every `step` time units).
template <std::size_t D, class Field>
std::function<Split(const OrbitSegment<OdePoint<D>>&)> singular_avoidance_splitter(const OdeFlow<D, Field>& flow,
                                                                                    State<D> center, double r0 = 3.0,
                                                                                    double step = 0.0) {
    if (step <= 0.0) step = flow.time_step();
    return [&flow, center, r0, step](const OrbitSegment<OdePoint<D>>& seg) {
        if (seg.t <= 0.0) return Split{};
        const auto n = static_cast<std::size_t>(std::floor(seg.t / step + 1e-9));
        auto near = [&](const OdePoint<D>& p) {
            double s = 0.0;
            for (std::size_t i = 0; i < D; ++i) s += (p.x[i] - center[i]) * (p.x[i] - center[i]);
            return s < r0 * r0;
        };
        std::vector<char> inside(n + 1);
        auto p = seg.start;
        for (std::size_t i = 0; i <= n; ++i) {
            inside[i] = near(p) ? 1 : 0;
            if (i < n) p = flow.evolve(p, step);
        }
        std::size_t first_out = 0;
        while (first_out <= n && inside[first_out]) ++first_out;
        if (first_out > n) return make_split(seg.t, seg.t, 0.0);
        std::size_t last_out = n;
        while (inside[last_out]) --last_out;
        const double pre = static_cast<double>(first_out) * step;
        const double suf = last_out == n ? 0.0 : seg.t - static_cast<double>(last_out + 1) * step;
        return make_split(seg.t, pre, std::max(0.0, suf));
    };
}

/// Prefix and suffix are the time spent in fibers over `bad` at the start and
/// end of the segment.
inline std::function<Split(const OrbitSegment<SymbolicPoint>&)> symbol_run_splitter(const SuspensionFlow& flow, int bad) {
    return [&flow, bad](const OrbitSegment<SymbolicPoint>& seg) {
        struct Piece {
            int symbol;
            double duration;
        };
        std::vector<Piece> pieces;
        flow.for_each_fiber(seg.start, seg.t, [&](std::int64_t index, double, double duration) {
            pieces.push_back({seg.start.symbol(index), duration});
        });
        double pre = 0.0, suf = 0.0;
        std::size_t i = 0;
        while (i < pieces.size() && pieces[i].symbol == bad) pre += pieces[i++].duration;
        if (i == pieces.size()) return make_split(seg.t, seg.t, 0.0);
        for (std::size_t j = pieces.size(); j-- > i && pieces[j].symbol == bad;) suf += pieces[j].duration;
        return make_split(seg.t, pre, suf);
    };
}

}  // namespace thermoflow
