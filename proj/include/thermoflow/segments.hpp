#pragma once

// Orbit segments (x, t), Bowen distances and segment collections, with the
// integer discretization [C] and the trim map f_{i,j}.

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "thermoflow/core.hpp"
#include "thermoflow/flow.hpp"
#include "thermoflow/ode.hpp"
#include "thermoflow/suspension.hpp"

namespace thermoflow {

template <class P>
struct OrbitSegment {
    P start;
    double t = 0.0;
    std::int64_t id = -1;  // identifier of the starting point, for ordering and output

    bool empty() const { return t <= 0.0; }
};

enum class CollectionLabel { Lambda, OU1, OU, Derived };

inline const char* to_string(CollectionLabel l) {
    switch (l) {
    case CollectionLabel::Lambda: return "lambda";
    case CollectionLabel::OU1: return "O(U1)";
    case CollectionLabel::OU: return "O(U)";
    case CollectionLabel::Derived: return "derived";
    }
    return "?";
}

/// A finite list of segments, optionally backed by a generator producing the
/// candidate slice (C)_t on demand.
template <class P>
struct SegmentCollection {
    std::vector<OrbitSegment<P>> segments;
    CollectionLabel label = CollectionLabel::Derived;
    std::function<std::vector<P>(double)> generator;

    /// (C)_t: starting points of listed segments of length exactly t, then
    /// whatever the generator yields.
    std::vector<P> slice(double t) const {
        std::vector<P> out;
        for (const auto& s : segments)
            if (s.t == t) out.push_back(s.start);
        if (generator) {
            auto more = generator(t);
            out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
        }
        return out;
    }

    std::size_t size() const { return segments.size(); }
};

template <class B>
concept HasExactBowen = requires(const B& b, const typename B::point_type& x, double t) {
    { b.bowen_distance(x, x, t) } -> std::convertible_to<double>;
    { b.bowen_exceeds(x, x, t, t) } -> std::convertible_to<bool>;
};

template <class B>
concept HasFiberWalk = requires(const B& b, const typename B::point_type& x) {
    { b.fiber_point(x, std::int64_t{0}) } -> std::same_as<typename B::point_type>;
};

/// sup d(f_s x, f_s y) over s in {0, t/(n-1), ..., t}.  With n_samples = 0
/// the backend's own evaluation is used: exact over roof crossings for
/// suspensions, the default grid for ODE flows.
template <FlowBackend B>
double bowen_distance(const B& backend, const typename B::point_type& x, const typename B::point_type& y, double t,
                      std::size_t n_samples = 0) {
    if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "negative duration");
    if constexpr (HasFiberWalk<B>) {
        return backend.bowen_distance(x, y, t);
    } else {
        if (n_samples == 0) {
            if constexpr (HasExactBowen<B>) return backend.bowen_distance(x, y, t);
            n_samples = 65;
        }
        if (n_samples < 2 || t == 0.0) return backend.distance(x, y);
        const double step = t / static_cast<double>(n_samples - 1);
        auto a = x;
        auto b = y;
        double best = backend.distance(a, b);
        for (std::size_t i = 1; i < n_samples; ++i) {
            a = backend.evolve(a, step);
            b = backend.evolve(b, step);
            best = std::max(best, backend.distance(a, b));
        }
        return best;
    }
}

/// True iff d_t(x, y) > bound, stopping as soon as that is known.
template <FlowBackend B>
bool bowen_exceeds(const B& backend, const typename B::point_type& x, const typename B::point_type& y, double t,
                   double bound) {
    if constexpr (HasExactBowen<B>) return backend.bowen_exceeds(x, y, t, bound);
    else return bowen_distance(backend, x, y, t) > bound;
}

/// True iff f_s x lies in N for every sampled s in [0, t).  Suspensions are
/// checked at x and at each fiber entered, which is exact for neighborhoods
/// defined by symbol windows.
template <FlowBackend B>
bool segment_in_neighborhood(const B& backend, const OrbitSegment<typename B::point_type>& seg,
                             const Neighborhood<typename B::point_type>& n, std::size_t n_samples = 0) {
    if (seg.empty()) return true;
    if constexpr (HasFiberWalk<B>) {
        bool ok = n.contains(seg.start);
        backend.for_each_fiber(seg.start, seg.t, [&](std::int64_t index, double, double) {
            if (ok && index > 0) ok = n.contains(backend.fiber_point(seg.start, index));
        });
        return ok;
    } else {
        if (n_samples == 0) {
            if constexpr (requires { backend.bowen_intervals(seg.t); }) n_samples = backend.bowen_intervals(seg.t);
            else n_samples = 64;
        }
        const double step = seg.t / static_cast<double>(n_samples);
        auto p = seg.start;
        for (std::size_t i = 0; i < n_samples; ++i) {
            if (!n.contains(p)) return false;
            p = backend.evolve(p, step);
        }
        return true;
    }
}

/// [C] = {(x, n) : n in N, (f_{-s} x, n + s + t) in C for some s, t in [0,1)},
/// realized by emitting (f_s y, n) for s on a grid of [0, 1).
template <FlowBackend B>
SegmentCollection<typename B::point_type> discretize(const B& backend, const SegmentCollection<typename B::point_type>& c,
                                                     std::size_t s_grid = 64) {
    if (!backend.invertible()) throw Error(ErrorCode::NonInvertible, "discretize needs an invertible flow");
    SegmentCollection<typename B::point_type> out;
    out.label = CollectionLabel::Derived;
    for (const auto& seg : c.segments) {
        for (std::size_t k = 0; k < s_grid; ++k) {
            const double s = static_cast<double>(k) / static_cast<double>(s_grid);
            const auto lo = static_cast<std::int64_t>(std::max(0.0, std::ceil(seg.t - s) - 1.0));
            const auto hi = static_cast<std::int64_t>(std::floor(seg.t - s));
            if (hi < 0) continue;
            auto shifted = backend.evolve(seg.start, s);
            for (std::int64_t n = lo; n <= hi; ++n) {
                const double rest = seg.t - static_cast<double>(n) - s;
                if (rest >= 0.0 && rest < 1.0) out.segments.push_back({shifted, static_cast<double>(n), seg.id});
            }
        }
    }
    std::stable_sort(out.segments.begin(), out.segments.end(),
                     [](const auto& a, const auto& b) { return a.id != b.id ? a.id < b.id : a.t < b.t; });
    return out;
}

/// f_{i,j}(C) = {(f_i x, t - (i + j)) : (x, t) in C, t >= i + j}.
template <FlowBackend B>
SegmentCollection<typename B::point_type> trim(const B& backend, const SegmentCollection<typename B::point_type>& c,
                                               double i, double j) {
    if (i < 0.0 || j < 0.0) throw Error(ErrorCode::InvalidArgument, "trim amounts must be nonnegative");
    SegmentCollection<typename B::point_type> out;
    out.label = c.label;
    for (const auto& seg : c.segments)
        if (seg.t >= i + j) out.segments.push_back({backend.evolve(seg.start, i), seg.t - (i + j), seg.id});
    return out;
}

/// Membership of (x, t) in a listed collection, up to point identity.
template <FlowBackend B>
bool collection_contains(const B& backend, const SegmentCollection<typename B::point_type>& c,
                         const typename B::point_type& x, double t) {
    return std::any_of(c.segments.begin(), c.segments.end(),
                       [&](const auto& s) { return s.t == t && backend.same_point(s.start, x); });
}

/// Λ×R+ for a suspension: the generator yields one periodic point per
/// admissible cyclic word of the visited length.
inline SegmentCollection<SymbolicPoint> lambda_collection(const SuspensionFlow& flow) {
    SegmentCollection<SymbolicPoint> c;
    c.label = CollectionLabel::Lambda;
    c.generator = [&flow](double t) { return flow.lambda_cloud(t); };
    return c;
}

/// O(U_w) for a suspension, where U_w is the symbol-window neighborhood.
inline SegmentCollection<SymbolicPoint> neighborhood_collection(const SuspensionFlow& flow, int window,
                                                                CollectionLabel label) {
    SegmentCollection<SymbolicPoint> c;
    c.label = label;
    c.generator = [&flow, window](double t) { return flow.neighborhood_cloud(t, window); };
    return c;
}

/// Trajectory-cloud collection for an ODE flow with an attached trajectory.
/// For labels other than Lambda the slice keeps only segments staying in `n`.
template <std::size_t D, class Field>
SegmentCollection<OdePoint<D>> cloud_collection(const OdeFlow<D, Field>& flow, std::size_t count,
                                                CollectionLabel label,
                                                std::optional<Neighborhood<OdePoint<D>>> n = std::nullopt) {
    SegmentCollection<OdePoint<D>> c;
    c.label = label;
    c.generator = [&flow, count, n](double t) {
        auto cloud = flow.trajectory_cloud(count);
        if (!n) return cloud;
        std::vector<char> keep(cloud.size(), 0);
        parallel_for(cloud.size(), [&](std::size_t i) {
            keep[i] = segment_in_neighborhood(flow, OrbitSegment<OdePoint<D>>{cloud[i], t}, *n) ? 1 : 0;
        });
        std::vector<OdePoint<D>> out;
        for (std::size_t i = 0; i < cloud.size(); ++i)
            if (keep[i]) out.push_back(cloud[i]);
        return out;
    };
    return c;
}

}  // namespace thermoflow
