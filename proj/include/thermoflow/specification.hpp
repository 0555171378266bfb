#pragma once

// Tail specification: gluing orbit segments (x_1, t_1), ..., (x_k, t_k) into one
// shadowing orbit y with gluing times tau_j <= tau_max, and independent
// verification of the resulting certificate.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "thermoflow/core.hpp"
#include "thermoflow/segments.hpp"

namespace thermoflow {

struct GlueOptions {
    double t0 = 1.0;           // minimum segment length T0
    int starts = 64;           // numeric multi-starts
    int iterations = 200;      // coordinate-descent sweeps per start
    int tau_divisions = 32;    // tau grid resolution tau_max / tau_divisions
    std::uint64_t seed = 0;
};

struct GlueStats {
    int starts_tried = 0;
    std::int64_t evaluations = 0;
    int winning_start = -1;
    double best_objective = kInf;  // max_j d_j / delta over the best candidate
};

template <class P>
struct ShadowingCertificate {
    std::vector<OrbitSegment<P>> inputs;
    P y{};
    std::vector<double> gluing;    // tau_1 .. tau_{k-1}
    std::vector<double> transfer;  // s_0 = 0, s_1 .. s_k
    double delta = 0.0;
    double tau_max = 0.0;
    NeighborhoodLabel container = NeighborhoodLabel::U1;
    std::vector<double> margins;   // delta - d_{t_j}(f_{start_j} y, x_j)
    GlueStats stats;

    /// Time at which y starts shadowing segment j (0-based).
    double start_time(std::size_t j) const { return j == 0 ? 0.0 : transfer[j] + gluing[j - 1]; }
    double total_time() const { return transfer.empty() ? 0.0 : transfer.back(); }
};

struct VerifyCheck {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    double slack = 0.0;  // bound - value; positive when the check passes
    bool pass = false;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool container_ok = false;
    bool ok = false;
};

namespace detail {

template <class P>
std::vector<double> transfer_times(const std::vector<OrbitSegment<P>>& segs, const std::vector<double>& tau) {
    std::vector<double> s{0.0};
    for (std::size_t j = 0; j < segs.size(); ++j) s.push_back(s.back() + (j == 0 ? 0.0 : tau[j - 1]) + segs[j].t);
    return s;
}

template <class P>
void check_glue_inputs(const std::vector<OrbitSegment<P>>& segs, double delta, double tau_max, const GlueOptions& opt) {
    if (segs.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to glue");
    if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
    if (!(tau_max >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tau_max must be nonnegative");
    for (const auto& s : segs)
        if (s.t < opt.t0) throw Error(ErrorCode::InvalidArgument, "segment shorter than T0");
}

/// Exact concatenation for suspensions.
inline ShadowingCertificate<SymbolicPoint> glue_symbolic(const SuspensionFlow& flow,
                                                         const std::vector<OrbitSegment<SymbolicPoint>>& segs,
                                                         double delta, double tau_max) {
    // symbols within `pad` of every visited index must agree for theta^n < delta
    std::int64_t n = 0;
    while (flow.theta_pow(n) >= delta) ++n;
    const std::int64_t pad = std::max<std::int64_t>(n - 1, 0);
    const auto max_bridge = static_cast<std::size_t>(std::ceil(tau_max / flow.min_roof() - 1e-12));

    auto roof_sum = [&](const Word& w) {
        std::int64_t acc = 0;
        for (auto c : w) acc += flow.roof_ticks(c);
        return acc;
    };

    const std::size_t k = segs.size();
    std::vector<Word> blocks(k);
    std::vector<std::int64_t> leftover(k);  // ticks from the end of segment j to the top of its block
    for (std::size_t j = 0; j < k; ++j) {
        std::int64_t visited = 0;
        flow.for_each_fiber(segs[j].start, segs[j].t, [&](std::int64_t, double, double) { ++visited; });
        visited = std::max<std::int64_t>(visited, 1);
        blocks[j] = segs[j].start.window(-pad, visited + 2 * pad);
        std::int64_t top = 0;
        for (std::int64_t i = 0; i < visited + pad; ++i) top += flow.roof_ticks(segs[j].start.symbol(i));
        leftover[j] = top - segs[j].start.height - to_ticks(segs[j].t);
    }

    Word w;
    std::vector<double> tau;
    for (std::size_t j = 0; j < k; ++j) {
        w.insert(w.end(), blocks[j].begin(), blocks[j].end());
        const Word& next = blocks[(j + 1) % k];
        const Word& b = flow.bridge(blocks[j].back(), next.front());
        if (j + 1 < k) {
            if (b.size() > max_bridge)
                throw Error(ErrorCode::InfeasibleGap, "no transition word of length <= " + std::to_string(max_bridge));
            std::int64_t ticks = leftover[j] + roof_sum(b) + segs[j + 1].start.height;
            for (std::int64_t i = -pad; i < 0; ++i) ticks += flow.roof_ticks(segs[j + 1].start.symbol(i));
            tau.push_back(from_ticks(ticks));
        }
        w.insert(w.end(), b.begin(), b.end());
    }
    for (double t : tau)
        if (t > tau_max) throw Error(ErrorCode::NoCertificate, "gluing time exceeds tau_max");

    ShadowingCertificate<SymbolicPoint> cert;
    cert.inputs = segs;
    cert.y = flow.make_periodic(std::move(w), pad);
    cert.y.height = segs[0].start.height;
    cert.gluing = std::move(tau);
    cert.stats.starts_tried = 1;
    cert.stats.winning_start = 0;
    return cert;
}

template <class B>
concept HasStateCoordinates = requires(const typename B::point_type& p) {
    { p.x[0] } -> std::convertible_to<double>;
};

/// Multi-start coordinate descent over y near x_1 and the tau grid.
template <FlowBackend B>
    requires HasStateCoordinates<B>
ShadowingCertificate<typename B::point_type> glue_numeric(const B& backend,
                                                          const std::vector<OrbitSegment<typename B::point_type>>& segs,
                                                          double delta, double tau_max,
                                                          const Neighborhood<typename B::point_type>& container,
                                                          const GlueOptions& opt) {
    using P = typename B::point_type;
    const std::size_t k = segs.size();
    const int divisions = std::max(1, opt.tau_divisions);
    const double tau_step = tau_max / divisions;
    // objective: max_j d_j / delta, or +inf if the orbit leaves the domain
    auto objective = [&](const P& y, const std::vector<int>& idx, std::int64_t& evals) {
        ++evals;
        try {
            P cur = y;
            double worst = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                if (j > 0) cur = backend.evolve(cur, segs[j - 1].t + idx[j - 1] * tau_step);
                worst = std::max(worst, bowen_distance(backend, cur, segs[j].start, segs[j].t) / delta);
            }
            return worst;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Diverged || e.code() == ErrorCode::OutsideDomain) return kInf;
            throw;
        }
    };
    auto accepted = [&](const P& y, const std::vector<int>& idx, double f) {
        if (!(f < 1.0)) return false;
        std::vector<double> tau;
        for (int i : idx) tau.push_back(i * tau_step);
        const double total = transfer_times(segs, tau).back();
        return segment_in_neighborhood(backend, OrbitSegment<P>{y, total}, container);
    };

    struct Outcome {
        bool ok = false;
        P y{};
        std::vector<int> idx;
        double f = kInf;
        std::int64_t evals = 0;
    };
    auto run_start = [&](int start) {
        Rng rng = make_rng(opt.seed, static_cast<std::uint64_t>(start));
        Outcome o;
        P y = start == 0 ? segs[0].start : backend.perturb(segs[0].start, 0.5 * delta * uniform01(rng), rng);
        std::vector<int> idx(k > 0 ? k - 1 : 0, 0);
        if (start > 0)
            for (auto& i : idx) i = static_cast<int>(rng() % static_cast<std::uint64_t>(divisions + 1));
        double f = objective(y, idx, o.evals);
        double step = 0.25 * delta;
        for (int it = 0; it < opt.iterations && !accepted(y, idx, f); ++it) {
            bool improved = false;
            for (std::size_t i = 0; i < idx.size(); ++i) {
                // full scan of this gluing time with the others fixed
                for (int v = 0; v <= divisions; ++v) {
                    if (v == idx[i]) continue;
                    auto trial = idx;
                    trial[i] = v;
                    const double g = objective(y, trial, o.evals);
                    if (g < f) {
                        f = g;
                        idx = std::move(trial);
                        improved = true;
                    }
                }
            }
            for (std::size_t c = 0; c < y.x.size(); ++c) {
                for (double sign : {1.0, -1.0}) {
                    P trial = y;
                    trial.x[c] += sign * step;
                    trial.cache_index = -1;
                    if (backend.distance(trial, segs[0].start) >= delta) continue;
                    const double g = objective(trial, idx, o.evals);
                    if (g < f) {
                        f = g;
                        y = trial;
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) {
                step *= 0.5;
                if (step < 1e-6 * delta) break;
            }
        }
        o.ok = accepted(y, idx, f);
        o.y = y;
        o.idx = idx;
        o.f = f;
        return o;
    };

    ShadowingCertificate<P> cert;
    cert.inputs = segs;
    const int batch = static_cast<int>(std::max<std::size_t>(1, worker_count()));
    double best = kInf;
    for (int first = 0; first < opt.starts; first += batch) {
        const int n = std::min(batch, opt.starts - first);
        std::vector<Outcome> outs(static_cast<std::size_t>(n));
        parallel_for(
            static_cast<std::size_t>(n), [&](std::size_t i) { outs[i] = run_start(first + static_cast<int>(i)); }, 1);
        for (int i = 0; i < n; ++i) {
            const auto& o = outs[static_cast<std::size_t>(i)];
            // statistics only count starts up to the winner, whatever the batch size
            cert.stats.starts_tried = first + i + 1;
            cert.stats.evaluations += o.evals;
            best = std::min(best, o.f);
            if (!o.ok) continue;
            cert.y = o.y;
            for (int v : o.idx) cert.gluing.push_back(v * tau_step);
            cert.stats.winning_start = first + i;
            cert.stats.best_objective = o.f;
            return cert;
        }
    }
    throw Error(ErrorCode::NoCertificate, "search budget exhausted after " + std::to_string(opt.starts) +
                                              " starts (best max d/delta = " + std::to_string(best) + ")");
}

}  // namespace detail

/// Finds y and gluing times with d_{t_j}(f_{s_{j-1}+tau_{j-1}} y, x_j) < delta for
/// every j and (y, s_k) inside `container`.  NoCertificate means the search
/// failed, not that specification fails.
template <FlowBackend B>
ShadowingCertificate<typename B::point_type> glue(const B& backend,
                                                  const std::vector<OrbitSegment<typename B::point_type>>& segs,
                                                  double delta, double tau_max,
                                                  const Neighborhood<typename B::point_type>& container,
                                                  const GlueOptions& opt = {}) {
    detail::check_glue_inputs(segs, delta, tau_max, opt);
    ShadowingCertificate<typename B::point_type> cert;
    if (segs.size() == 1) {
        cert.inputs = segs;
        cert.y = segs[0].start;
        cert.stats.starts_tried = 1;
        cert.stats.winning_start = 0;
    } else if constexpr (HasFiberWalk<B>) {
        // lengths snapped to the tick grid so that sums of times stay exact
        auto snapped = segs;
        for (auto& s : snapped) s.t = from_ticks(to_ticks(s.t));
        cert = detail::glue_symbolic(backend, snapped, delta, tau_max);
    } else if constexpr (detail::HasStateCoordinates<B>) {
        cert = detail::glue_numeric(backend, segs, delta, tau_max, container, opt);
    } else {
        throw Error(ErrorCode::InvalidArgument, "backend has no gluing search");
    }
    cert.delta = delta;
    cert.tau_max = tau_max;
    cert.container = container.label;
    cert.transfer = detail::transfer_times(cert.inputs, cert.gluing);
    cert.margins.clear();
    for (std::size_t j = 0; j < cert.inputs.size(); ++j) {
        const auto yj = backend.evolve(cert.y, cert.start_time(j));
        cert.margins.push_back(delta - bowen_distance(backend, yj, cert.inputs[j].start, cert.inputs[j].t));
    }
    if (!segment_in_neighborhood(backend, OrbitSegment<typename B::point_type>{cert.y, cert.total_time()}, container))
        throw Error(ErrorCode::NoCertificate, "shadowing orbit leaves the container");
    for (double m : cert.margins)
        if (!(m > 0.0)) throw Error(ErrorCode::NoCertificate, "glued orbit misses a segment");
    return cert;
}

/// Recomputes every shadowing inequality and the container membership.
template <FlowBackend B>
VerifyReport verify(const B& backend, const ShadowingCertificate<typename B::point_type>& cert,
                    const Neighborhood<typename B::point_type>& container) {
    VerifyReport r;
    const std::size_t k = cert.inputs.size();
    bool ok = cert.gluing.size() + 1 == k || (k == 0 && cert.gluing.empty());
    for (std::size_t i = 0; i < cert.gluing.size(); ++i) {
        const double tau = cert.gluing[i];
        VerifyCheck c{"tau_" + std::to_string(i + 1), tau, cert.tau_max, cert.tau_max - tau,
                      tau >= 0.0 && tau <= cert.tau_max};
        ok = ok && c.pass;
        r.checks.push_back(c);
    }
    const auto s = detail::transfer_times(cert.inputs, cert.gluing);
    double start = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (j > 0) start = s[j] + cert.gluing[j - 1];
        double d = kInf;
        try {
            d = bowen_distance(backend, backend.evolve(cert.y, start), cert.inputs[j].start, cert.inputs[j].t);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Diverged && e.code() != ErrorCode::OutsideDomain) throw;
        }
        VerifyCheck c{"segment_" + std::to_string(j + 1), d, cert.delta, cert.delta - d, d < cert.delta};
        ok = ok && c.pass;
        r.checks.push_back(c);
    }
    r.container_ok = segment_in_neighborhood(backend, OrbitSegment<typename B::point_type>{cert.y, s.back()}, container);
    r.checks.push_back({"container", r.container_ok ? 0.0 : 1.0, 0.5, r.container_ok ? 0.5 : -0.5, r.container_ok});
    r.ok = ok && r.container_ok;
    return r;
}

}  // namespace thermoflow
