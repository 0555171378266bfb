#pragma once

// Birkhoff integrals at two scales, greedy separated sets, the partition
// function λ(C, φ, δ, ε, t) and slope-fit pressure estimates.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <unordered_map>
#include <vector>

#include "thermoflow/core.hpp"
#include "thermoflow/flow.hpp"
#include "thermoflow/segments.hpp"

namespace thermoflow {

/// Φ_0(x, t) = ∫_0^t φ(f_s x) ds.  Exact for suspensions (potentials there
/// depend on the sequence only), composite Simpson on the Bowen grid for ODE
/// flows.
template <FlowBackend B>
double birkhoff(const B& backend, const Potential<typename B::point_type>& phi, const typename B::point_type& x,
                double t) {
    if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "negative duration");
    if (t == 0.0) return 0.0;
    if (phi.constant) {
        eval_potential(phi, x);
        return *phi.constant * t;
    }
    if constexpr (HasFiberWalk<B>) {
        return backend.birkhoff([&](const auto& p) { return eval_potential(phi, p); }, x, t);
    } else {
        std::size_t m = 64;
        if constexpr (requires { backend.bowen_intervals(t); }) m = backend.bowen_intervals(t);
        if (m % 2) ++m;
        const double h = t / static_cast<double>(m);
        auto p = x;
        double acc = eval_potential(phi, p);
        for (std::size_t i = 1; i <= m; ++i) {
            p = backend.evolve(p, h);
            const double w = i == m ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += w * eval_potential(phi, p);
        }
        return acc * h / 3.0;
    }
}

struct ProbeOptions {
    std::size_t n_probe = 32;
    std::uint64_t seed = 0;
};

/// Φ_ε(x, t) = sup over y in B_t(x, ε) of ∫_0^t φ(f_s y) ds, over x itself
/// and a fixed sample of probes.  Probe j perturbs x at scale
/// diameter·2^(-1-24j/n); the probe set does not depend on ε, so the result is
/// nondecreasing in ε and equals Φ_0 at ε = 0.
template <FlowBackend B>
double phi_eps(const B& backend, const Potential<typename B::point_type>& phi, const typename B::point_type& x,
               double t, double eps, const ProbeOptions& opt = {}) {
    if (eps < 0.0) throw Error(ErrorCode::InvalidArgument, "negative scale");
    const double base = birkhoff(backend, phi, x, t);
    if (eps == 0.0 || phi.constant || opt.n_probe == 0) return base;
    double best = base;
    const double diam = backend.diameter();
    for (std::size_t j = 0; j < opt.n_probe; ++j) {
        const double scale =
            diam * std::exp2(-1.0 - 24.0 * static_cast<double>(j) / static_cast<double>(opt.n_probe));
        Rng rng = make_rng(opt.seed, j);
        auto y = backend.perturb(x, scale, rng);
        if (bowen_exceeds(backend, x, y, t, std::nextafter(eps, 0.0))) continue;  // open ball
        try {
            best = std::max(best, birkhoff(backend, phi, y, t));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::OutsideDomain && e.code() != ErrorCode::Diverged) throw;
        }
    }
    return best;
}

template <class P>
struct SeparatedSet {
    std::vector<P> points;
    std::vector<double> weights;             // Φ_ε per admitted point
    std::vector<std::size_t> order;          // candidate indices of admitted points, in admission order
    std::vector<std::int64_t> witness;       // per candidate: admitted position within δ, or -1 if admitted
    std::size_t candidates = 0;
    double t = 0.0;
    double delta = 0.0;

    std::size_t size() const { return points.size(); }
};

/// Backends that can name, for given (t, δ), a key shared by any two points
/// within Bowen distance δ; nullopt when no such key exists at that scale.
template <class B>
concept HasSeparationKey = requires(const B& b, const typename B::point_type& x, double t) {
    { b.separation_key(x, t, t) } -> std::same_as<std::optional<std::uint64_t>>;
};

namespace detail {

/// Grid hash over Lipschitz features with cell size δ: a conflicting pair
/// (d_t ≤ δ) always lands in neighboring cells.
class FeatureGrid {
public:
    explicit FeatureGrid(double cell) : cell_(cell) {}

    void insert(const std::vector<double>& f, std::size_t id, std::uint64_t salt = 0) {
        cells_[mix_seed(key(cell_of(f)), salt)].push_back(id);
    }

    template <class Fn>
    bool any_neighbor(const std::vector<double>& f, Fn&& fn, std::uint64_t salt = 0) const {
        const auto c = cell_of(f);
        const std::size_t dims = c.size();
        std::size_t combos = 1;
        for (std::size_t i = 0; i < dims; ++i) combos *= 3;
        std::vector<std::int64_t> probe(dims);
        for (std::size_t code = 0; code < combos; ++code) {
            std::size_t rest = code;
            for (std::size_t i = 0; i < dims; ++i) {
                probe[i] = c[i] + static_cast<std::int64_t>(rest % 3) - 1;
                rest /= 3;
            }
            auto it = cells_.find(mix_seed(key(probe), salt));
            if (it == cells_.end()) continue;
            for (std::size_t id : it->second)
                if (fn(id)) return true;
        }
        return false;
    }

private:
    std::vector<std::int64_t> cell_of(const std::vector<double>& f) const {
        std::vector<std::int64_t> c(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) c[i] = static_cast<std::int64_t>(std::floor(f[i] / cell_));
        return c;
    }

    static std::uint64_t key(const std::vector<std::int64_t>& c) {
        std::uint64_t h = 0x51ed270b27f3a1c5ULL;
        for (auto v : c) h = mix_seed(h, static_cast<std::uint64_t>(v));
        return h;
    }

    double cell_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace detail

/// Greedy (t, δ)-separated subset of `candidates`: candidates are visited in
/// descending weight (ties by index), except that the first `n_priority`
/// candidates are visited first in their given order.  A candidate is
/// admitted iff d_t to every admitted point exceeds δ; each rejected
/// candidate records the admitted point within δ that blocked it, so the
/// result is maximal and (t, δ)-spanning for the candidates.
template <FlowBackend B>
SeparatedSet<typename B::point_type> build_separated(const B& backend,
                                                     const std::vector<typename B::point_type>& candidates, double t,
                                                     double delta, const std::vector<double>& weights,
                                                     std::size_t n_priority = 0) {
    if (candidates.empty()) throw Error(ErrorCode::EmptySlice, "the slice (C)_t is empty");
    if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
    if (weights.size() != candidates.size()) throw Error(ErrorCode::InvalidArgument, "one weight per candidate");
    const std::size_t n = candidates.size();
    n_priority = std::min(n_priority, n);

    std::vector<std::vector<double>> features(n);
    std::vector<std::uint64_t> salt(n, 0);
    parallel_for(n, [&](std::size_t i) {
        features[i] = backend.hash_features(candidates[i], t);
        if constexpr (HasSeparationKey<B>) salt[i] = backend.separation_key(candidates[i], t, delta).value_or(0);
    });
    if constexpr (HasSeparationKey<B>) {
        // keys are all-or-nothing: a point without one could be near any other
        if (!backend.separation_key(candidates[0], t, delta)) std::fill(salt.begin(), salt.end(), 0);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(n_priority), order.end(),
                     [&](std::size_t a, std::size_t b) { return weights[a] != weights[b] ? weights[a] > weights[b] : a < b; });

    SeparatedSet<typename B::point_type> out;
    out.candidates = n;
    out.t = t;
    out.delta = delta;
    out.witness.assign(n, -1);
    detail::FeatureGrid grid(delta);
    for (std::size_t idx : order) {
        std::int64_t blocker = -1;
        grid.any_neighbor(features[idx], [&](std::size_t pos) {
            if (!bowen_exceeds(backend, candidates[idx], out.points[pos], t, delta)) {
                blocker = static_cast<std::int64_t>(pos);
                return true;
            }
            return false;
        }, salt[idx]);
        if (blocker >= 0) {
            out.witness[idx] = blocker;
            continue;
        }
        grid.insert(features[idx], out.points.size(), salt[idx]);
        out.points.push_back(candidates[idx]);
        out.weights.push_back(weights[idx]);
        out.order.push_back(idx);
    }
    return out;
}

/// Φ_ε weights for every candidate, computed in parallel.
template <FlowBackend B>
std::vector<double> phi_eps_weights(const B& backend, const Potential<typename B::point_type>& phi,
                                    const std::vector<typename B::point_type>& candidates, double t, double eps,
                                    const ProbeOptions& opt = {}) {
    std::vector<double> w(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t i) { w[i] = phi_eps(backend, phi, candidates[i], t, eps, opt); });
    return w;
}

template <FlowBackend B>
SeparatedSet<typename B::point_type> build_separated(const B& backend, const SegmentCollection<typename B::point_type>& c,
                                                     double t, double delta) {
    const auto pts = c.slice(t);
    return build_separated(backend, pts, t, delta, std::vector<double>(pts.size(), 0.0));
}

template <class P>
struct PartitionResult {
    double log_lambda = -kInf;
    SeparatedSet<P> set;
    double t = 0.0;
    double delta = 0.0;
    double eps = 0.0;

    std::size_t n_points() const { return set.size(); }
    double lambda() const { return std::exp(log_lambda); }
};

/// λ = Σ_{x∈E} exp Φ_ε(x, t) over the greedy separated set E, which is a
/// lower bound for the supremum over all (t, δ)-separated sets.  Points in
/// `preferred` are offered to the greedy pass before the slice.
template <FlowBackend B>
PartitionResult<typename B::point_type> partition_sum(const B& backend, const Potential<typename B::point_type>& phi,
                                                      const SegmentCollection<typename B::point_type>& c, double delta,
                                                      double eps, double t, const ProbeOptions& opt = {},
                                                      const std::vector<typename B::point_type>& preferred = {}) {
    if (!(delta > 0.0) || eps < 0.0) throw Error(ErrorCode::InvalidArgument, "scales must be positive");
    if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "negative duration");
    std::vector<typename B::point_type> pts = preferred;
    auto slice = c.slice(t);
    pts.insert(pts.end(), slice.begin(), slice.end());
    if (pts.empty()) throw Error(ErrorCode::EmptySlice, "the slice (C)_t is empty");
    const auto w = phi_eps_weights(backend, phi, pts, t, eps, opt);
    PartitionResult<typename B::point_type> r;
    r.set = build_separated(backend, pts, t, delta, w, preferred.size());
    r.log_lambda = log_sum_exp(r.set.weights);
    r.t = t;
    r.delta = delta;
    r.eps = eps;
    return r;
}

struct PressureEstimate {
    double value = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    std::vector<double> t_grid;
    std::vector<double> log_lambda;
    std::vector<std::size_t> n_points;
    double delta = 0.0;
    double eps = 0.0;
};

/// Least-squares slope of log λ against t.  Empty slices contribute
/// log λ = -inf and are left out of the fit.
template <FlowBackend B>
PressureEstimate pressure(const B& backend, const Potential<typename B::point_type>& phi,
                          const SegmentCollection<typename B::point_type>& c, double delta, double eps,
                          const std::vector<double>& t_grid, const ProbeOptions& opt = {}) {
    if (t_grid.size() < 4) throw Error(ErrorCode::InvalidArgument, "t grid needs at least four entries");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw Error(ErrorCode::InvalidArgument, "t grid must increase");
    PressureEstimate est;
    est.t_grid = t_grid;
    est.delta = delta;
    est.eps = eps;
    std::vector<double> xs, ys;
    for (double t : t_grid) {
        double ll = -kInf;
        std::size_t count = 0;
        try {
            auto r = partition_sum(backend, phi, c, delta, eps, t, opt);
            ll = r.log_lambda;
            count = r.n_points();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptySlice) throw;
        }
        est.log_lambda.push_back(ll);
        est.n_points.push_back(count);
        if (std::isfinite(ll)) {
            xs.push_back(t);
            ys.push_back(ll);
        }
    }
    if (xs.size() < 2) throw Error(ErrorCode::DegenerateFit, "fewer than two nonempty slices");
    const auto fit = least_squares(xs, ys);
    est.value = fit.slope;
    est.intercept = fit.intercept;
    est.residual = fit.residual;
    return est;
}

/// Pressure at each δ of a decreasing ladder; the δ → 0 limit is left to the
/// reader of the sequence.
template <FlowBackend B>
std::vector<PressureEstimate> pressure_ladder(const B& backend, const Potential<typename B::point_type>& phi,
                                              const SegmentCollection<typename B::point_type>& c,
                                              const std::vector<double>& deltas, double eps,
                                              const std::vector<double>& t_grid, const ProbeOptions& opt = {}) {
    std::vector<PressureEstimate> out;
    for (double d : deltas) out.push_back(pressure(backend, phi, c, d, eps, t_grid, opt));
    return out;
}

}  // namespace thermoflow
