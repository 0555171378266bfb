#pragma once

// Regularity of potentials and expansivity: Var(φ, ε), Bowen-property
// distortion, finite-window non-expansivity tests and the obstruction
// pressure P⊥_exp(φ, ε).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "thermoflow/core.hpp"
#include "thermoflow/partition.hpp"
#include "thermoflow/segments.hpp"
#include "thermoflow/transfer.hpp"

namespace thermoflow {

template <class B>
concept HasTrajectoryCloud = requires(const B& b, std::size_t n) {
    { b.trajectory_cloud(n) } -> std::same_as<std::vector<typename B::point_type>>;
};

template <class B>
concept HasTube = requires(const B& b, const typename B::point_type& x, double t) {
    { b.tube_distance(x, x, t) } -> std::convertible_to<double>;
};

/// Base points for sampling: random periodic points of Λ for suspensions,
/// evenly spaced trajectory samples for ODE flows with an attached trajectory.
template <FlowBackend B>
std::vector<typename B::point_type> sample_points(const B& backend, std::size_t n, std::uint64_t seed = 0) {
    std::vector<typename B::point_type> out;
    if constexpr (HasFiberWalk<B>) {
        Rng rng = make_rng(seed, 0x5a);
        for (std::size_t i = 0; i < n; ++i) {
            Word w;
            int a = static_cast<int>(rng() % static_cast<std::uint64_t>(backend.alphabet()));
            w.push_back(static_cast<std::uint8_t>(a));
            while (w.size() < 16) {
                std::vector<int> next;
                for (int b = 0; b < backend.alphabet(); ++b)
                    if (backend.allowed(a, b)) next.push_back(b);
                a = next[rng() % next.size()];
                w.push_back(static_cast<std::uint8_t>(a));
            }
            const Word& br = backend.bridge(w.back(), w.front());
            w.insert(w.end(), br.begin(), br.end());
            auto x = backend.make_periodic(std::move(w), 0);
            x.height = std::min<std::int64_t>(to_ticks(uniform01(rng) * backend.roof(x.symbol(0))),
                                              backend.roof_ticks(x.symbol(0)) - 1);
            out.push_back(std::move(x));
        }
    } else if constexpr (HasTrajectoryCloud<B>) {
        out = backend.trajectory_cloud(n);
    } else {
        throw Error(ErrorCode::InvalidArgument, "backend has no point sampler");
    }
    return out;
}

/// max |φ(x) - φ(y)| over sampled pairs with d(x, y) < ε: a lower bound for
/// Var(φ, ε) = sup over d(x, y) < ε.
template <FlowBackend B>
double variation(const B& backend, const Potential<typename B::point_type>& phi, double eps,
                 const std::vector<typename B::point_type>& base, std::size_t n_pairs, std::uint64_t seed = 0) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    if (phi.constant || base.empty()) return 0.0;
    std::vector<double> best(n_pairs, 0.0);
    parallel_for(n_pairs, [&](std::size_t i) {
        Rng rng = make_rng(seed, i);
        const auto& x = base[i % base.size()];
        // scales concentrated near eps, where the sup is approached
        const double scale = eps * (1.0 - 0.5 * uniform01(rng) * uniform01(rng));
        auto y = backend.perturb(x, scale, rng);
        if (!(backend.distance(x, y) < eps)) return;
        try {
            best[i] = std::abs(eval_potential(phi, x) - eval_potential(phi, y));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::OutsideDomain) throw;
        }
    });
    return best.empty() ? 0.0 : *std::max_element(best.begin(), best.end());
}

template <FlowBackend B>
double variation(const B& backend, const Potential<typename B::point_type>& phi, double eps, std::size_t n_pairs,
                 std::uint64_t seed = 0) {
    return variation(backend, phi, eps, sample_points(backend, std::max<std::size_t>(64, n_pairs / 16), seed), n_pairs,
                     seed);
}

/// A point y with d_t(x, y) < eps.  Suspensions change a symbol outside the
/// window read by the segment; other backends shrink a perturbation until it
/// stays within eps along the segment.
template <FlowBackend B>
std::optional<typename B::point_type> bowen_ball_point(const B& backend, const typename B::point_type& x, double t,
                                                       double eps, Rng& rng) {
    if constexpr (requires { backend.bowen_ball_sample(x, t, eps, rng); }) {
        auto y = backend.bowen_ball_sample(x, t, eps, rng);
        if (bowen_distance(backend, x, y, t) < eps) return y;
        return std::nullopt;
    } else {
        double scale = eps * uniform01(rng);
        for (int j = 0; j < 48; ++j, scale *= 0.5) {
            try {
                auto y = backend.perturb(x, scale, rng);
                if (bowen_distance(backend, x, y, t) < eps) return y;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::Diverged) throw;
            }
        }
        return std::nullopt;
    }
}

struct DistortionRecord {
    std::size_t segment = 0;
    double t = 0.0;
    std::size_t probe = 0;
    double diff = 0.0;  // |Φ_0(x, t) - Φ_0(y, t)|
};

struct DistortionReport {
    double eps = 0.0;
    std::size_t samples = 0;
    double k_hat = 0.0;
    double var = 0.0;        // sampled Var(φ, ε)
    double slope = 0.0;      // least-squares slope of max diff against t
    bool unbounded = false;  // slope above 0.01·‖φ‖
    std::vector<DistortionRecord> records;

    /// K(M) = K̂ + 2M·Var(φ, ε).
    double k_of_m(double m) const { return k_hat + 2.0 * m * var; }
};

struct DistortionOptions {
    std::size_t n_probe = 16;
    std::size_t n_pairs = 2000;  // for Var(φ, ε)
    std::uint64_t seed = 0;
};

/// Samples |Φ_0(x, t) - Φ_0(y, t)| over the listed segments of C and probes y
/// in B_t(x, ε).  Probes are keyed by segment id, so a sub-collection sees the
/// same probes.
template <FlowBackend B>
DistortionReport bowen_distortion(const B& backend, const Potential<typename B::point_type>& phi,
                                  const SegmentCollection<typename B::point_type>& c, double eps,
                                  const DistortionOptions& opt = {}) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    DistortionReport rep;
    rep.eps = eps;
    const auto& segs = c.segments;
    std::vector<std::vector<DistortionRecord>> per(segs.size());
    parallel_for(
        segs.size(),
        [&](std::size_t i) {
            const auto& seg = segs[i];
            const auto key = static_cast<std::uint64_t>(seg.id >= 0 ? seg.id : static_cast<std::int64_t>(i));
            Rng rng = make_rng(opt.seed, key);
            const double base = birkhoff(backend, phi, seg.start, seg.t);
            for (std::size_t j = 0; j < opt.n_probe; ++j) {
                auto y = bowen_ball_point(backend, seg.start, seg.t, eps, rng);
                if (!y) continue;
                try {
                    per[i].push_back({i, seg.t, j, std::abs(base - birkhoff(backend, phi, *y, seg.t))});
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::OutsideDomain && e.code() != ErrorCode::Diverged) throw;
                }
            }
        },
        1);
    for (auto& v : per) rep.records.insert(rep.records.end(), v.begin(), v.end());
    rep.samples = rep.records.size();
    for (const auto& r : rep.records) rep.k_hat = std::max(rep.k_hat, r.diff);

    // growth of the per-length maximum
    std::vector<std::pair<double, double>> by_t;
    for (const auto& r : rep.records) {
        auto it = std::find_if(by_t.begin(), by_t.end(), [&](const auto& p) { return p.first == r.t; });
        if (it == by_t.end()) by_t.push_back({r.t, r.diff});
        else it->second = std::max(it->second, r.diff);
    }
    if (by_t.size() >= 2) {
        double mt = 0.0, md = 0.0;
        for (const auto& [t, d] : by_t) {
            mt += t;
            md += d;
        }
        mt /= static_cast<double>(by_t.size());
        md /= static_cast<double>(by_t.size());
        double sxy = 0.0, sxx = 0.0;
        for (const auto& [t, d] : by_t) {
            sxy += (t - mt) * (d - md);
            sxx += (t - mt) * (t - mt);
        }
        rep.slope = sxx > 0.0 ? sxy / sxx : 0.0;
        rep.unbounded = rep.slope > 0.01 * phi.sup_norm;
    }
    rep.var = phi.constant ? 0.0 : variation(backend, phi, eps, opt.n_pairs, opt.seed);
    return rep;
}

struct ExpansivityOptions {
    double window = 50.0;      // T_win
    std::size_t n_probe = 32;
    double tube_tol = -1.0;    // negative: eps / 10
    std::uint64_t seed = 0;
};

/// Finite-window surrogate for x in NE(ε): some probe y stays within ε of x
/// on [-T_win, T_win] yet lies farther than the tube tolerance from the orbit
/// arc f_[-T_win, T_win](x).  Probes whose orbits leave the domain do not count.
/// inf over |s| <= T of d(f_s x, y): the backend's own tube distance, or a
/// sampled orbit otherwise.
template <FlowBackend B>
double tube_distance(const B& backend, const typename B::point_type& x, const typename B::point_type& y, double T) {
    if constexpr (HasTube<B>) {
        return backend.tube_distance(x, y, T);
    } else {
        const std::size_t m = 1024;
        auto p = backend.evolve(x, -T);
        double best = backend.distance(p, y);
        for (std::size_t i = 0; i < m; ++i) {
            p = backend.evolve(p, 2.0 * T / m);
            best = std::min(best, backend.distance(p, y));
        }
        return best;
    }
}

template <FlowBackend B>
bool nonexpansive_test(const B& backend, const typename B::point_type& x, double eps,
                       const ExpansivityOptions& opt = {}, std::uint64_t stream = 0) {
    if (!backend.invertible()) throw Error(ErrorCode::NonInvertible, "expansivity needs an invertible flow");
    if (!(opt.window > 0.0)) throw Error(ErrorCode::InvalidArgument, "window must be positive");
    const double tol = opt.tube_tol >= 0.0 ? opt.tube_tol : eps / 10.0;
    Rng rng = make_rng(opt.seed, stream);
    const auto back_x = backend.evolve(x, -opt.window);
    for (std::size_t j = 0; j < opt.n_probe; ++j) {
        const double scale = eps * (j == 0 ? 1.0 : uniform01(rng));
        try {
            auto y = backend.perturb(x, scale, rng);
            if (backend.distance(x, y) > eps) continue;
            const auto back_y = backend.evolve(y, -opt.window);
            if (bowen_exceeds(backend, back_x, back_y, 2.0 * opt.window, eps)) continue;
            if (tube_distance(backend, x, y, opt.window) > tol) return true;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Diverged) throw;
        }
    }
    return false;
}

struct ExpansivityReport {
    double eps = 0.0;
    double window = 0.0;
    std::size_t tested = 0;
    std::vector<char> ne;    // per tested point
    double ne_fraction = 0.0;
    double p_perp = -kInf;   // -inf: no NE point found
    std::string label;       // "sentinel", "exact", "estimate" or "proxy"
};

struct ObstructionOptions {
    ExpansivityOptions expansivity;
    std::size_t n_points = 64;
    double delta = -1.0;  // pressure scale for estimates; negative: eps / 10
    std::vector<double> t_grid{1.0, 2.0, 3.0, 4.0};
};

/// P⊥_exp(φ, ε) from a sweep of nonexpansive_test.  No NE point gives the
/// -inf sentinel.  Suspensions with a constant or first-symbol potential get
/// the transfer-matrix pressure on the sub-alphabet read by NE points; ODE
/// flows get the pressure estimate of the NE-flagged points, labeled "proxy".
template <FlowBackend B>
ExpansivityReport obstruction_pressure(const B& backend, const Potential<typename B::point_type>& phi, double eps,
                                       const ObstructionOptions& opt = {}) {
    using P = typename B::point_type;
    ExpansivityReport rep;
    rep.eps = eps;
    rep.window = opt.expansivity.window;
    auto pts = sample_points(backend, opt.n_points, opt.expansivity.seed);
    rep.tested = pts.size();
    rep.ne.assign(pts.size(), 0);
    parallel_for(
        pts.size(), [&](std::size_t i) { rep.ne[i] = nonexpansive_test(backend, pts[i], eps, opt.expansivity, i) ? 1 : 0; },
        1);
    std::vector<P> flagged;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (rep.ne[i]) flagged.push_back(pts[i]);
    rep.ne_fraction = pts.empty() ? 0.0 : static_cast<double>(flagged.size()) / static_cast<double>(pts.size());
    if (flagged.empty()) {
        rep.label = "sentinel";
        return rep;
    }
    if constexpr (HasFiberWalk<B>) {
        if (phi.constant || phi.kind == PotentialKind::FirstSymbol) {
            std::vector<char> used(static_cast<std::size_t>(backend.alphabet()), 0);
            for (const auto& x : flagged)
                for (auto c : *x.word) used[c] = 1;
            std::vector<int> symbols;
            for (int a = 0; a < backend.alphabet(); ++a)
                if (used[static_cast<std::size_t>(a)]) symbols.push_back(a);
            std::vector<double> a(static_cast<std::size_t>(backend.alphabet()), phi.constant ? *phi.constant : 0.0);
            if (!phi.constant) a = phi.symbol_values;
            rep.p_perp = suspension_pressure(backend, a, symbols);
            rep.label = "exact";
            return rep;
        }
    }
    SegmentCollection<P> c;
    c.generator = [flagged](double) { return flagged; };
    const double delta = opt.delta > 0.0 ? opt.delta : eps / 10.0;
    rep.p_perp = pressure(backend, phi, c, delta, 0.0, opt.t_grid).value;
    rep.label = HasFiberWalk<B> ? "estimate" : "proxy";
    return rep;
}

}  // namespace thermoflow
