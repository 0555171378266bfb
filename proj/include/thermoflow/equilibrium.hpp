#pragma once

// Candidate equilibrium states: weighted empirical measures ν_t on separated
// sets, their time averages μ_t, a limit candidate with weak* diagnostics, and
// numeric lower, upper and mixing Gibbs checks.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "thermoflow/core.hpp"
#include "thermoflow/ode.hpp"
#include "thermoflow/partition.hpp"
#include "thermoflow/segments.hpp"
#include "thermoflow/suspension.hpp"

namespace thermoflow {

enum class Provenance { Nu, Mu, Limit };

inline const char* to_string(Provenance p) {
    switch (p) {
    case Provenance::Nu: return "nu_t";
    case Provenance::Mu: return "mu_t";
    case Provenance::Limit: return "limit";
    }
    return "?";
}

template <class P>
struct EmpiricalMeasure {
    std::vector<P> atoms;
    std::vector<double> weights;
    Provenance provenance = Provenance::Nu;
    double t = 0.0;

    std::size_t size() const { return atoms.size(); }
    double total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

    template <class G>
    double integrate(G&& g) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i) acc += weights[i] * g(atoms[i]);
        return acc;
    }
};

namespace detail {

inline void normalize(std::vector<double>& w) {
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "measure has no mass");
    for (auto& v : w) v /= s;
}

/// Byte key identifying a point up to equality of the underlying state.
inline std::string atom_key(const SymbolicPoint& x) {
    const std::int64_t p = x.period();
    Word w = x.window(0, p);
    std::int64_t q = p;
    for (std::int64_t d = 1; d < p; ++d) {
        if (p % d != 0) continue;
        bool periodic = true;
        for (std::int64_t i = d; i < p && periodic; ++i) periodic = w[static_cast<std::size_t>(i)] == w[static_cast<std::size_t>(i - d)];
        if (periodic) {
            q = d;
            break;
        }
    }
    std::string key(reinterpret_cast<const char*>(&x.height), sizeof x.height);
    key.append(reinterpret_cast<const char*>(w.data()), static_cast<std::size_t>(q));
    return key;
}

template <std::size_t D>
std::string atom_key(const OdePoint<D>& x) {
    return std::string(reinterpret_cast<const char*>(x.x.data()), sizeof(double) * D);
}

template <class P>
concept HasAtomKey = requires(const P& p) {
    { atom_key(p) } -> std::same_as<std::string>;
};

}  // namespace detail

/// ν_t: weights ∝ exp Φ₀(x, t) on a greedy max-weight (t, ρ₁)-separated subset
/// of the slice (C)_t.
template <FlowBackend B>
EmpiricalMeasure<typename B::point_type> build_nu(const B& backend, const Potential<typename B::point_type>& phi,
                                                  const SegmentCollection<typename B::point_type>& c, double t,
                                                  double rho1) {
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be positive");
    if (!(rho1 > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho1 must be positive");
    const auto pts = c.slice(t);
    if (pts.empty()) throw Error(ErrorCode::EmptySlice, "the slice (C)_t is empty");
    std::vector<double> w(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { w[i] = birkhoff(backend, phi, pts[i], t); });
    auto set = build_separated(backend, pts, t, rho1, w);
    EmpiricalMeasure<typename B::point_type> nu;
    nu.atoms = std::move(set.points);
    const double top = *std::max_element(set.weights.begin(), set.weights.end());
    nu.weights.reserve(set.weights.size());
    for (double v : set.weights) nu.weights.push_back(std::exp(v - top));
    detail::normalize(nu.weights);
    nu.provenance = Provenance::Nu;
    nu.t = t;
    return nu;
}

/// μ_t = (1/t) ∫₀ᵗ (f_s)_* ν_t ds by the left Riemann sum at s_i = i t / n.
/// Atoms are ordered slice-major within each ν-atom.
template <FlowBackend B>
EmpiricalMeasure<typename B::point_type> time_average(const B& backend,
                                                      const EmpiricalMeasure<typename B::point_type>& nu, double t,
                                                      std::size_t n_slices) {
    if (nu.provenance != Provenance::Nu) throw Error(ErrorCode::InvalidArgument, "time_average expects nu_t");
    if (n_slices == 0) throw Error(ErrorCode::InvalidArgument, "need at least one slice");
    EmpiricalMeasure<typename B::point_type> mu;
    mu.provenance = Provenance::Mu;
    mu.t = t;
    const std::size_t n = nu.size();
    mu.atoms.resize(n * n_slices);
    mu.weights.resize(n * n_slices);
    const double inv = 1.0 / static_cast<double>(n_slices);
    parallel_for(n, [&](std::size_t a) {
        auto p = nu.atoms[a];
        for (std::size_t i = 0; i < n_slices; ++i) {
            const double s = t * static_cast<double>(i) / static_cast<double>(n_slices);
            mu.atoms[a * n_slices + i] = i == 0 ? p : backend.evolve(nu.atoms[a], s);
            mu.weights[a * n_slices + i] = nu.weights[a] * inv;
        }
    });
    return mu;
}

/// Sums the weights of atoms that are the same point; first occurrences keep
/// their order.
template <class P>
EmpiricalMeasure<P> merge_atoms(const EmpiricalMeasure<P>& m) {
    if constexpr (!detail::HasAtomKey<P>) {
        return m;
    } else {
        EmpiricalMeasure<P> out;
        out.provenance = m.provenance;
        out.t = m.t;
        std::unordered_map<std::string, std::size_t> index;
        index.reserve(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            auto [it, fresh] = index.try_emplace(detail::atom_key(m.atoms[i]), out.atoms.size());
            if (fresh) {
                out.atoms.push_back(m.atoms[i]);
                out.weights.push_back(m.weights[i]);
            } else {
                out.weights[it->second] += m.weights[i];
            }
        }
        return out;
    }
}

/// Fixed family of bounded Lipschitz test functions on feature space:
/// normalized coordinates, tent bumps at 16 anchors with 3 widths, and
/// cosine modes filling the remainder up to 64.
class TestDictionary {
public:
    static constexpr std::size_t kSize = 64;

    TestDictionary() = default;

    explicit TestDictionary(const std::vector<std::vector<double>>& samples) {
        if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "dictionary needs samples");
        dims_ = samples.front().size();
        lo_.assign(dims_, kInf);
        hi_.assign(dims_, -kInf);
        for (const auto& f : samples)
            for (std::size_t k = 0; k < dims_; ++k) {
                lo_[k] = std::min(lo_[k], f[k]);
                hi_[k] = std::max(hi_[k], f[k]);
            }
        span_.resize(dims_);
        for (std::size_t k = 0; k < dims_; ++k) span_[k] = hi_[k] - lo_[k] > 0.0 ? hi_[k] - lo_[k] : 1.0;
        if (dims_ > 16) throw Error(ErrorCode::InvalidArgument, "dictionary supports at most 16 feature dimensions");
        for (std::size_t k = 0; k < 16; ++k) anchors_.push_back(scaled(samples[k * samples.size() / 16]));
    }

    std::size_t size() const { return kSize; }

    /// Value of the j-th function at feature vector f, in [-1, 1].
    double operator()(std::size_t j, const std::vector<double>& f) const {
        const auto y = scaled(f);
        if (j < dims_) return y[j] - 0.5;
        j -= std::min(j, dims_);
        if (j < 48) {
            const auto& a = anchors_[j / 3];
            const double width = 0.125 * static_cast<double>(1 << (j % 3));
            double d = 0.0;
            for (std::size_t k = 0; k < dims_; ++k) d = std::max(d, std::abs(y[k] - a[k]));
            return std::max(0.0, 1.0 - d / width);
        }
        j -= 48;
        const std::size_t axis = j % std::max<std::size_t>(dims_, 1);
        const double freq = static_cast<double>(1 + j / std::max<std::size_t>(dims_, 1));
        return std::cos(3.141592653589793 * freq * y[axis]);
    }

    std::vector<double> integrals(const std::vector<std::vector<double>>& features, const std::vector<double>& w) const {
        std::vector<double> out(kSize, 0.0);
        for (std::size_t j = 0; j < kSize; ++j)
            for (std::size_t i = 0; i < features.size(); ++i) out[j] += w[i] * (*this)(j, features[i]);
        return out;
    }

private:
    std::vector<double> scaled(const std::vector<double>& f) const {
        std::vector<double> y(dims_);
        for (std::size_t k = 0; k < dims_; ++k) y[k] = (f[k] - lo_[k]) / span_[k];
        return y;
    }

    std::size_t dims_ = 0;
    std::vector<double> lo_, hi_, span_;
    std::vector<std::vector<double>> anchors_;
};

struct LimitOptions {
    std::size_t n_slices = 0;      ///< slices per measure; 0 uses slices_per_unit
    double slices_per_unit = 4.0;  ///< n = max(1, round(t * slices_per_unit))
    double invariance_step = 1.0;
    double cauchy_tol = 0.05;
    bool merge = true;
};

template <class P>
struct LimitCandidate {
    EmpiricalMeasure<P> measure;
    std::vector<double> t_grid;
    std::vector<std::size_t> nu_sizes;
    std::vector<double> total_mass;
    /// sup over the dictionary of |∫g dμ_ti - ∫g dμ_tj|, row-major over the grid
    std::vector<std::vector<double>> discrepancy;
    double cauchy_gap = 0.0;  ///< discrepancy between the last two grid entries
    bool non_cauchy = false;
    double invariance_defect = 0.0;
};

inline std::size_t slices_for(double t, const LimitOptions& opt) {
    if (opt.n_slices > 0) return opt.n_slices;
    return static_cast<std::size_t>(std::max(1.0, std::round(t * opt.slices_per_unit)));
}

/// μ at the largest grid time, with weak* Cauchy and invariance diagnostics
/// over a 64-function dictionary fixed from the final measure.
template <FlowBackend B>
LimitCandidate<typename B::point_type> limit_candidate(const B& backend, const Potential<typename B::point_type>& phi,
                                                       const SegmentCollection<typename B::point_type>& c,
                                                       const std::vector<double>& t_grid, double rho1,
                                                       const LimitOptions& opt = {}) {
    using P = typename B::point_type;
    if (t_grid.size() < 3) throw Error(ErrorCode::InvalidArgument, "limit_candidate needs at least 3 grid times");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw Error(ErrorCode::InvalidArgument, "t_grid must be increasing");
    LimitCandidate<P> out;
    out.t_grid = t_grid;
    std::vector<EmpiricalMeasure<P>> mus;
    for (double t : t_grid) {
        auto nu = build_nu(backend, phi, c, t, rho1);
        out.nu_sizes.push_back(nu.size());
        auto mu = time_average(backend, nu, t, slices_for(t, opt));
        if (opt.merge) mu = merge_atoms(mu);
        out.total_mass.push_back(mu.total());
        mus.push_back(std::move(mu));
    }
    auto feats = [&](const EmpiricalMeasure<P>& m) {
        std::vector<std::vector<double>> f(m.size());
        parallel_for(m.size(), [&](std::size_t i) { f[i] = backend.features(m.atoms[i]); });
        return f;
    };
    const auto last_feats = feats(mus.back());
    const TestDictionary dict(last_feats);
    std::vector<std::vector<double>> ints;
    for (std::size_t i = 0; i + 1 < mus.size(); ++i) ints.push_back(dict.integrals(feats(mus[i]), mus[i].weights));
    ints.push_back(dict.integrals(last_feats, mus.back().weights));
    const std::size_t n = mus.size();
    out.discrepancy.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < dict.size(); ++k)
                out.discrepancy[i][j] = std::max(out.discrepancy[i][j], std::abs(ints[i][k] - ints[j][k]));
    out.cauchy_gap = out.discrepancy[n - 2][n - 1];
    out.non_cauchy = out.cauchy_gap > opt.cauchy_tol;

    auto& mu = mus.back();
    std::vector<std::vector<double>> moved(mu.size());
    parallel_for(mu.size(), [&](std::size_t i) { moved[i] = backend.features(backend.evolve(mu.atoms[i], opt.invariance_step)); });
    const auto shifted = dict.integrals(moved, mu.weights);
    for (std::size_t k = 0; k < dict.size(); ++k)
        out.invariance_defect = std::max(out.invariance_defect, std::abs(shifted[k] - ints.back()[k]));
    out.measure = std::move(mu);
    out.measure.provenance = Provenance::Limit;
    return out;
}

struct SupportFractions {
    double u1_mass = 0.0;
    double lambda_mass = 0.0;
    double u1_count = 0.0;
    double lambda_count = 0.0;
};

/// Fractions of atoms (by weight and by count) inside U₁ and inside the Λ hull.
template <class P>
SupportFractions support_fractions(const EmpiricalMeasure<P>& m, const NeighborhoodSet<P>& nbhd) {
    SupportFractions s;
    if (m.size() == 0) return s;
    std::vector<char> in_u1(m.size()), in_lam(m.size());
    parallel_for(m.size(), [&](std::size_t i) {
        in_u1[i] = nbhd.u1.contains(m.atoms[i]) ? 1 : 0;
        in_lam[i] = nbhd.lambda.contains(m.atoms[i]) ? 1 : 0;
    });
    for (std::size_t i = 0; i < m.size(); ++i) {
        s.u1_mass += in_u1[i] ? m.weights[i] : 0.0;
        s.lambda_mass += in_lam[i] ? m.weights[i] : 0.0;
        s.u1_count += in_u1[i];
        s.lambda_count += in_lam[i];
    }
    s.u1_count /= static_cast<double>(m.size());
    s.lambda_count /= static_cast<double>(m.size());
    return s;
}

/// μ(B_t(x, r)): total weight of atoms within Bowen distance r of x.
template <FlowBackend B>
double ball_mass(const B& backend, const EmpiricalMeasure<typename B::point_type>& mu, const typename B::point_type& x,
                 double t, double r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!(backend.distance(x, mu.atoms[i]) < r)) continue;
        if (!bowen_exceeds(backend, x, mu.atoms[i], t, r)) acc += mu.weights[i];
    }
    return acc;
}

enum class GibbsKind { Lower, Upper };

struct GibbsOptions {
    double t2 = -1.0;  ///< segments with t <= t2 are skipped; negative means μ.t / 4
    std::string p_source = "estimate";
    double floor = 0.5;
    double ceiling = 2.0;
    ProbeOptions probe;
};

struct GibbsRecord {
    std::int64_t id = 0;
    double t = 0.0;
    double mass = 0.0;
    double log_reference = 0.0;  ///< -tP̂ + Φ(x, t)
    double ratio = 0.0;
    bool good = false;           ///< flagged as an element of (G₀)¹
    double ratio_phi0 = 0.0;     ///< upper check with Φ₀ on flagged segments
};

struct GibbsReport {
    GibbsKind kind = GibbsKind::Lower;
    double scale = 0.0;  ///< ρ for lower, γ for upper
    double p_hat = 0.0;
    std::string p_source;
    double t2 = 0.0;
    double t_min = 0.0, t_max = 0.0;
    std::size_t skipped = 0;
    std::vector<GibbsRecord> records;
    double q_hat = 0.0;        ///< min ratio (lower) or max ratio (upper)
    double q_hat_phi0 = 0.0;   ///< upper: max ratio with Φ₀ over flagged segments
    double bound = 0.0;
    bool pass = false;
};

namespace detail {

template <FlowBackend B>
GibbsReport gibbs_check(const B& backend, const Potential<typename B::point_type>& phi,
                        const EmpiricalMeasure<typename B::point_type>& mu,
                        const SegmentCollection<typename B::point_type>& segs, double r, double p_hat,
                        GibbsKind kind, const std::vector<char>& good, const GibbsOptions& opt) {
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "ball radius must be positive");
    GibbsReport rep;
    rep.kind = kind;
    rep.scale = r;
    rep.p_hat = p_hat;
    rep.p_source = opt.p_source;
    rep.t2 = opt.t2 >= 0.0 ? opt.t2 : mu.t / 4.0;
    rep.bound = kind == GibbsKind::Lower ? opt.floor : opt.ceiling;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (segs.segments[i].t > rep.t2) keep.push_back(i);
        else ++rep.skipped;
    }
    rep.records.resize(keep.size());
    parallel_for(keep.size(), [&](std::size_t k) {
        const auto& s = segs.segments[keep[k]];
        GibbsRecord& g = rep.records[k];
        g.id = s.id;
        g.t = s.t;
        g.mass = ball_mass(backend, mu, s.start, s.t, r);
        const double phi_t = kind == GibbsKind::Lower ? birkhoff(backend, phi, s.start, s.t)
                                                      : phi_eps(backend, phi, s.start, s.t, r, opt.probe);
        g.log_reference = -s.t * p_hat + phi_t;
        g.ratio = g.mass > 0.0 ? std::exp(std::log(g.mass) - g.log_reference) : 0.0;
        g.good = keep[k] < good.size() && good[keep[k]];
        if (kind == GibbsKind::Upper && g.good) {
            const double ref0 = -s.t * p_hat + birkhoff(backend, phi, s.start, s.t);
            g.ratio_phi0 = g.mass > 0.0 ? std::exp(std::log(g.mass) - ref0) : 0.0;
        }
    }, 1);
    if (rep.records.empty()) return rep;
    rep.t_min = kInf;
    rep.t_max = -kInf;
    rep.q_hat = kind == GibbsKind::Lower ? kInf : 0.0;
    for (const auto& g : rep.records) {
        rep.t_min = std::min(rep.t_min, g.t);
        rep.t_max = std::max(rep.t_max, g.t);
        rep.q_hat = kind == GibbsKind::Lower ? std::min(rep.q_hat, g.ratio) : std::max(rep.q_hat, g.ratio);
        if (g.good) rep.q_hat_phi0 = std::max(rep.q_hat_phi0, g.ratio_phi0);
    }
    rep.pass = kind == GibbsKind::Lower ? rep.q_hat > 0.0 && rep.q_hat >= rep.bound
                                        : rep.q_hat <= rep.bound && rep.q_hat_phi0 <= rep.bound;
    return rep;
}

}  // namespace detail

/// Lower Gibbs check: Q̂ = min over segments of μ(B_t(x, ρ)) / e^{-tP̂ + Φ₀(x, t)}.
template <FlowBackend B>
GibbsReport gibbs_lower(const B& backend, const Potential<typename B::point_type>& phi,
                        const EmpiricalMeasure<typename B::point_type>& mu,
                        const SegmentCollection<typename B::point_type>& segs, double rho, double p_hat,
                        const GibbsOptions& opt = {}) {
    return detail::gibbs_check(backend, phi, mu, segs, rho, p_hat, GibbsKind::Lower, {}, opt);
}

/// Upper Gibbs check: Q̂ = max of μ(B_t(x, γ)) / e^{-tP̂ + Φ_γ(x, t)}; segments
/// flagged in `good` are also checked against Φ₀.
template <FlowBackend B>
GibbsReport gibbs_upper(const B& backend, const Potential<typename B::point_type>& phi,
                        const EmpiricalMeasure<typename B::point_type>& mu,
                        const SegmentCollection<typename B::point_type>& segs, double gamma, double p_hat,
                        const std::vector<char>& good = {}, const GibbsOptions& opt = {}) {
    return detail::gibbs_check(backend, phi, mu, segs, gamma, p_hat, GibbsKind::Upper, good, opt);
}

struct MixingOptions {
    double tau = 1.0;
    double m = 1.0;        ///< M; k ranges over 0..2[M]
    std::size_t n = 8;     ///< N; i ranges over 0..N
    double t2 = 0.0;
    double floor = 0.5;
    std::string p_source = "estimate";
};

struct MixingEntry {
    double q_prime = 0.0;
    double mass = 0.0;
    double ratio = 0.0;
};

struct MixingReport {
    double q = 0.0;
    double rho = 0.0;
    double p_hat = 0.0;
    std::string p_source;
    double log_reference = 0.0;
    std::vector<MixingEntry> scanned;
    double best_q_prime = 0.0;
    double best_ratio = 0.0;
    bool pass = false;
};

/// Scans q' = q - k - (2i/N)τ and reports the largest
/// μ(B_{t₁}(x₁, ρ) ∩ f_{-(t₁+q')} B_{t₂}(x₂, ρ)) / e^{-(t₁+t₂)P̂ + Φ₀(x₁,t₁) + Φ₀(x₂,t₂)}.
template <FlowBackend B>
MixingReport gibbs_mixing(const B& backend, const Potential<typename B::point_type>& phi,
                          const EmpiricalMeasure<typename B::point_type>& mu,
                          const OrbitSegment<typename B::point_type>& s1,
                          const OrbitSegment<typename B::point_type>& s2, double q, double rho, double p_hat,
                          const MixingOptions& opt = {}) {
    if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
    if (!(q > opt.t2 + 2.0 * opt.tau))
        throw Error(ErrorCode::InvalidArgument, "q must exceed T2 + 2 tau");
    if (opt.n == 0) throw Error(ErrorCode::InvalidArgument, "N must be positive");
    MixingReport rep;
    rep.q = q;
    rep.rho = rho;
    rep.p_hat = p_hat;
    rep.p_source = opt.p_source;
    rep.log_reference =
        -(s1.t + s2.t) * p_hat + birkhoff(backend, phi, s1.start, s1.t) + birkhoff(backend, phi, s2.start, s2.t);

    std::vector<char> in_first(mu.size());
    parallel_for(mu.size(), [&](std::size_t i) {
        in_first[i] = backend.distance(s1.start, mu.atoms[i]) < rho && !bowen_exceeds(backend, s1.start, mu.atoms[i], s1.t, rho);
    });
    std::vector<std::size_t> first;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (in_first[i]) first.push_back(i);

    const auto kmax = static_cast<std::int64_t>(2.0 * std::floor(opt.m));
    for (std::int64_t k = 0; k <= kmax; ++k) {
        for (std::size_t i = 0; i <= opt.n; ++i) {
            const double qp = q - static_cast<double>(k) - 2.0 * static_cast<double>(i) / static_cast<double>(opt.n) * opt.tau;
            if (qp < 0.0) continue;
            std::vector<double> w(first.size(), 0.0);
            parallel_for(first.size(), [&](std::size_t j) {
                const auto y = backend.evolve(mu.atoms[first[j]], s1.t + qp);
                if (backend.distance(s2.start, y) < rho && !bowen_exceeds(backend, s2.start, y, s2.t, rho))
                    w[j] = mu.weights[first[j]];
            });
            MixingEntry e;
            e.q_prime = qp;
            e.mass = std::accumulate(w.begin(), w.end(), 0.0);
            e.ratio = e.mass > 0.0 ? std::exp(std::log(e.mass) - rep.log_reference) : 0.0;
            rep.scanned.push_back(e);
            if (e.ratio > rep.best_ratio) {
                rep.best_ratio = e.ratio;
                rep.best_q_prime = qp;
            }
        }
    }
    rep.pass = rep.best_ratio > 0.0 && rep.best_ratio >= opt.floor;
    return rep;
}

}  // namespace thermoflow
