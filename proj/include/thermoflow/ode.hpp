#pragma once

// Fixed-step RK4 flows on R^D.  Negative times integrate the negated field.
// An optional trajectory cache (a long sampled orbit after burn-in) serves
// evolve() by index lookup for points taken from it, which keeps backward
// evolution along the attractor well defined.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "thermoflow/core.hpp"
#include "thermoflow/flow.hpp"

namespace thermoflow {

template <std::size_t D>
using State = std::array<double, D>;

template <std::size_t D>
struct OdePoint {
    State<D> x{};
    std::int64_t cache_index = -1;  // sample index in the attached trajectory, or -1
};

struct LorenzField {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;

    State<3> operator()(const State<3>& v) const {
        return {sigma * (v[1] - v[0]), v[0] * (rho - v[2]) - v[1], v[0] * v[1] - beta * v[2]};
    }
};

/// f ≡ 0: every point is fixed.
template <std::size_t D>
struct ZeroField {
    State<D> operator()(const State<D>&) const { return {}; }
};

template <std::size_t D>
struct TrajectoryCache {
    std::vector<State<D>> samples;
    double spacing = 0.01;
    std::int64_t steps_per_sample = 10;
    std::int64_t margin = 0;  // samples reserved on each side of the cloud
};

struct OdeOptions {
    double dt = 1e-3;
    double box = 1e4;        // |coordinate| beyond this raises Diverged
    double bowen_dt = 0.01;  // sampling resolution for Bowen distances
    double diameter = 100.0;
    std::string name = "ode";
};

template <std::size_t D, class Field>
class OdeFlow {
public:
    using point_type = OdePoint<D>;
    using state_type = State<D>;

    explicit OdeFlow(Field field, OdeOptions options = {}) : field_(std::move(field)), opt_(std::move(options)) {
        if (!(opt_.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
        if (!(opt_.bowen_dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "bowen_dt must be positive");
    }

    const Field& field() const { return field_; }
    const OdeOptions& options() const { return opt_; }
    BackendKind kind() const { return BackendKind::Ode; }
    std::size_t dimension() const { return D; }
    double time_step() const { return opt_.dt; }
    bool invertible() const { return true; }
    double diameter() const { return opt_.diameter; }
    const TrajectoryCache<D>* cache() const { return cache_.get(); }

    static point_type point(const state_type& x) { return point_type{x, -1}; }

    /// Copy of this flow with a cached trajectory: `burn_in` time units from
    /// x0 are discarded, then count + 2*margin samples spaced `spacing` apart
    /// are stored.
    OdeFlow with_trajectory(const state_type& x0, double burn_in, std::size_t count, double spacing,
                            std::size_t margin) const {
        auto c = std::make_shared<TrajectoryCache<D>>();
        c->steps_per_sample = std::max<std::int64_t>(1, std::llround(spacing / opt_.dt));
        c->spacing = static_cast<double>(c->steps_per_sample) * opt_.dt;
        c->margin = static_cast<std::int64_t>(margin);
        state_type x = x0;
        const auto burn_steps = static_cast<std::int64_t>(std::llround(burn_in / opt_.dt));
        for (std::int64_t i = 0; i < burn_steps; ++i) x = rk4_step(x, opt_.dt);
        check_box(x);
        const std::size_t total = count + 2 * margin;
        c->samples.reserve(total);
        for (std::size_t i = 0; i < total; ++i) {
            if (i > 0)
                for (std::int64_t s = 0; s < c->steps_per_sample; ++s) x = rk4_step(x, opt_.dt);
            check_box(x);
            c->samples.push_back(x);
        }
        OdeFlow copy = *this;
        copy.cache_ = std::move(c);
        return copy;
    }

    /// Copy of this flow using a previously computed trajectory.
    OdeFlow with_cache(TrajectoryCache<D> cache) const {
        if (cache.samples.size() <= static_cast<std::size_t>(2 * cache.margin))
            throw Error(ErrorCode::InvalidArgument, "trajectory cache shorter than its margins");
        OdeFlow copy = *this;
        copy.cache_ = std::make_shared<const TrajectoryCache<D>>(std::move(cache));
        return copy;
    }

    /// Cloud of `count` consecutive cached samples (after the margin).
    std::vector<point_type> trajectory_cloud(std::size_t count) const {
        if (!cache_) throw Error(ErrorCode::InvalidArgument, "no trajectory attached");
        const auto available = static_cast<std::size_t>(static_cast<std::int64_t>(cache_->samples.size()) - 2 * cache_->margin);
        count = std::min(count, available);
        std::vector<point_type> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            const auto idx = cache_->margin + static_cast<std::int64_t>(i);
            out.push_back(point_type{cache_->samples[static_cast<std::size_t>(idx)], idx});
        }
        return out;
    }

    point_type evolve(const point_type& p, double t) const {
        if (t == 0.0) return p;
        if (p.cache_index >= 0 && cache_) {
            const double k = t / cache_->spacing;
            const double kr = std::round(k);
            if (std::abs(k - kr) < 1e-9) {
                const auto idx = p.cache_index + static_cast<std::int64_t>(kr);
                if (idx >= 0 && idx < static_cast<std::int64_t>(cache_->samples.size()))
                    return point_type{cache_->samples[static_cast<std::size_t>(idx)], idx};
            }
        }
        return point_type{integrate(p.x, t), -1};
    }

    /// Full RK4 steps of size dt, then one partial step for the remainder.
    state_type integrate(state_type x, double t) const {
        const double sign = t < 0.0 ? -1.0 : 1.0;
        const double span = std::abs(t);
        double steps_real = span / opt_.dt;
        auto n = static_cast<std::int64_t>(std::floor(steps_real + 1e-9));
        double rem = span - static_cast<double>(n) * opt_.dt;
        if (rem < 1e-12) rem = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            x = rk4_step(x, sign * opt_.dt);
            if ((i & 255) == 255) check_box(x);
        }
        if (rem > 0.0) x = rk4_step(x, sign * rem);
        check_box(x);
        return x;
    }

    state_type rk4_step(const state_type& x, double h) const {
        const state_type k1 = field_(x);
        const state_type k2 = field_(axpy(x, 0.5 * h, k1));
        const state_type k3 = field_(axpy(x, 0.5 * h, k2));
        const state_type k4 = field_(axpy(x, h, k3));
        state_type y;
        for (std::size_t i = 0; i < D; ++i) y[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        return y;
    }

    double distance(const point_type& a, const point_type& b) const { return euclid(a.x, b.x); }

    bool same_point(const point_type& a, const point_type& b) const { return a.x == b.x; }

    /// Number of intervals in the Bowen sampling grid for duration t.
    std::size_t bowen_intervals(double t) const {
        const double m = std::ceil(std::abs(t) / opt_.bowen_dt - 1e-9);
        return static_cast<std::size_t>(std::max(64.0, m));
    }

    /// Orbit samples at s_i = i·t/m, i = 0..m.
    std::vector<point_type> sample_orbit(const point_type& x, double t, std::size_t m) const {
        std::vector<point_type> out;
        out.reserve(m + 1);
        out.push_back(x);
        const double step = t / static_cast<double>(m);
        for (std::size_t i = 0; i < m; ++i) out.push_back(evolve(out.back(), step));
        return out;
    }

    /// Sampled sup of d(f_s x, f_s y) over the default grid of [0, t].
    double bowen_distance(const point_type& x, const point_type& y, double t) const {
        return bowen_walk(x, y, t, bowen_intervals(t), kInf);
    }

    bool bowen_exceeds(const point_type& x, const point_type& y, double t, double bound) const {
        return bowen_walk(x, y, t, bowen_intervals(t), bound) > bound;
    }

    double bowen_walk(const point_type& x, const point_type& y, double t, std::size_t m, double bound) const {
        double best = distance(x, y);
        if (t <= 0.0) return best;
        const double step = t / static_cast<double>(m);
        point_type a = x, b = y;
        for (std::size_t i = 0; i < m && best <= bound; ++i) {
            a = evolve(a, step);
            b = evolve(b, step);
            best = std::max(best, distance(a, b));
        }
        return best;
    }

    std::vector<double> features(const point_type& p) const { return {p.x.begin(), p.x.end()}; }

    /// Coordinates at s = 0 plus the first coordinate at the last grid sample.
    std::vector<double> hash_features(const point_type& p, double t) const {
        std::vector<double> f(p.x.begin(), p.x.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(D, 3)));
        if (t > 0.0) {
            const std::size_t m = bowen_intervals(t);
            const double step = t / static_cast<double>(m);
            point_type a = p;
            for (std::size_t i = 0; i < m; ++i) a = evolve(a, step);
            f.push_back(a.x[0]);
        }
        return f;
    }

    /// Uniform sample from the closed ball of radius `scale` around p.
    point_type perturb(const point_type& p, double scale, Rng& rng) const {
        state_type dir;
        double norm = 0.0;
        do {
            norm = 0.0;
            for (auto& c : dir) {
                c = 2.0 * uniform01(rng) - 1.0;
                norm += c * c;
            }
        } while (norm > 1.0 || norm < 1e-12);
        norm = std::sqrt(norm);
        const double r = scale * std::pow(uniform01(rng), 1.0 / static_cast<double>(D));
        point_type q{p.x, -1};
        for (std::size_t i = 0; i < D; ++i) q.x[i] += r * dir[i] / norm;
        return q;
    }

    /// Distance from y to the orbit arc f_[-T, T](x), using the sampled
    /// polyline through the orbit.
    double tube_distance(const point_type& x, const point_type& y, double T) const {
        const std::size_t m = bowen_intervals(T);
        double best = kInf;
        for (double sign : {1.0, -1.0}) {
            const auto orbit = sample_orbit(x, sign * T, m);
            for (std::size_t i = 0; i + 1 < orbit.size(); ++i)
                best = std::min(best, segment_distance(orbit[i].x, orbit[i + 1].x, y.x));
        }
        return best;
    }

    Potential<point_type> coordinate_potential(std::size_t axis) const {
        if (axis >= D) throw Error(ErrorCode::InvalidArgument, "axis out of range");
        Potential<point_type> phi;
        phi.kind = PotentialKind::Coordinate;
        phi.evaluator = [axis](const point_type& p) { return p.x[axis]; };
        phi.sup_norm = opt_.diameter;
        phi.holder_exponent = 1.0;
        phi.holder_constant = 1.0;
        phi.label = "coordinate";
        return phi;
    }

private:
    static state_type axpy(const state_type& x, double a, const state_type& v) {
        state_type y;
        for (std::size_t i = 0; i < D; ++i) y[i] = x[i] + a * v[i];
        return y;
    }

    static double euclid(const state_type& a, const state_type& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < D; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(s);
    }

    static double segment_distance(const state_type& a, const state_type& b, const state_type& p) {
        double ab2 = 0.0, dot = 0.0;
        for (std::size_t i = 0; i < D; ++i) {
            ab2 += (b[i] - a[i]) * (b[i] - a[i]);
            dot += (p[i] - a[i]) * (b[i] - a[i]);
        }
        const double u = ab2 > 0.0 ? std::clamp(dot / ab2, 0.0, 1.0) : 0.0;
        state_type q;
        for (std::size_t i = 0; i < D; ++i) q[i] = a[i] + u * (b[i] - a[i]);
        return euclid(q, p);
    }

    void check_box(const state_type& x) const {
        for (double c : x)
            if (!std::isfinite(c) || std::abs(c) > opt_.box)
                throw Error(ErrorCode::Diverged, "state left the bounding box");
    }

    Field field_;
    OdeOptions opt_;
    std::shared_ptr<const TrajectoryCache<D>> cache_;
};

/// Uniform grid over a point set answering "is p within r of some member".
template <std::size_t D>
class BallUnion {
public:
    BallUnion(std::vector<State<D>> centers, double radius) : centers_(std::move(centers)), r_(radius) {
        if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
        for (std::size_t i = 0; i < centers_.size(); ++i) cells_[key(cell_of(centers_[i]))].push_back(i);
    }

    double radius() const { return r_; }

    /// True when p is the center with the given index.
    bool is_center(std::int64_t index, const State<D>& p) const {
        return index >= 0 && static_cast<std::size_t>(index) < centers_.size() && centers_[static_cast<std::size_t>(index)] == p;
    }

    bool contains(const State<D>& p) const {
        const auto c = cell_of(p);
        std::array<std::int64_t, D> probe{};
        const std::size_t combos = ipow3(D);
        for (std::size_t code = 0; code < combos; ++code) {
            std::size_t rest = code;
            for (std::size_t i = 0; i < D; ++i) {
                probe[i] = c[i] + static_cast<std::int64_t>(rest % 3) - 1;
                rest /= 3;
            }
            auto it = cells_.find(key(probe));
            if (it == cells_.end()) continue;
            for (std::size_t idx : it->second) {
                double s = 0.0;
                for (std::size_t i = 0; i < D; ++i) s += (centers_[idx][i] - p[i]) * (centers_[idx][i] - p[i]);
                if (s <= r_ * r_) return true;
            }
        }
        return false;
    }

private:
    static std::size_t ipow3(std::size_t n) {
        std::size_t v = 1;
        for (std::size_t i = 0; i < n; ++i) v *= 3;
        return v;
    }

    std::array<std::int64_t, D> cell_of(const State<D>& p) const {
        std::array<std::int64_t, D> c{};
        for (std::size_t i = 0; i < D; ++i) c[i] = static_cast<std::int64_t>(std::floor(p[i] / r_));
        return c;
    }

    static std::uint64_t key(const std::array<std::int64_t, D>& c) {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (auto v : c) h = mix_seed(h, static_cast<std::uint64_t>(v));
        return h;
    }

    std::vector<State<D>> centers_;
    double r_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

/// Neighborhood made of closed r-balls around every cached trajectory sample.
template <std::size_t D, class Field>
Neighborhood<OdePoint<D>> ball_union_neighborhood(const OdeFlow<D, Field>& flow, double radius, NeighborhoodLabel label) {
    if (!flow.cache()) throw Error(ErrorCode::InvalidArgument, "no trajectory attached");
    auto grid = std::make_shared<const BallUnion<D>>(flow.cache()->samples, radius);
    Neighborhood<OdePoint<D>> n;
    n.kind = NeighborhoodKind::MetricBallUnion;
    n.label = label;
    n.contains = [grid](const OdePoint<D>& p) { return grid->is_center(p.cache_index, p.x) || grid->contains(p.x); };
    return n;
}

template <std::size_t D, class Field>
NeighborhoodSet<OdePoint<D>> ball_neighborhoods(const OdeFlow<D, Field>& flow, double u_radius, double u1_radius,
                                                double lambda_radius) {
    if (!(lambda_radius <= u1_radius && u1_radius <= u_radius))
        throw Error(ErrorCode::InvalidArgument, "radii must be nested");
    return {ball_union_neighborhood(flow, u_radius, NeighborhoodLabel::U),
            ball_union_neighborhood(flow, u1_radius, NeighborhoodLabel::U1),
            ball_union_neighborhood(flow, lambda_radius, NeighborhoodLabel::LambdaHull)};
}

using LorenzFlow = OdeFlow<3, LorenzField>;
using LorenzPoint = OdePoint<3>;

inline LorenzFlow make_lorenz(LorenzField params = {}, OdeOptions options = {}) {
    if (options.name == "ode") options.name = "lorenz";
    return LorenzFlow(params, options);
}

static_assert(FlowBackend<LorenzFlow>);

}  // namespace thermoflow
