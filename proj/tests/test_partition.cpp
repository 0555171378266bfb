#include <catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace thermoflow;
using namespace fixtures;
using Catch::Approx;

namespace {

/// Σ over admissible words w of length n of exp(Σ_i a_{w_i}), by a
/// forward transfer recursion.
double word_weight_sum(const std::vector<std::vector<int>>& adj, const std::vector<double>& a, int n) {
    const std::size_t k = a.size();
    std::vector<double> v(k);
    for (std::size_t i = 0; i < k; ++i) v[i] = std::exp(a[i]);
    for (int step = 1; step < n; ++step) {
        std::vector<double> next(k, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                if (adj[i][j]) next[j] += v[i] * std::exp(a[j]);
        v = next;
    }
    double total = 0.0;
    for (double x : v) total += x;
    return total;
}

}  // namespace

TEST_CASE("birkhoff examples") {
    SuspensionFlow flow(SuspensionSpec::full_shift(2));
    auto c = constant_potential<SymbolicPoint>(1.5);
    CHECK(birkhoff(flow, c, flow.point("01"), 5.0) == Approx(7.5));
    auto phi = flow.first_symbol_potential({0.0, std::log(2.0)});
    CHECK(birkhoff(flow, phi, flow.point("0110"), 0.0) == 0.0);
    CHECK(birkhoff(flow, phi, flow.point("0110"), 4.0) == Approx(2.0 * std::log(2.0)));
    // partial fibers count by time spent
    CHECK(birkhoff(flow, phi, flow.point("0110", 0, 0.5), 1.0) == Approx(0.5 * std::log(2.0)));

    const auto& lorenz = lorenz_with_trajectory();
    auto p = lorenz.trajectory_cloud(1)[0];
    CHECK(birkhoff(lorenz, constant_potential<LorenzPoint>(-2.0), p, 5.0) == Approx(-10.0));
    // Simpson vs a finer trapezoid sum along the cached orbit
    auto xphi = lorenz.coordinate_potential(2);
    double trap = 0.0;
    auto q = p;
    for (int i = 0; i < 300; ++i) {
        auto r = lorenz.evolve(q, 0.01);
        trap += 0.5 * (q.x[2] + r.x[2]) * 0.01;
        q = r;
    }
    CHECK(birkhoff(lorenz, xphi, p, 3.0) == Approx(trap).epsilon(1e-3));
}

TEST_CASE("phi_eps examples") {
    SuspensionFlow flow(SuspensionSpec::full_shift(2));
    auto phi = flow.first_symbol_potential({0.0, std::log(2.0)});
    auto x = flow.point("01101");
    CHECK(phi_eps(flow, phi, x, 5.0, 0.0) == birkhoff(flow, phi, x, 5.0));
    CHECK(phi_eps(flow, constant_potential<SymbolicPoint>(0.7), x, 5.0, 0.3) == Approx(3.5));
    // below the cylinder scale every probe in the ball sees the same symbols
    ProbeOptions opt{128, 3};
    CHECK(phi_eps(flow, phi, x, 5.0, std::pow(0.5, 6.0), opt) == birkhoff(flow, phi, x, 5.0));
    double prev = -kInf;
    for (double eps : {0.0, 0.001, 0.01, 0.1, 0.5, 1.0, 2.0}) {
        const double v = phi_eps(flow, phi, x, 5.0, eps, opt);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(prev > birkhoff(flow, phi, x, 5.0));
}

TEST_CASE("build_separated examples") {
    SuspensionFlow flow(SuspensionSpec::full_shift(2));
    auto x = flow.point("0110");
    auto one = build_separated(flow, std::vector<SymbolicPoint>{x}, 3.0, 0.1, {0.0});
    CHECK(one.size() == 1);

    // two points whose d_t is δ/2: only the heavier survives
    SuspensionFlow circle(SuspensionSpec::single_orbit());
    auto a = circle.point("0", 0, 0.1), b = circle.point("0", 0, 0.15);
    REQUIRE(bowen_distance(circle, a, b, 0.5) == Approx(0.05));
    auto two = build_separated(circle, std::vector<SymbolicPoint>{a, b}, 0.5, 0.1, {1.0, 2.0});
    REQUIRE(two.size() == 1);
    CHECK(two.order[0] == 1);
    CHECK(two.witness[0] == 0);

    for (int n = 1; n <= 10; ++n) {
        auto e = build_separated(flow, lambda_collection(flow), static_cast<double>(n), 0.05);
        CHECK(e.size() == (std::size_t{1} << n));
    }
    CHECK_THROWS_AS(build_separated(flow, std::vector<SymbolicPoint>{}, 1.0, 0.1, {}), Error);
}

TEST_CASE("greedy sets are separated and maximal") {
    Rng rng(12);
    SuspensionFlow flow({3, {{1, 1, 0}, {0, 1, 1}, {1, 1, 1}}, {0.5, 1.0, 1.5}, 0.4});
    std::vector<SymbolicPoint> cands;
    for (int i = 0; i < 300; ++i) {
        auto x = flow.point(random_word(rng, 8, 3));
        cands.push_back(flow.evolve(x, uniform01(rng) * 2));
    }
    std::vector<double> w(cands.size());
    for (auto& v : w) v = uniform01(rng);
    for (double delta : {0.05, 0.2, 0.6}) {
        const double t = 2.5;
        auto e = build_separated(flow, cands, t, delta, w);
        for (std::size_t i = 0; i < e.size(); ++i)
            for (std::size_t j = i + 1; j < e.size(); ++j) CHECK(flow.bowen_distance(e.points[i], e.points[j], t) > delta);
        for (std::size_t c = 0; c < cands.size(); ++c) {
            if (e.witness[c] < 0) continue;
            CHECK(flow.bowen_distance(cands[c], e.points[static_cast<std::size_t>(e.witness[c])], t) <= delta);
        }
        // brute force: no rejected candidate is δ-far from all members
        for (std::size_t c = 0; c < cands.size(); ++c) {
            bool near = false;
            for (const auto& p : e.points) near = near || flow.bowen_distance(cands[c], p, t) <= delta;
            CHECK(near);
        }
    }
}

TEST_CASE("points within Bowen distance share the separation key") {
    Rng rng(31);
    SuspensionFlow flow({3, {{1, 1, 0}, {0, 1, 1}, {1, 1, 1}}, {0.5, 1.0, 1.5}, 0.4});
    std::vector<SymbolicPoint> pts;
    for (int i = 0; i < 120; ++i) {
        auto x = flow.evolve(flow.point(random_word(rng, 6, 3)), uniform01(rng) * 3);
        pts.push_back(x);
        pts.push_back(flow.perturb(x, 0.5 * uniform01(rng), rng));
    }
    for (double t : {0.3, 2.5, 6.0})
        for (double delta : {0.05, 0.3, 0.9}) {
            std::size_t close = 0;
            for (std::size_t i = 0; i < pts.size(); ++i)
                for (std::size_t j = i + 1; j < pts.size(); ++j) {
                    if (flow.bowen_distance(pts[i], pts[j], t) > delta) continue;
                    ++close;
                    CHECK(flow.separation_key(pts[i], t, delta) == flow.separation_key(pts[j], t, delta));
                }
            CHECK(close > 0);
        }
    CHECK_FALSE(flow.separation_key(pts[0], 2.0, 1.0).has_value());
}

TEST_CASE("partition_sum oracles") {
    SuspensionFlow flow(SuspensionSpec::full_shift(2));
    auto zero = constant_potential<SymbolicPoint>(0.0);
    auto lam = lambda_collection(flow);
    for (int n = 2; n <= 10; n += 2) {
        auto r = partition_sum(flow, zero, lam, 0.05, 0.0, static_cast<double>(n));
        CHECK(r.log_lambda == Approx(std::log(static_cast<double>(r.n_points()))));
        CHECK(r.n_points() == (std::size_t{1} << n));
    }
    const std::vector<double> a{0.3, -0.8};
    auto phi = flow.first_symbol_potential(a);
    for (int n = 2; n <= 10; n += 2) {
        auto r = partition_sum(flow, phi, lam, 0.05, 0.0, static_cast<double>(n));
        CHECK(r.log_lambda == Approx(n * std::log(std::exp(a[0]) + std::exp(a[1]))).epsilon(1e-12));
    }
    SuspensionFlow golden(SuspensionSpec::golden_mean());
    auto gphi = golden.first_symbol_potential({0.4, 0.1});
    for (int n = 3; n <= 12; n += 3) {
        auto r = partition_sum(golden, gphi, lambda_collection(golden), 0.05, 0.0, static_cast<double>(n));
        CHECK(r.log_lambda == Approx(std::log(word_weight_sum(golden.spec().transitions, {0.4, 0.1}, n))).epsilon(1e-12));
    }
}

TEST_CASE("pressure oracles") {
    auto grid = linear_grid(4.0, 16.0, 13);
    SuspensionFlow shift(SuspensionSpec::full_shift(2));
    auto est = pressure(shift, constant_potential<SymbolicPoint>(0.0), lambda_collection(shift), 0.05, 0.0, grid);
    CHECK(est.value == Approx(std::log(2.0)).margin(0.02));
    CHECK(est.log_lambda.size() == grid.size());

    SuspensionFlow circle(SuspensionSpec::single_orbit());
    auto c = pressure(circle, constant_potential<SymbolicPoint>(0.0), lambda_collection(circle), 0.05, 0.0, grid);
    CHECK(c.value == Approx(0.0).margin(0.01));

    SuspensionFlow golden(SuspensionSpec::golden_mean());
    auto g = pressure(golden, constant_potential<SymbolicPoint>(0.0), lambda_collection(golden), 0.05, 0.0, grid);
    CHECK(g.value == Approx(std::log((1 + std::sqrt(5.0)) / 2)).margin(0.02));

    CHECK_THROWS_AS(pressure(golden, constant_potential<SymbolicPoint>(0.0), lambda_collection(golden), 0.05, 0.0,
                             std::vector<double>{1.0, 2.0, 3.0}),
                    Error);
    SegmentCollection<SymbolicPoint> empty;
    try {
        pressure(golden, constant_potential<SymbolicPoint>(0.0), empty, 0.05, 0.0, grid);
        FAIL("expected DegenerateFit");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateFit);
    }
}

TEST_CASE("partition function monotonicity") {
    SuspensionFlow flow({2, {{1, 1}, {1, 0}}, {0.75, 1.25}, 0.5});
    auto phi = flow.first_symbol_potential({0.2, -0.4});
    auto lam = lambda_collection(flow);
    ProbeOptions opt{24, 5};
    for (double t : {3.0, 5.5, 8.0}) {
        // (1) nondecreasing in ε
        double prev = -kInf;
        for (double eps : {0.0, 0.01, 0.05, 0.2, 0.8}) {
            const double v = partition_sum(flow, phi, lam, 0.05, eps, t, opt).log_lambda;
            CHECK(v >= prev);
            prev = v;
        }
        // (2) the greedy set at δ′ is δ-separated for δ ≤ δ′; offered first it can only grow
        for (double dp : {0.1, 0.3}) {
            auto coarse = partition_sum(flow, phi, lam, dp, 0.05, t, opt);
            auto fine = partition_sum(flow, phi, SegmentCollection<SymbolicPoint>{{}, CollectionLabel::Derived, lam.generator},
                                      0.5 * dp, 0.05, t, opt, coarse.set.points);
            CHECK(fine.log_lambda >= coarse.log_lambda);
        }
        // (3) C¹ ⊂ C²: the O(U) cloud offered E(C¹) first
        auto small = partition_sum(flow, phi, lam, 0.05, 0.05, t, opt);
        auto big = partition_sum(flow, phi, neighborhood_collection(flow, 1, CollectionLabel::OU), 0.05, 0.05, t, opt,
                                 small.set.points);
        CHECK(big.log_lambda >= small.log_lambda);
    }
}

TEST_CASE("submultiplicativity, lower growth and two-sided bounds on the golden mean") {
    SuspensionFlow golden(SuspensionSpec::golden_mean(1.0, 0.5));
    auto zero = constant_potential<SymbolicPoint>(0.0);
    auto lam = lambda_collection(golden);
    const double p = suspension_entropy(golden);
    const double gamma = 0.1;
    for (double t1 : {2.0, 3.5, 5.0})
        for (double t2 : {2.5, 4.0}) {
            const double lhs = partition_sum(golden, zero, lam, 2 * gamma, 0.0, t1 + t2).log_lambda;
            const double rhs = partition_sum(golden, zero, lam, gamma, gamma, t1).log_lambda +
                               partition_sum(golden, zero, lam, gamma, gamma, t2).log_lambda;
            CHECK(lhs <= rhs + 1e-12);
        }
    std::vector<double> ratio;
    for (double t = 4; t <= 16; t += 1) {
        CHECK(partition_sum(golden, zero, lam, gamma, gamma, t).log_lambda >= t * p + std::log(0.95));
        ratio.push_back(partition_sum(golden, zero, lam, 2 * gamma, 0.0, t).log_lambda - t * p);
    }
    const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
    CHECK(*hi - *lo <= 2 * std::log(1.10));
}

TEST_CASE("equal pressure of the three collections") {
    SuspensionFlow golden(SuspensionSpec::golden_mean());
    auto zero = constant_potential<SymbolicPoint>(0.0);
    auto grid = linear_grid(6.0, 16.0, 6);
    const double a = pressure(golden, zero, lambda_collection(golden), 0.05, 0.0, grid).value;
    const double b = pressure(golden, zero, neighborhood_collection(golden, 1, CollectionLabel::OU1), 0.05, 0.0, grid).value;
    const double c = pressure(golden, zero, neighborhood_collection(golden, 0, CollectionLabel::OU), 0.05, 0.0, grid).value;
    CHECK(std::abs(a - b) <= 0.03);
    CHECK(std::abs(a - c) <= 0.03);
    CHECK(std::abs(b - c) <= 0.03);
}

TEST_CASE("results do not depend on the worker count") {
    SuspensionFlow golden(SuspensionSpec::golden_mean());
    auto phi = golden.first_symbol_potential({0.2, -0.1});
    setenv("THERMOFLOW_THREADS", "1", 1);
    auto r1 = partition_sum(golden, phi, lambda_collection(golden), 0.05, 0.1, 9.0);
    setenv("THERMOFLOW_THREADS", "4", 1);
    auto r4 = partition_sum(golden, phi, lambda_collection(golden), 0.05, 0.1, 9.0);
    unsetenv("THERMOFLOW_THREADS");
    CHECK(r1.log_lambda == r4.log_lambda);
    CHECK(r1.set.order == r4.set.order);
}

TEST_CASE("Lorenz partition sums on the trajectory cloud") {
    const auto& lorenz = lorenz_with_trajectory();
    auto c = cloud_collection(lorenz, 4000, CollectionLabel::Lambda);
    auto r = partition_sum(lorenz, constant_potential<LorenzPoint>(0.0), c, 1.0, 0.0, 2.0);
    CHECK(r.n_points() > 1);
    CHECK(r.n_points() < 4000);
    for (std::size_t i = 0; i < std::min<std::size_t>(r.n_points(), 40); ++i)
        for (std::size_t j = i + 1; j < std::min<std::size_t>(r.n_points(), 40); ++j)
            CHECK(lorenz.bowen_distance(r.set.points[i], r.set.points[j], 2.0) > 1.0);
}
