#include <catch_amalgamated.hpp>

#include <map>

#include "fixtures.hpp"

using namespace thermoflow;
using namespace fixtures;
using Catch::Approx;

namespace {

using Plane = OdeFlow<2, ZeroField<2>>;

/// Bernoulli fixture: roof 1, θ = 0.15, φ = a_{x_0} with a = (0, log 2), so the
/// equilibrium state is the (1/3, 2/3) product measure and P = log 3.
struct Bernoulli {
    SuspensionFlow flow{SuspensionSpec::full_shift(2, 1.0, 0.15)};
    Potential<SymbolicPoint> phi = flow.first_symbol_potential({0.0, std::log(2.0)});
    double p = std::log(3.0);

    double cylinder(const Word& w) const {
        double m = 1.0;
        for (auto c : w) m *= c ? 2.0 / 3.0 : 1.0 / 3.0;
        return m;
    }
};

/// Mass the measure puts on atoms whose symbols 0..n-1 spell w.
double cylinder_mass(const EmpiricalMeasure<SymbolicPoint>& mu, const Word& w) {
    double m = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu.atoms[i].window(0, static_cast<std::int64_t>(w.size())) == w) m += mu.weights[i];
    return m;
}

LimitOptions aligned() {
    LimitOptions o;
    o.slices_per_unit = 1.0;
    return o;
}

}  // namespace

TEST_CASE("nu on a single orbit is a point mass") {
    SuspensionFlow orbit(SuspensionSpec::single_orbit());
    auto nu = build_nu(orbit, constant_potential<SymbolicPoint>(0.0), lambda_collection(orbit), 5.0, 0.4);
    REQUIRE(nu.size() == 1);
    CHECK(nu.weights[0] == 1.0);
    CHECK(nu.provenance == Provenance::Nu);
    CHECK_THROWS_AS(build_nu(orbit, constant_potential<SymbolicPoint>(0.0), SegmentCollection<SymbolicPoint>{}, 5.0, 0.4),
                    Error);
}

TEST_CASE("nu weights on the full shift") {
    SuspensionFlow shift(SuspensionSpec::full_shift(2, 1.0, 0.25));
    auto nu = build_nu(shift, constant_potential<SymbolicPoint>(0.0), lambda_collection(shift), 10.0, 0.4);
    REQUIRE(nu.size() == 1024);
    for (double w : nu.weights) CHECK(w == Approx(1.0 / 1024).epsilon(1e-12));
    CHECK(nu.total() == Approx(1.0).margin(1e-12));

    Bernoulli b;
    auto bnu = build_nu(b.flow, b.phi, lambda_collection(b.flow), 9.0, 0.4);
    REQUIRE(bnu.size() == 512);
    for (std::size_t i = 0; i < bnu.size(); ++i) CHECK(bnu.weights[i] == Approx(b.cylinder(bnu.atoms[i].window(0, 9))).epsilon(1e-12));
    CHECK(bnu.total() == Approx(1.0).margin(1e-12));
}

TEST_CASE("time averages preserve mass") {
    SuspensionFlow shift(SuspensionSpec::full_shift(2, 1.0, 0.5));
    auto nu = build_nu(shift, shift.holder_potential({0.3, -0.2, 0.1}), lambda_collection(shift), 6.0, 0.6);
    auto same = time_average(shift, nu, 6.0, 1);
    REQUIRE(same.size() == nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) {
        CHECK(shift.same_point(same.atoms[i], nu.atoms[i]));
        CHECK(same.weights[i] == nu.weights[i]);
    }
    for (std::size_t n : {3u, 7u, 24u}) {
        auto mu = time_average(shift, nu, 6.0, n);
        CHECK(mu.size() == nu.size() * n);
        CHECK(mu.total() == Approx(1.0).margin(1e-12));
        CHECK(mu.provenance == Provenance::Mu);
        for (double w : mu.weights) CHECK(w >= 0.0);
    }
    CHECK_THROWS_AS(time_average(shift, same, 6.0, 2), Error);

    auto plane = Plane(ZeroField<2>{}).with_trajectory({0.5, -0.5}, 0.0, 8, 0.01, 10);
    auto pnu = build_nu(plane, constant_potential<OdePoint<2>>(0.0), cloud_collection(plane, 8, CollectionLabel::OU1), 2.0, 0.1);
    REQUIRE(pnu.size() == 1);
    auto pmu = merge_atoms(time_average(plane, pnu, 2.0, 9));
    REQUIRE(pmu.size() == 1);
    CHECK(pmu.atoms[0].x == pnu.atoms[0].x);
    CHECK(pmu.total() == Approx(1.0).margin(1e-12));
}

TEST_CASE("limit candidate on a single periodic orbit is arc length") {
    SuspensionFlow orbit(SuspensionSpec::single_orbit());
    LimitOptions opt;
    opt.slices_per_unit = 8.0;
    auto lim = limit_candidate(orbit, constant_potential<SymbolicPoint>(0.0), lambda_collection(orbit), {4.0, 5.0, 6.0},
                               0.4, opt);
    REQUIRE(lim.measure.size() == 8);
    std::map<std::int64_t, double> by_height;
    for (std::size_t i = 0; i < lim.measure.size(); ++i) by_height[lim.measure.atoms[i].height] += lim.measure.weights[i];
    std::int64_t k = 0;
    for (const auto& [h, w] : by_height) {
        CHECK(h == to_ticks(k++ / 8.0));
        CHECK(w == Approx(0.125).epsilon(1e-12));
    }
    for (double m : lim.total_mass) CHECK(m == Approx(1.0).margin(1e-12));
    CHECK(lim.cauchy_gap < 1e-12);
    CHECK_FALSE(lim.non_cauchy);
    CHECK(lim.invariance_defect < 1e-12);
    CHECK(lim.measure.provenance == Provenance::Limit);
}

TEST_CASE("limit candidate on the full shift has uniform cylinders") {
    SuspensionFlow shift(SuspensionSpec::full_shift(2, 1.0, 0.5));
    auto lim = limit_candidate(shift, constant_potential<SymbolicPoint>(0.0), lambda_collection(shift), {8.0, 9.0, 10.0},
                               0.6);
    Rng rng(4);
    for (int n = 1; n <= 5; ++n)
        for (int i = 0; i < 4; ++i) {
            const double m = cylinder_mass(lim.measure, random_word(rng, n, 2));
            CHECK(m == Approx(std::pow(0.5, n)).epsilon(0.10));
        }
    CHECK(lim.invariance_defect <= 0.05);
    CHECK(lim.discrepancy.size() == 3);
    CHECK(lim.discrepancy[1][1] == 0.0);
    CHECK(lim.discrepancy[0][2] == lim.discrepancy[2][0]);
    CHECK_THROWS_AS(limit_candidate(shift, constant_potential<SymbolicPoint>(0.0), lambda_collection(shift), {8.0, 9.0}, 0.6),
                    Error);
}

TEST_CASE("support fractions on the golden mean shift") {
    SuspensionFlow golden(SuspensionSpec::golden_mean(1.0, 0.25));
    auto nbhd = golden.neighborhoods(1, 2, 3);
    auto nu = build_nu(golden, constant_potential<SymbolicPoint>(0.0), lambda_collection(golden), 8.0, 0.6);
    auto s = support_fractions(nu, nbhd);
    CHECK(s.lambda_mass == Approx(1.0).margin(1e-12));
    CHECK(s.u1_count == 1.0);
    CHECK(s.lambda_count == 1.0);
}

TEST_CASE("lower and upper Gibbs ratios on the Bernoulli shift") {
    Bernoulli b;
    // δ = 0.02: ρ = 0.44, ρ₁ = 0.4, γ = 0.2, all above θ so balls are cylinders
    auto lim = limit_candidate(b.flow, b.phi, lambda_collection(b.flow), {10.0, 11.0, 12.0}, 0.4, aligned());
    Rng rng(9);
    SegmentCollection<SymbolicPoint> segs;
    for (int i = 0; i < 30; ++i) {
        const int n = 4 + i % 7;
        segs.segments.push_back({b.flow.point(random_word(rng, n + 3, 2)), static_cast<double>(n), i});
    }
    GibbsOptions opt;
    opt.p_source = "oracle";
    auto lower = gibbs_lower(b.flow, b.phi, lim.measure, segs, 0.44, b.p, opt);
    REQUIRE(lower.records.size() == 30);
    for (const auto& r : lower.records) {
        const auto& x = segs.segments[static_cast<std::size_t>(r.id)];
        CHECK(r.mass == Approx(b.cylinder(x.start.window(0, static_cast<std::int64_t>(x.t)))).epsilon(1e-9));
        CHECK(r.ratio == Approx(1.0).epsilon(1e-9));
    }
    CHECK(lower.pass);
    CHECK(lower.t_min == 4.0);
    CHECK(lower.t_max == 10.0);
    CHECK(lower.p_source == "oracle");

    std::vector<char> good(segs.size(), 1);
    auto upper = gibbs_upper(b.flow, b.phi, lim.measure, segs, 0.2, b.p, good, opt);
    CHECK(upper.pass);
    for (const auto& r : upper.records) CHECK(r.ratio == Approx(1.0).epsilon(1e-9));
    CHECK(upper.q_hat <= 2.0);
    CHECK(upper.q_hat_phi0 <= 2.0);
    CHECK(lower.q_hat <= 1.0 * 4.0);
    CHECK(upper.q_hat >= 1.0 / 4.0);

    // short segments fall under T2 = t / 4
    SegmentCollection<SymbolicPoint> tiny{{{b.flow.point("01"), 2.0, 0}}};
    auto skipped = gibbs_lower(b.flow, b.phi, lim.measure, tiny, 0.44, b.p);
    CHECK(skipped.skipped == 1);
    CHECK(skipped.records.empty());
}

TEST_CASE("Gibbs ratios on a single periodic orbit") {
    SuspensionFlow orbit(SuspensionSpec::single_orbit());
    LimitOptions opt;
    opt.slices_per_unit = 8.0;
    auto lim = limit_candidate(orbit, constant_potential<SymbolicPoint>(0.0), lambda_collection(orbit), {4.0, 5.0, 6.0},
                               0.4, opt);
    SegmentCollection<SymbolicPoint> segs{{{orbit.point("0"), 3.0, 0}}};
    for (double rho : {0.55, 0.7, 0.9}) {
        // heights differ by v: after one side wraps the gap is 1 - v
        double arc = 0.0;
        for (int k = 0; k < 8; ++k) {
            const double v = k / 8.0;
            if (k == 0 || std::max(v, 1.0 - v) < rho) arc += 0.125;
        }
        auto lower = gibbs_lower(orbit, constant_potential<SymbolicPoint>(0.0), lim.measure, segs, rho, 0.0);
        REQUIRE(lower.records.size() == 1);
        CHECK(lower.q_hat == Approx(arc).epsilon(1e-12));
        CHECK(lower.q_hat >= 2.0 * rho - 1.0 - 0.125);
        auto upper = gibbs_upper(orbit, constant_potential<SymbolicPoint>(0.0), lim.measure, segs, rho, 0.0);
        CHECK(upper.q_hat == Approx(arc).epsilon(1e-12));
    }
}

TEST_CASE("empty balls give ratio zero") {
    SuspensionFlow shift(SuspensionSpec::full_shift(2, 1.0, 0.25));
    EmpiricalMeasure<SymbolicPoint> mu;
    mu.atoms = {shift.point("0")};
    mu.weights = {1.0};
    mu.t = 8.0;
    SegmentCollection<SymbolicPoint> segs{{{shift.point("1"), 4.0, 0}}};
    auto upper = gibbs_upper(shift, constant_potential<SymbolicPoint>(0.0), mu, segs, 1e-3, std::log(2.0));
    CHECK(upper.q_hat == 0.0);
    CHECK(upper.pass);
    auto lower = gibbs_lower(shift, constant_potential<SymbolicPoint>(0.0), mu, segs, 1e-3, std::log(2.0));
    CHECK(lower.q_hat == 0.0);
    CHECK_FALSE(lower.pass);

    MixingOptions mopt;
    auto mix = gibbs_mixing(shift, constant_potential<SymbolicPoint>(0.0), mu, segs.segments[0], segs.segments[0], 5.0,
                            1e-3, std::log(2.0), mopt);
    CHECK(mix.best_ratio == 0.0);
    CHECK_FALSE(mix.pass);
    CHECK(mix.scanned.size() == 3 * 9);
}

TEST_CASE("mixing Gibbs on a fixed point and on the full shift") {
    auto plane = Plane(ZeroField<2>{}).with_trajectory({0.5, -0.5}, 0.0, 8, 0.01, 10);
    auto pnu = build_nu(plane, constant_potential<OdePoint<2>>(0.0), cloud_collection(plane, 8, CollectionLabel::OU1), 2.0, 0.1);
    auto pmu = time_average(plane, pnu, 2.0, 4);
    OrbitSegment<OdePoint<2>> fixed{pnu.atoms[0], 1.5, 0};
    auto pm = gibbs_mixing(plane, constant_potential<OdePoint<2>>(0.0), pmu, fixed, fixed, 4.0, 0.1, 0.0);
    CHECK(pm.best_ratio == Approx(1.0).epsilon(1e-12));
    CHECK(pm.pass);

    SuspensionFlow shift(SuspensionSpec::full_shift(2, 1.0, 0.15));
    auto zero = constant_potential<SymbolicPoint>(0.0);
    auto lim = limit_candidate(shift, zero, lambda_collection(shift), {12.0, 13.0, 14.0}, 0.4, aligned());
    Rng rng(21);
    for (int i = 0; i < 6; ++i) {
        const int t1 = 2 + i % 3, t2 = 3 + i % 2;
        OrbitSegment<SymbolicPoint> a{shift.point(random_word(rng, t1, 2)), static_cast<double>(t1), 0};
        OrbitSegment<SymbolicPoint> c{shift.point(random_word(rng, t2, 2)), static_cast<double>(t2), 1};
        auto rep = gibbs_mixing(shift, zero, lim.measure, a, c, 5.0, 0.44, std::log(2.0));
        CHECK(rep.best_ratio == Approx(1.0).epsilon(1e-9));
        CHECK(rep.best_q_prime == std::round(rep.best_q_prime));
        CHECK(rep.pass);
    }
    OrbitSegment<SymbolicPoint> a{shift.point("01"), 2.0, 0};
    CHECK_THROWS_AS(gibbs_mixing(shift, zero, lim.measure, a, a, 1.5, 0.44, std::log(2.0)), Error);
}
