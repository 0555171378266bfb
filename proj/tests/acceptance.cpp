// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "thermoflow_cli.hpp"

using namespace thermoflow;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
using Adjacency = std::vector<std::vector<int>>;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------- oracles

/// Number of admissible words of length n, by brute-force enumeration.
double count_words(const Adjacency& a, int n) {
    const int k = static_cast<int>(a.size());
    std::vector<int> w(static_cast<std::size_t>(n), 0);
    double count = 0.0;
    while (true) {
        bool ok = true;
        for (int i = 0; i + 1 < n && ok; ++i) ok = a[static_cast<std::size_t>(w[i])][static_cast<std::size_t>(w[i + 1])] != 0;
        count += ok ? 1.0 : 0.0;
        int i = n - 1;
        while (i >= 0 && w[static_cast<std::size_t>(i)] == k - 1) w[static_cast<std::size_t>(i--)] = 0;
        if (i < 0) break;
        ++w[static_cast<std::size_t>(i)];
    }
    return count;
}

/// Least-squares slope of log #words(n) over the grid.
double counting_slope(const Adjacency& a, const std::vector<double>& grid) {
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (double t : grid) {
        const double l = std::log(count_words(a, static_cast<int>(t)));
        st += t;
        sl += l;
        stt += t * t;
        stl += t * l;
    }
    const double n = static_cast<double>(grid.size());
    return (n * stl - st * sl) / (n * stt - st * st);
}

/// log of the Perron eigenvalue of A diag(e^{a}), by power iteration.
double perron_log(const Adjacency& a, const std::vector<double>& weights) {
    const std::size_t k = a.size();
    std::vector<double> v(k, 1.0);
    double lambda = 0.0;
    for (int it = 0; it < 2000; ++it) {
        std::vector<double> next(k, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                if (a[i][j]) next[i] += std::exp(weights[j]) * v[j];
        lambda = *std::max_element(next.begin(), next.end());
        for (auto& x : next) x /= lambda;
        v = next;
    }
    return std::log(lambda);
}

/// Product-measure mass of the cylinder w under symbol probabilities p.
double product_mass(const Word& w, const std::vector<double>& p) {
    double m = 1.0;
    for (auto s : w) m *= p[s];
    return m;
}

Word random_word(Rng& rng, int len, int k) {
    Word w(static_cast<std::size_t>(len));
    for (auto& c : w) c = static_cast<std::uint8_t>(rng() % static_cast<std::uint64_t>(k));
    return w;
}

Word random_admissible(const SuspensionFlow& flow, Rng& rng, int len) {
    Word w;
    int a = static_cast<int>(rng() % static_cast<std::uint64_t>(flow.alphabet()));
    w.push_back(static_cast<std::uint8_t>(a));
    while (static_cast<int>(w.size()) < len) {
        std::vector<int> next;
        for (int b = 0; b < flow.alphabet(); ++b)
            if (flow.allowed(a, b)) next.push_back(b);
        a = next[rng() % next.size()];
        w.push_back(static_cast<std::uint8_t>(a));
    }
    return w;
}

const Adjacency kFull2{{1, 1}, {1, 1}};
const Adjacency kGolden{{1, 1}, {1, 0}};

// ---------------------------------------------------------------- CLI driver

struct CliResult {
    int code = 0;
    std::string err;
};

CliResult cli_run(std::vector<std::string> args) {
    args.insert(args.begin(), "thermoflow");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliResult r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("thermoflow-acceptance-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path config(const std::string& name) { return fs::path(THERMOFLOW_SOURCE_DIR) / "configs" / name; }

// ---------------------------------------------------------------- criteria

Outcome pressure_full_shift() {
    const auto start = Clock::now();
    SuspensionFlow flow(SuspensionSpec::full_shift(2, 1.0));
    const auto grid = linear_grid(4.0, 16.0, 13);
    auto est = pressure(flow, constant_potential<SymbolicPoint>(0.0), lambda_collection(flow), 0.05, 0.0, grid);
    const double secs = seconds_since(start);
    const double oracle = counting_slope(kFull2, grid);
    const bool ok = std::abs(est.value - oracle) <= 0.02 && secs < 60.0;
    return {ok, fmt("P=%.6f oracle=%.6f |diff|=%.2e (tol 0.02), %.2f s (limit 60 s, 1 thread)", est.value, oracle,
                    std::abs(est.value - oracle), secs)};
}

Outcome pressure_golden_mean() {
    SuspensionFlow flow(SuspensionSpec::golden_mean(1.0));
    const auto grid = linear_grid(4.0, 16.0, 13);
    auto est = pressure(flow, constant_potential<SymbolicPoint>(0.0), lambda_collection(flow), 0.05, 0.0, grid);
    const double oracle = perron_log(kGolden, {0.0, 0.0});
    const bool ok = std::abs(est.value - oracle) <= 0.02;
    return {ok, fmt("P=%.6f Perron oracle=%.6f |diff|=%.2e (tol 0.02)", est.value, oracle, std::abs(est.value - oracle))};
}

Outcome equal_pressure() {
    const auto grid = linear_grid(6.0, 16.0, 6);
    struct Case {
        const char* name;
        SuspensionSpec spec;
        std::vector<double> a;
    };
    std::vector<Case> cases{{"full2", SuspensionSpec::full_shift(2), {0.0, 0.0}},
                            {"golden", SuspensionSpec::golden_mean(), {0.0, 0.0}},
                            {"golden+phi", SuspensionSpec::golden_mean(), {0.3, -0.2}}};
    double worst = 0.0;
    std::string detail;
    for (const auto& c : cases) {
        SuspensionFlow flow(c.spec);
        auto phi = flow.first_symbol_potential(c.a);
        const double a = pressure(flow, phi, lambda_collection(flow), 0.05, 0.0, grid).value;
        const double b = pressure(flow, phi, neighborhood_collection(flow, 2, CollectionLabel::OU1), 0.05, 0.0, grid).value;
        const double u = pressure(flow, phi, neighborhood_collection(flow, 1, CollectionLabel::OU), 0.05, 0.0, grid).value;
        const double spread = std::max({a, b, u}) - std::min({a, b, u});
        worst = std::max(worst, spread);
        detail += fmt("%s: %.4f/%.4f/%.4f; ", c.name, a, b, u);
    }
    return {worst <= 0.03, detail + fmt("max spread %.2e (tol 0.03)", worst)};
}

Outcome submultiplicativity() {
    Rng rng(404);
    const double gamma = 0.1;
    struct Case {
        const char* name;
        SuspensionSpec spec;
        std::vector<double> a;
        bool integer_times;
    };
    // The weighted fixture is gated at integer times only: at fractional
    // times the last fiber is partly weighted and Φ_ε = Φ_0 (Bowen balls
    // crossing a roof have zero thickness in this metric), so the product
    // bound can fail by construction.  Those pairs are reported, not gated.
    const std::vector<Case> cases{{"golden", SuspensionSpec::golden_mean(1.0, 0.5), {0.0, 0.0}, false},
                                  {"full2", SuspensionSpec::full_shift(2, 1.0, 0.5), {0.0, 0.0}, false},
                                  {"bernoulli/int", SuspensionSpec::full_shift(2, 1.0, 0.5), {0.0, std::log(2.0)}, true},
                                  {"bernoulli/frac", SuspensionSpec::full_shift(2, 1.0, 0.5), {0.0, std::log(2.0)}, false}};
    const std::vector<int> per_case{25, 25, 25, 25};
    std::size_t gated_pairs = 0, gated_violations = 0, info_violations = 0;
    double worst = -kInf;
    std::string detail;
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const auto& c = cases[ci];
        SuspensionFlow flow(c.spec);
        auto phi = flow.first_symbol_potential(c.a);
        auto lam = lambda_collection(flow);
        std::size_t v = 0;
        double case_worst = -kInf;
        for (int i = 0; i < per_case[ci]; ++i) {
            double t1 = 1.0 + 6.0 * uniform01(rng), t2 = 1.0 + 6.0 * uniform01(rng);
            if (c.integer_times) {
                t1 = std::floor(t1);
                t2 = std::floor(t2);
            }
            const double lhs = partition_sum(flow, phi, lam, 2 * gamma, 0.0, t1 + t2).log_lambda;
            const double rhs = partition_sum(flow, phi, lam, gamma, gamma, t1).log_lambda +
                               partition_sum(flow, phi, lam, gamma, gamma, t2).log_lambda;
            case_worst = std::max(case_worst, lhs - rhs);
            v += lhs > rhs + 1e-9 ? 1 : 0;
        }
        const bool gated = ci < 3;
        if (gated) {
            gated_pairs += static_cast<std::size_t>(per_case[ci]);
            gated_violations += v;
            worst = std::max(worst, case_worst);
        } else {
            info_violations += v;
        }
        detail += fmt("%s: %zu/%d violations (max log ratio %.4f)%s; ", c.name, v, per_case[ci], case_worst,
                      gated ? "" : " [reported only]");
    }
    return {gated_violations == 0 && gated_pairs >= 50,
            fmt("%zu gated pairs, %zu violations; ", gated_pairs, gated_violations) + detail};
}

Outcome lower_growth() {
    const double delta = 0.004;
    const auto grid = linear_grid(4.0, 16.0, 13);
    double worst = kInf;
    std::string detail;
    struct Case {
        const char* name;
        SuspensionSpec spec;
        Adjacency adj;
    };
    for (const auto& c : {Case{"full2", SuspensionSpec::full_shift(2), kFull2}, Case{"golden", SuspensionSpec::golden_mean(), kGolden}}) {
        SuspensionFlow flow(c.spec);
        auto zero = constant_potential<SymbolicPoint>(0.0);
        auto lam = lambda_collection(flow);
        const double p = pressure(flow, zero, lam, delta, 0.0, grid).value;
        double case_min = kInf;
        for (double gamma : {8 * delta, 20 * delta, 200 * delta})
            for (double t : grid) case_min = std::min(case_min, partition_sum(flow, zero, lam, gamma, gamma, t).log_lambda - t * p);
        worst = std::min(worst, case_min);
        detail += fmt("%s: P=%.5f (Perron %.5f) min ratio %.4f; ", c.name, p, perron_log(c.adj, {0.0, 0.0}), std::exp(case_min));
    }
    return {worst >= std::log(0.95), detail + "bound 0.95"};
}

Outcome two_sided_bound() {
    const double delta = 0.02, gamma = 10 * delta;
    const auto grid = linear_grid(4.0, 16.0, 13);
    double worst = 0.0;
    std::string detail;
    struct Case {
        const char* name;
        SuspensionSpec spec;
        std::vector<double> a;
    };
    for (const auto& c : {Case{"full2", SuspensionSpec::full_shift(2), {0.0, 0.0}},
                          Case{"golden", SuspensionSpec::golden_mean(), {0.0, 0.0}},
                          Case{"bernoulli", SuspensionSpec::full_shift(2), {0.0, std::log(2.0)}}}) {
        SuspensionFlow flow(c.spec);
        auto est = pressure(flow, flow.first_symbol_potential(c.a), lambda_collection(flow), 2 * gamma, 0.0, grid);
        std::vector<double> logs;
        for (std::size_t i = 0; i < grid.size(); ++i) logs.push_back(est.log_lambda[i] - grid[i] * est.value);
        const auto [lo, hi] = std::minmax_element(logs.begin(), logs.end());
        // C3 = geometric midpoint; every ratio within ×/÷ e^{(hi-lo)/2}
        const double factor = std::exp(0.5 * (*hi - *lo));
        worst = std::max(worst, factor);
        detail += fmt("%s: C3=%.4f factor %.4f; ", c.name, std::exp(0.5 * (*hi + *lo)), factor);
    }
    return {worst <= 1.10, detail + "tol 1.10"};
}

Outcome specification_round_trip() {
    Rng rng(77);
    int verified = 0, cycles = 0;
    double min_margin = kInf;
    std::vector<SuspensionSpec> specs{SuspensionSpec::golden_mean(1.0, 0.5),
                                      {3, {{1, 1, 0}, {0, 1, 1}, {1, 1, 1}}, {0.5, 1.0, 1.5}, 0.4},
                                      SuspensionSpec::full_shift(3, 0.75, 0.3)};
    for (int trial = 0; trial < 100; ++trial) {
        SuspensionFlow flow(specs[static_cast<std::size_t>(trial % 3)]);
        auto hoods = flow.neighborhoods(1, 2, 3);
        const double delta = std::vector<double>{0.5, 0.1, 0.02}[static_cast<std::size_t>((trial / 3) % 3)];
        std::int64_t n = 0;
        while (flow.theta_pow(n) >= delta) ++n;
        std::size_t gap = 0;
        for (int a = 0; a < flow.alphabet(); ++a)
            for (int b = 0; b < flow.alphabet(); ++b) gap = std::max(gap, flow.bridge(a, b).size());
        const double tau_max = flow.max_roof() * static_cast<double>(2 * n + static_cast<std::int64_t>(gap) + 2);
        std::vector<OrbitSegment<SymbolicPoint>> segs;
        for (int j = 0; j < 1 + trial % 4; ++j) {
            Word w = random_admissible(flow, rng, 10);
            const Word& b = flow.bridge(w.back(), w.front());
            w.insert(w.end(), b.begin(), b.end());
            auto x = flow.make_periodic(w, 0);
            x.height = to_ticks(uniform01(rng) * flow.roof(x.symbol(0)) * 0.99);
            segs.push_back({x, 1.0 + 4.0 * uniform01(rng), j});
        }
        ++cycles;
        try {
            auto cert = glue(flow, segs, delta, tau_max, hoods.u1);
            auto rep = verify(flow, cert, hoods.u1);
            bool positive = true;
            for (double m : cert.margins) {
                positive = positive && m > 0.0;
                min_margin = std::min(min_margin, m);
            }
            verified += rep.ok && positive ? 1 : 0;
        } catch (const Error&) {
        }
    }
    // full shift: fiber-aligned cylinder segments glue with zero transfer time
    SuspensionFlow shift(SuspensionSpec::full_shift(2, 1.0, 0.25));
    auto hoods = shift.neighborhoods(1, 2, 3);
    int zero_tau = 0;
    const int aligned = 20;
    for (int trial = 0; trial < aligned; ++trial) {
        std::vector<OrbitSegment<SymbolicPoint>> segs;
        for (int j = 0; j < 2 + trial % 3; ++j) {
            const int len = 1 + static_cast<int>(rng() % 5);
            segs.push_back({shift.point(random_word(rng, len, 2)), static_cast<double>(len), j});
        }
        try {
            auto cert = glue(shift, segs, 0.3, 5.0, hoods.u1);
            const bool all_zero = std::all_of(cert.gluing.begin(), cert.gluing.end(), [](double t) { return t == 0.0; });
            zero_tau += all_zero && verify(shift, cert, hoods.u1).ok ? 1 : 0;
        } catch (const Error&) {
        }
    }
    return {verified == cycles && zero_tau == aligned,
            fmt("%d/%d certificates verify (min margin %.3g); full shift tau=0 in %d/%d aligned cycles", verified, cycles,
                min_margin, zero_tau, aligned)};
}

/// Full 2-shift at θ = 0.15 with first-symbol potential a; every scale used
/// (ρ = 0.44, ρ₁ = 0.4, γ = 0.2) exceeds θ, so Bowen balls are cylinders.
struct BernoulliFixture {
    SuspensionFlow flow{SuspensionSpec::full_shift(2, 1.0, 0.15)};
    std::vector<double> a;
    Potential<SymbolicPoint> phi;
    double p;
    std::vector<double> probs;

    explicit BernoulliFixture(std::vector<double> weights) : a(std::move(weights)) {
        phi = flow.first_symbol_potential(a);
        p = perron_log(kFull2, a);
        for (double x : a) probs.push_back(std::exp(x - p));
    }

    EmpiricalMeasure<SymbolicPoint> measure(const std::vector<double>& grid) const {
        LimitOptions opt;
        opt.slices_per_unit = 1.0;
        return limit_candidate(flow, phi, lambda_collection(flow), grid, 0.4, opt).measure;
    }
};

Outcome gibbs_sandwich() {
    BernoulliFixture b({0.0, std::log(2.0)});
    const auto mu = b.measure({14.0, 15.0, 16.0});
    Rng rng(88);
    SegmentCollection<SymbolicPoint> segs;
    std::vector<Word> words;
    for (int i = 0; i < 90; ++i) {
        const int n = 6 + i % 9;  // t in [6, 14]
        words.push_back(random_word(rng, n, 2));
        segs.segments.push_back({b.flow.point(words.back()), static_cast<double>(n), i});
    }
    GibbsOptions opt;
    opt.p_source = "oracle";
    auto lower = gibbs_lower(b.flow, b.phi, mu, segs, 0.44, b.p, opt);
    auto upper = gibbs_upper(b.flow, b.phi, mu, segs, 0.2, b.p, std::vector<char>(segs.size(), 1), opt);
    double lo = kInf, hi = 0.0, oracle_err = 0.0;
    for (const auto& r : lower.records) {
        lo = std::min(lo, r.ratio);
        const double m = product_mass(words[static_cast<std::size_t>(r.id)], b.probs);
        oracle_err = std::max(oracle_err, std::abs(r.mass / m - 1.0));
    }
    for (const auto& r : upper.records) hi = std::max(hi, r.ratio);
    const bool ok = lower.records.size() == 90 && upper.records.size() == 90 && lo >= 0.5 && hi <= 2.0;
    return {ok, fmt("%zu segments t in [6,14]: min lower ratio %.6f (>= 0.5), max upper ratio %.6f (<= 2.0), "
                    "max |mass/product-oracle - 1| = %.2e",
                    lower.records.size(), lo, hi, oracle_err)};
}

Outcome mixing_gibbs() {
    BernoulliFixture b({0.0, 0.0});
    const auto mu = b.measure({14.0, 15.0, 16.0});
    Rng rng(99);
    MixingOptions opt;
    opt.t2 = 2.0;
    opt.tau = 1.0;
    opt.p_source = "oracle";
    const double q = 5.0;  // > T2 + 2τ
    double lo = kInf, hi = 0.0;
    int in_band = 0;
    for (int i = 0; i < 20; ++i) {
        const int n1 = 3 + static_cast<int>(rng() % 3), n2 = 3 + static_cast<int>(rng() % 3);
        OrbitSegment<SymbolicPoint> s1{b.flow.point(random_word(rng, n1, 2)), static_cast<double>(n1), 2 * i};
        OrbitSegment<SymbolicPoint> s2{b.flow.point(random_word(rng, n2, 2)), static_cast<double>(n2), 2 * i + 1};
        auto rep = gibbs_mixing(b.flow, b.phi, mu, s1, s2, q, 0.44, b.p, opt);
        lo = std::min(lo, rep.best_ratio);
        hi = std::max(hi, rep.best_ratio);
        in_band += rep.best_ratio >= 0.5 && rep.best_ratio <= 2.0 ? 1 : 0;
    }
    return {in_band == 20, fmt("%d/20 pairs in [0.5, 2.0]; best-q' ratios in [%.6f, %.6f]", in_band, lo, hi)};
}

Outcome expansivity_sentinel() {
    std::string detail;
    bool ok = true;
    const std::vector<std::pair<const char*, SuspensionSpec>> specs{
        {"full2", SuspensionSpec::full_shift(2)},
        {"golden", SuspensionSpec::golden_mean()},
        {"sft3", {3, {{1, 1, 0}, {0, 1, 1}, {1, 1, 1}}, {0.5, 1.0, 1.5}, 0.4}}};
    for (const auto& [name, spec] : specs) {
        SuspensionFlow flow(spec);
        // expansivity constant: distinct symbols or heights at least half the
        // shortest roof apart; probe well below both
        const double eps = 0.25 * std::min(1.0, flow.min_roof());
        ObstructionOptions opt;
        opt.n_points = 48;
        auto rep = obstruction_pressure(flow, constant_potential<SymbolicPoint>(0.0), eps, opt);
        const bool pass = rep.ne_fraction == 0.0 && rep.p_perp == -kInf && rep.label == "sentinel";
        ok = ok && pass;
        detail += fmt("%s eps=%.3f: NE=%zu/%zu P_perp=%s (%s); ", name, eps,
                      static_cast<std::size_t>(std::count(rep.ne.begin(), rep.ne.end(), 1)), rep.tested,
                      rep.p_perp == -kInf ? "-inf" : "finite", rep.label.c_str());
    }
    return {ok, detail};
}

Outcome lorenz_smoke() {
    const auto dir = scratch("lorenz");
    const auto start = Clock::now();
    std::string codes;
    for (const char* s : {"pressure", "construct", "gibbs"}) {
        auto r = cli_run({s, "--config", config("lorenz.ini").string(), "--out-dir", dir.string()});
        codes += fmt("%s=%d ", s, r.code);
        if (r.code != 0) return {false, codes + r.err};
    }
    const double secs = seconds_since(start);
    const auto construct = cli::read_json(dir / "construct.json");
    const double defect = construct.at("invariance_defect").get<double>();
    const auto cloud = cli::load_config(config("lorenz.ini")).flow.cloud_points;
    const bool ok = secs < 600.0 && defect <= 0.05 && cloud >= 200000;
    return {ok, fmt("%zu cloud points, %satoms=%zu, invariance defect %.4f (<= 0.05), %.1f s (limit 600 s)", cloud,
                    codes.c_str(), construct.at("atoms").get<std::size_t>(), defect, secs)};
}

Outcome determinism() {
    const std::vector<std::string> subs{"pressure", "spec", "expansivity", "decompose", "construct", "gibbs"};
    std::size_t compared = 0, differing = 0;
    std::string diffs;
    // small Lorenz config: the full one is exercised by the smoke test
    const auto lz = scratch("det-config") / "lorenz-small.ini";
    {
        std::ofstream(lz) << "[flow]\nkind = lorenz\nburn_in = 20\ncloud_points = 3000\n"
                             "[scales]\ndelta = 0.5\neps = 500\n"
                             "[run]\ntmin = 1\ntmax = 2\ntsteps = 4\nseed = 11\nn_samples = 12\nn_probe = 4\nsearch_budget = 8\n"
                             "[equilibrium]\nt_grid = 1, 1.5, 2\nslices_per_unit = 4\n"
                             "[spec]\ntau_max = 1\nt0 = 0.5\n";
    }
    for (const auto& cfg : std::vector<fs::path>{config("bernoulli.ini"), config("golden_mean.ini"), lz}) {
        std::vector<fs::path> runs{scratch("det-a"), scratch("det-b")};
        for (const auto& dir : runs) {
            for (const auto& s : subs) {
                auto r = cli_run({s, "--config", cfg.string(), "--out-dir", dir.string()});
                if (r.code != 0) return {false, cfg.filename().string() + " " + s + ": " + r.err};
            }
            cli_run({"report", "--dir", dir.string()});
        }
        for (const auto& e : fs::recursive_directory_iterator(runs[0])) {
            if (!e.is_regular_file()) continue;
            const auto rel = fs::relative(e.path(), runs[0]);
            ++compared;
            if (slurp(e.path()) != slurp(runs[1] / rel)) {
                ++differing;
                diffs += " " + cfg.filename().string() + ":" + rel.string();
            }
        }
    }
    return {differing == 0 && compared > 0, fmt("%zu files compared across 3 configs x 7 subcommands, %zu differ", compared,
                                                 differing) + diffs};
}

}  // namespace

int main() {
    setenv("THERMOFLOW_THREADS", "1", 1);
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"pressure oracle, full 2-shift", pressure_full_shift},
        {"pressure oracle, golden mean", pressure_golden_mean},
        {"equal pressure of Lambda, O(U1), O(U)", equal_pressure},
        {"submultiplicativity", submultiplicativity},
        {"lower growth", lower_growth},
        {"two-sided bound", two_sided_bound},
        {"specification round trip", specification_round_trip},
        {"Gibbs sandwich, Bernoulli shift", gibbs_sandwich},
        {"mixing Gibbs, full 2-shift", mixing_gibbs},
        {"expansivity sentinel", expansivity_sentinel},
        {"Lorenz smoke test", lorenz_smoke},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = Clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("[%s] %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                    seconds_since(start));
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
