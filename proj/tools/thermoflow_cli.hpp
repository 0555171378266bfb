#pragma once

// The thermoflow command line: subcommands pressure, spec, expansivity,
// decompose, construct, gibbs and report.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cli_backend.hpp"
#include "cli_config.hpp"
#include "cli_io.hpp"

namespace thermoflow::cli {

namespace fs = std::filesystem;

/// "E_" plus the error code in upper snake case: NonInvertible -> E_NON_INVERTIBLE.
inline std::string error_code(ErrorCode code) {
    std::string out = "E_";
    for (char c : std::string(to_string(code))) {
        if (std::isupper(static_cast<unsigned char>(c)) && out.size() > 2) out += '_';
        out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

struct Options {
    std::string config;
    std::optional<std::string> out;       // output file override
    std::optional<std::string> out_dir;   // output directory override
    std::optional<std::uint64_t> seed;
    // pressure
    std::optional<std::string> collection;
    std::optional<double> delta, eps, tmin, tmax;
    std::optional<std::size_t> tsteps;
    // spec
    std::size_t cycles = 8;
    std::size_t pieces = 2;
    // expansivity
    std::optional<double> window;
    std::optional<std::size_t> probes;
    // gibbs
    std::optional<std::string> measure;
    std::size_t mixing_pairs = 4;
    // report
    std::string dir;
};

inline void apply_overrides(RunConfig& c, const Options& o) {
    if (o.out_dir) c.output = *o.out_dir;
    if (o.seed) c.seed = *o.seed;
    if (o.collection) c.collection = *o.collection;
    if (o.delta) c.delta = *o.delta;
    if (o.eps) c.eps = *o.eps;
    if (o.tmin) c.tmin = *o.tmin;
    if (o.tmax) c.tmax = *o.tmax;
    if (o.tsteps) c.tsteps = *o.tsteps;
    if (!(c.delta > 0.0)) throw config_error("delta must be positive");
    if (!(c.tmax >= c.tmin) || c.tsteps < 1) throw config_error("bad t grid");
}

inline fs::path output_path(const RunConfig& c, const Options& o, const std::string& name) {
    return o.out ? fs::path(*o.out) : c.output / name;
}

inline Json scales_json(const RunConfig& c) {
    return Json{{"delta", c.delta}, {"eps", c.eps}, {"gamma", c.gamma()}, {"rho", c.rho()}, {"rho1", c.rho1()}};
}

/// Evenly spread, deterministic subset of at most n points of a slice.
template <class P>
std::vector<P> spread(const std::vector<P>& pts, std::size_t n) {
    if (pts.size() <= n) return pts;
    std::vector<P> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(pts[i * pts.size() / n]);
    return out;
}

// ---------------------------------------------------------------- pressure

template <class B>
Json run_pressure(const RunConfig& c, const Options& o, const Context<B>& ctx) {
    const auto grid = c.t_grid();
    const auto& coll = ctx.collection(c.collection);
    ProbeOptions probe{c.n_probe, c.seed};
    auto est = pressure(*ctx.flow, ctx.phi, coll, c.delta, c.eps, grid, probe);
    Output out(output_path(c, o, "pressure.jsonl"));
    for (std::size_t i = 0; i < est.t_grid.size(); ++i)
        out.line(Json{{"t", est.t_grid[i]},
                      {"log_lambda", num(est.log_lambda[i])},
                      {"n_points", est.n_points[i]},
                      {"delta", c.delta},
                      {"eps", c.eps}});
    Json s{{"subcommand", "pressure"}, {"collection", c.collection}, {"pressure", num(est.value)},
           {"intercept", num(est.intercept)}, {"residual", num(est.residual)}};
    if (ctx.oracle_pressure) s["oracle"] = *ctx.oracle_pressure;
    return s;
}

// ---------------------------------------------------------------- spec

template <class B>
Json run_spec(const RunConfig& c, const Options& o, const Context<B>& ctx) {
    using P = typename B::point_type;
    const auto& flow = *ctx.flow;
    const bool symbolic = flow.kind() == BackendKind::SymbolicSuspension;
    GlueOptions gopt;
    gopt.t0 = c.t0;
    gopt.starts = static_cast<int>(c.search_budget);
    gopt.seed = c.seed;
    Json doc{{"subcommand", "spec"}, {"scales", scales_json(c)}, {"tau_max", c.tau_max}, {"t0", c.t0}};
    Json status;
    for (const auto& [name, container] : {std::pair{"I0", ctx.nbhd.u1}, std::pair{"I1", ctx.nbhd.u}}) {
        Json certs = Json::array(), failures = Json::array();
        std::size_t verified = 0;
        const auto pts = sample_points(flow, std::max<std::size_t>(c.n_samples, 4 * o.pieces), c.seed ^ (name[1] == '0' ? 0x10u : 0x11u));
        for (std::size_t cyc = 0; cyc < o.cycles; ++cyc) {
            Rng rng = make_rng(c.seed, 0x5bec0000u + cyc + (name[1] == '0' ? 0 : 0x1000));
            std::vector<OrbitSegment<P>> segs;
            for (std::size_t k = 0; k < o.pieces; ++k) {
                double t = c.t0 + 4.0 * uniform01(rng);
                if (symbolic) t = std::ceil(t);
                segs.push_back({pts[rng() % pts.size()], t, static_cast<std::int64_t>(k)});
            }
            try {
                auto cert = glue(flow, segs, c.delta, c.tau_max, container, gopt);
                auto rep = verify(flow, cert, container);
                verified += rep.ok ? 1 : 0;
                certs.push_back(to_json(flow, cert, rep));
            } catch (const Error& e) {
                failures.push_back(Json{{"cycle", cyc}, {"code", to_string(e.code())}, {"message", e.what()}});
            }
        }
        const char* st = verified == 0 ? "unchecked" : (symbolic && verified == o.cycles ? "certified" : "proxy");
        status[name] = st;
        doc[name] = Json{{"container", name[1] == '0' ? "U1" : "U"}, {"attempted", o.cycles}, {"verified", verified},
                         {"status", st}, {"certificates", certs}, {"failures", failures}};
    }
    doc["status"] = status;
    Output(output_path(c, o, "spec.json")).document(doc);
    return Json{{"subcommand", "spec"}, {"status", status}};
}

// ---------------------------------------------------------------- expansivity

template <class B>
std::pair<double, std::string> pressure_reference(const RunConfig& c, const Context<B>& ctx) {
    if (ctx.oracle_pressure) return {*ctx.oracle_pressure, "oracle"};
    const auto file = c.output / "pressure.jsonl";
    if (fs::exists(file)) {
        std::vector<double> ts, ls;
        for (const auto& j : read_jsonl(file)) {
            const double l = num_from(j.at("log_lambda"));
            if (!std::isfinite(l)) continue;
            ts.push_back(j.at("t").get<double>());
            ls.push_back(l);
        }
        if (ts.size() >= 2) return {least_squares(ts, ls).slope, "estimate:pressure.jsonl"};
    }
    auto est = pressure(*ctx.flow, ctx.phi, ctx.lambda, c.delta, c.eps, c.t_grid(), ProbeOptions{c.n_probe, c.seed});
    return {est.value, "estimate"};
}

template <class B>
Json run_expansivity(const RunConfig& c, const Options& o, const Context<B>& ctx) {
    const double eps = o.eps ? *o.eps : (c.eps > 0.0 ? c.eps : 1000.0 * c.delta);
    ObstructionOptions opt;
    opt.n_points = c.n_samples;
    opt.expansivity.seed = c.seed;
    if (o.window) opt.expansivity.window = *o.window;
    if (o.probes) opt.expansivity.n_probe = *o.probes;
    else opt.expansivity.n_probe = c.n_probe;
    auto rep = obstruction_pressure(*ctx.flow, ctx.phi, eps, opt);
    const auto [p_hat, source] = pressure_reference(c, ctx);
    const bool gap = rep.p_perp < p_hat;
    const bool exact = rep.label == "sentinel" || rep.label == "exact";
    const char* st = !gap ? "unchecked" : (exact && ctx.flow->kind() == BackendKind::SymbolicSuspension && ctx.oracle_pressure ? "certified" : "proxy");
    Json ne = Json::array();
    for (char v : rep.ne) ne.push_back(v != 0);
    Json doc{{"subcommand", "expansivity"}, {"eps", rep.eps}, {"window", rep.window}, {"tested", rep.tested},
             {"ne_fraction", rep.ne_fraction}, {"p_perp", num(rep.p_perp)}, {"label", rep.label},
             {"p_hat", num(p_hat)}, {"p_source", source}, {"gap", gap}, {"status", st}, {"ne", ne}};
    Output(output_path(c, o, "expansivity.json")).document(doc);
    return Json{{"subcommand", "expansivity"}, {"p_perp", num(rep.p_perp)}, {"label", rep.label}, {"status", st}};
}

// ---------------------------------------------------------------- decompose

template <class B>
Decomposition<typename B::point_type> make_decomposition(const RunConfig& c, const Context<B>& ctx) {
    using P = typename B::point_type;
    Decomposition<P> d;
    const auto& s = c.decomposition.splitter;
    d.name = s;
    if (s == "trivial") {
        d.splitter = trivial_splitter<P>();
    } else if constexpr (std::is_same_v<B, LorenzFlow>) {
        if (s != "singular") throw config_error("lorenz splitters: trivial or singular");
        d.splitter = singular_avoidance_splitter(*ctx.flow, State<3>{0.0, 0.0, 0.0}, c.decomposition.r0);
    } else {
        if (s != "symbol_run") throw config_error("suspension splitters: trivial or symbol_run");
        d.splitter = symbol_run_splitter(*ctx.flow, c.decomposition.bad_symbol);
    }
    return d;
}

template <class B>
Json run_decompose(const RunConfig& c, const Options& o, const Context<B>& ctx) {
    auto dec = make_decomposition(c, ctx);
    const auto grid = c.t_grid();
    const std::size_t per = std::max<std::size_t>(1, c.n_samples / grid.size());
    std::int64_t id = 0;
    for (double t : grid)
        for (const auto& x : spread(ctx.u1.slice(t), per)) dec.domain.segments.push_back({x, t, id++});
    std::vector<Split> splits(dec.domain.size());
    parallel_for(dec.domain.size(), [&](std::size_t i) { splits[i] = dec.splitter(dec.domain.segments[i]); }, 1);
    Output out(output_path(c, o, "decompose.jsonl"));
    std::size_t all_good = 0;
    for (std::size_t i = 0; i < splits.size(); ++i) {
        const auto& sp = splits[i];
        all_good += sp.p == 0.0 && sp.s == 0.0 ? 1 : 0;
        out.line(Json{{"segment_id", dec.domain.segments[i].id}, {"t", dec.domain.segments[i].t},
                      {"p", sp.p}, {"g", sp.g}, {"s", sp.s}});
    }
    Json summary{{"subcommand", "decompose"}, {"splitter", dec.name}, {"segments", splits.size()},
                 {"fully_good", all_good}};
    // Bowen property on G at scale eps
    const char* st = "unchecked";
    if (c.eps > 0.0) {
        auto good = decomposed(*ctx.flow, dec).good;
        DistortionOptions dopt;
        dopt.n_probe = c.n_probe;
        dopt.seed = c.seed;
        auto rep = bowen_distortion(*ctx.flow, ctx.phi, good, c.eps, dopt);
        const bool locally_constant =
            ctx.phi.constant || (ctx.phi.kind == PotentialKind::FirstSymbol && ctx.flow->kind() == BackendKind::SymbolicSuspension &&
                                 c.eps <= std::min(1.0, 0.5 * ctx.flow->diameter()));
        st = locally_constant ? "certified" : (rep.unbounded ? "unchecked" : "proxy");
        summary["distortion"] = Json{{"eps", rep.eps}, {"samples", rep.samples}, {"k_hat", num(rep.k_hat)},
                                     {"var", num(rep.var)}, {"slope", num(rep.slope)}, {"unbounded", rep.unbounded}};
    }
    summary["status"] = st;
    const auto summary_path = o.out ? fs::path(*o.out).replace_extension(".json") : c.output / "decompose.json";
    Output(summary_path).document(summary);
    return Json{{"subcommand", "decompose"}, {"segments", splits.size()}, {"status", st}};
}

// ---------------------------------------------------------------- construct

template <class B>
Json run_construct(const RunConfig& c, const Options& o, const Context<B>& ctx) {
    LimitOptions lopt;
    lopt.slices_per_unit = c.slices_per_unit;
    const auto grid = c.construct_grid();
    auto lim = limit_candidate(*ctx.flow, ctx.phi, ctx.u1, grid, c.rho1(), lopt);
    const auto support = support_fractions(lim.measure, ctx.nbhd);
    const auto path = output_path(c, o, "measure.jsonl");
    write_measure(*ctx.flow, lim.measure, path);
    Json disc = Json::array();
    for (const auto& row : lim.discrepancy) disc.push_back(row);
    Json doc{{"subcommand", "construct"},
             {"scales", scales_json(c)},
             {"provenance", to_string(lim.measure.provenance)},
             {"t", lim.measure.t},
             {"t_grid", lim.t_grid},
             {"nu_sizes", lim.nu_sizes},
             {"total_mass", lim.total_mass},
             {"atoms", lim.measure.size()},
             {"discrepancy", disc},
             {"cauchy_gap", lim.cauchy_gap},
             {"non_cauchy", lim.non_cauchy},
             {"invariance_defect", lim.invariance_defect},
             {"support", Json{{"u1_mass", support.u1_mass}, {"lambda_mass", support.lambda_mass},
                              {"u1_count", support.u1_count}, {"lambda_count", support.lambda_count}}},
             {"measure_file", path.filename().string()}};
    Output(path.parent_path() / "construct.json").document(doc);
    return Json{{"subcommand", "construct"}, {"atoms", lim.measure.size()}, {"invariance_defect", lim.invariance_defect},
                {"cauchy_gap", lim.cauchy_gap}};
}

// ---------------------------------------------------------------- gibbs

template <class B>
Json run_gibbs(const RunConfig& c, const Options& o, const Context<B>& ctx) {
    using P = typename B::point_type;
    const fs::path mpath = o.measure ? fs::path(*o.measure) : c.output / "measure.jsonl";
    const auto meta_path = mpath.parent_path() / "construct.json";
    std::vector<double> mgrid = c.construct_grid();
    if (fs::exists(meta_path)) mgrid = read_json(meta_path).at("t_grid").get<std::vector<double>>();
    const auto mu = read_measure(*ctx.flow, mpath, mgrid.back());
    const auto [p_hat, source] = pressure_reference(c, ctx);

    GibbsOptions gopt;
    gopt.t2 = mgrid.front() / 4.0;
    gopt.p_source = source;
    gopt.probe = ProbeOptions{c.n_probe, c.seed};
    const auto grid = c.t_grid();
    const std::size_t per = std::max<std::size_t>(1, c.n_samples / grid.size());
    SegmentCollection<P> segs;
    std::int64_t id = 0;
    for (double t : grid) {
        if (!(t > gopt.t2) || t > 0.5 * mu.t) continue;  // longer balls are not resolved by the finite measure
        for (const auto& x : spread(ctx.lambda.slice(t), per)) segs.segments.push_back({x, t, id++});
    }
    auto dec = make_decomposition(c, ctx);
    std::vector<char> good(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto sp = dec.splitter(segs.segments[i]);
        good[i] = sp.p == 0.0 && sp.s == 0.0;
    }
    auto lower = gibbs_lower(*ctx.flow, ctx.phi, mu, segs, c.rho(), p_hat, gopt);
    auto upper = gibbs_upper(*ctx.flow, ctx.phi, mu, segs, c.gamma(), p_hat, good, gopt);

    // Mixing pairs: q just above T2 + 2τ, segment lengths chosen so that
    // t1 + q + t2 stays within the measure's horizon.
    const bool symbolic = ctx.flow->kind() == BackendKind::SymbolicSuspension;
    MixingOptions mopt;
    mopt.t2 = gopt.t2;
    mopt.tau = std::min({1.0, c.tau_max, mu.t / 8.0});
    mopt.p_source = source;
    const double q = symbolic ? std::floor(mopt.t2 + 2.0 * mopt.tau) + 1.0 : mopt.t2 + 2.5 * mopt.tau;
    double tm = 0.5 * (mu.t - q);
    if (symbolic) tm = std::floor(tm);
    Json mixing = Json::array();
    if (tm > 0.0) {
        const auto pts = spread(ctx.lambda.slice(tm), 2 * o.mixing_pairs);
        for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
            const OrbitSegment<P> a{pts[i], tm, static_cast<std::int64_t>(i)}, b{pts[i + 1], tm, static_cast<std::int64_t>(i + 1)};
            Json j = to_json(gibbs_mixing(*ctx.flow, ctx.phi, mu, a, b, q, c.rho(), p_hat, mopt));
            j["t"] = tm;
            mixing.push_back(j);
        }
    }
    Json doc{{"subcommand", "gibbs"}, {"scales", scales_json(c)}, {"p_hat", num(p_hat)}, {"p_source", source},
             {"measure_t", mu.t}, {"atoms", mu.size()}, {"lower", to_json(lower)}, {"upper", to_json(upper)},
             {"mixing", mixing}};
    Output(output_path(c, o, "gibbs.json")).document(doc);
    return Json{{"subcommand", "gibbs"}, {"q_lower", num(lower.q_hat)}, {"q_upper", num(upper.q_hat)},
                {"lower_pass", lower.pass}, {"upper_pass", upper.pass}};
}

// ---------------------------------------------------------------- report

inline Json run_report(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Failure(1, "E_INPUT", "not a directory: " + dir.string());
    std::string csv = "table,t,log_lambda,delta,eps,scale,ratio\n";
    Json summary{{"subcommand", "report"}};
    auto cell = [](double v) { return std::isfinite(v) ? dec12(v) : num(v).get<std::string>(); };
    auto guard = [&](const char* file, auto&& body) {
        try {
            body();
        } catch (const Failure&) {
            throw;
        } catch (const std::exception& e) {
            throw Failure(1, "E_INPUT", std::string(file) + ": " + e.what());
        }
    };
    if (fs::exists(dir / "pressure.jsonl")) {
        guard("pressure.jsonl", [&] {
            std::vector<double> ts, ls;
            for (const auto& j : read_jsonl(dir / "pressure.jsonl")) {
                const double t = j.at("t").get<double>(), l = num_from(j.at("log_lambda"));
                csv += "pressure," + cell(t) + "," + cell(l) + "," + cell(j.at("delta").get<double>()) + "," +
                       cell(j.at("eps").get<double>()) + ",,\n";
                if (std::isfinite(l)) {
                    ts.push_back(t);
                    ls.push_back(l);
                }
            }
            if (ts.size() >= 2) summary["pressure"] = least_squares(ts, ls).slope;
        });
    }
    if (fs::exists(dir / "gibbs.json")) {
        guard("gibbs.json", [&] {
            const auto g = read_json(dir / "gibbs.json");
            for (const char* kind : {"lower", "upper"}) {
                const auto& r = g.at(kind);
                for (const auto& e : r.at("records"))
                    csv += std::string("gibbs_") + kind + "," + cell(e.at("t").get<double>()) + ",,,," +
                           cell(r.at("scale").get<double>()) + "," + cell(num_from(e.at("ratio"))) + "\n";
                summary[std::string("gibbs_") + kind] = Json{{"q_hat", r.at("q_hat")}, {"pass", r.at("pass")}};
            }
        });
    }
    Json checklist{{"I0", "unchecked"}, {"I1", "unchecked"}, {"II", "unchecked"}, {"III", "unchecked"}};
    if (fs::exists(dir / "spec.json"))
        guard("spec.json", [&] {
            const auto s = read_json(dir / "spec.json").at("status");
            checklist["I0"] = s.at("I0");
            checklist["I1"] = s.at("I1");
        });
    if (fs::exists(dir / "decompose.json"))
        guard("decompose.json", [&] { checklist["II"] = read_json(dir / "decompose.json").at("status"); });
    if (fs::exists(dir / "expansivity.json"))
        guard("expansivity.json", [&] { checklist["III"] = read_json(dir / "expansivity.json").at("status"); });
    summary["checklist"] = checklist;
    Output(dir / "report.csv").raw(csv);
    Output(dir / "summary.json").document(summary);
    return summary;
}

// ---------------------------------------------------------------- entry point

inline void emit_error(std::ostream& err, const std::string& code, const std::string& message) {
    err << Json{{"code", code}, {"message", message}}.dump() << '\n';
}

/// Horizon that cached ODE trajectories must cover.  One value for all
/// subcommands, so that they share the cache file and the cloud.
inline double horizon_for(const RunConfig& c) {
    double h = std::max(c.tmax, c.construct_grid().back() * 2.0 + 2.0);
    h = std::max(h, 3.0 * (c.t0 + 4.0 + c.tau_max));
    return std::max(h, 200.0);
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pressure, specification, expansivity and equilibrium-state numerics for flows"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* s) {
        s->add_option("--config", o.config, "INI configuration file")->required();
        s->add_option("--out", o.out, "Output file (default: <output dir>/<subcommand file>)");
        s->add_option("--out-dir", o.out_dir, "Output directory (overrides run.output)");
        s->add_option("--seed", o.seed, "Seed (overrides run.seed)");
    };
    auto* p = app.add_subcommand("pressure", "Partition sums and the pressure estimate over a t grid");
    common(p);
    p->add_option("--collection", o.collection, "lambda, u1 or u")->check(CLI::IsMember({"lambda", "u1", "u"}));
    p->add_option("--delta", o.delta, "Separation scale delta");
    p->add_option("--eps", o.eps, "Bowen scale eps");
    p->add_option("--tmin", o.tmin, "Smallest t");
    p->add_option("--tmax", o.tmax, "Largest t");
    p->add_option("--tsteps", o.tsteps, "Number of grid times");
    auto* s = app.add_subcommand("spec", "Glue random segments and verify shadowing certificates");
    common(s);
    s->add_option("--delta", o.delta, "Shadowing scale delta");
    s->add_option("--cycles", o.cycles, "Glue/verify cycles per container");
    s->add_option("--pieces", o.pieces, "Segments per cycle")->check(CLI::Range(1, 16));
    auto* e = app.add_subcommand("expansivity", "Non-expansive sweep and the obstruction pressure");
    common(e);
    e->add_option("--eps", o.eps, "Expansivity scale eps");
    e->add_option("--window", o.window, "Two-sided window length");
    e->add_option("--probes", o.probes, "Probes per point");
    auto* d = app.add_subcommand("decompose", "Split segments of O(U1) into prefix, good core and suffix");
    common(d);
    auto* c = app.add_subcommand("construct", "Build the limit candidate measure");
    common(c);
    c->add_option("--delta", o.delta, "Base scale delta (rho1 = 20 delta)");
    auto* g = app.add_subcommand("gibbs", "Lower, upper and mixing Gibbs checks of a stored measure");
    common(g);
    g->add_option("--measure", o.measure, "Measure file written by construct");
    g->add_option("--delta", o.delta, "Base scale delta (rho = 22 delta, gamma = 10 delta)");
    g->add_option("--mixing-pairs", o.mixing_pairs, "Segment pairs for the mixing check");
    auto* r = app.add_subcommand("report", "Aggregate a results directory into report.csv and summary.json");
    r->add_option("--dir", o.dir, "Results directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex, out, err);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex, out, err);
    } catch (const CLI::ParseError& ex) {
        emit_error(err, "E_CONFIG", ex.what());
        return 1;
    }
    try {
        if (r->parsed()) {
            out << run_report(o.dir).dump() << '\n';
            return 0;
        }
        const std::string sub = app.get_subcommands().front()->get_name();
        RunConfig cfg = load_config(o.config);
        apply_overrides(cfg, o);
        for (const auto& w : cfg.warnings()) err << Json{{"level", "warning"}, {"message", w}}.dump() << '\n';
        fs::create_directories(cfg.output);
        Json summary = with_backend(cfg, horizon_for(cfg), [&](const auto& ctx) -> Json {
            try {
                if (sub == "pressure") return run_pressure(cfg, o, ctx);
                if (sub == "spec") return run_spec(cfg, o, ctx);
                if (sub == "expansivity") return run_expansivity(cfg, o, ctx);
                if (sub == "decompose") return run_decompose(cfg, o, ctx);
                if (sub == "construct") return run_construct(cfg, o, ctx);
                return run_gibbs(cfg, o, ctx);
            } catch (const Error& ex) {
                throw Failure(3, error_code(ex.code()), ex.what());
            }
        });
        out << summary.dump() << '\n';
        return 0;
    } catch (const Failure& f) {
        emit_error(err, f.code, f.what());
        return f.exit_code;
    } catch (const Error& ex) {
        emit_error(err, error_code(ex.code()), ex.what());
        return 3;
    } catch (const std::exception& ex) {
        emit_error(err, "E_INTERNAL", ex.what());
        return 3;
    }
}

}  // namespace thermoflow::cli
