#pragma once

// Run configuration: flat INI sections read with boost::property_tree, all
// numbers parsed from decimal strings with std::from_chars (locale-free).

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "thermoflow/thermoflow.hpp"

namespace thermoflow::cli {

/// Failure carrying the process exit code and the stderr code string.
struct Failure : std::runtime_error {
    Failure(int exit, std::string code, const std::string& msg) : std::runtime_error(msg), exit_code(exit), code(std::move(code)) {}
    int exit_code;
    std::string code;
};

inline Failure config_error(const std::string& msg) { return Failure(1, "E_CONFIG", msg); }

inline std::string trim(std::string s) {
    const auto comment = s.find_first_of(";#");
    if (comment != std::string::npos) s.erase(comment);
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& raw, const std::string& what) {
    const std::string s = trim(raw);
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw config_error(what + ": not a decimal number: '" + s + "'");
    return v;
}

inline std::int64_t parse_int(const std::string& raw, const std::string& what) {
    const std::string s = trim(raw);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw config_error(what + ": not an integer: '" + s + "'");
    return v;
}

inline std::vector<double> parse_list(const std::string& raw, const std::string& what) {
    std::vector<double> out;
    std::string s = trim(raw), item;
    if (s.empty()) return out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = s.find(',', start);
        out.push_back(parse_double(s.substr(start, end == std::string::npos ? std::string::npos : end - start), what));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

/// Rows separated by '/', entries are 0/1 characters: "11/10".
inline std::vector<std::vector<int>> parse_matrix(const std::string& raw, const std::string& what) {
    std::vector<std::vector<int>> m;
    std::string s = trim(raw);
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = s.find('/', start);
        std::vector<int> row;
        for (char c : s.substr(start, end == std::string::npos ? std::string::npos : end - start)) {
            if (c == '0' || c == '1') row.push_back(c - '0');
            else if (c != ' ') throw config_error(what + ": transition rows use 0/1 characters");
        }
        m.push_back(std::move(row));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return m;
}

struct FlowConfig {
    std::string kind = "suspension";  // suspension | lorenz
    std::string preset = "full_shift";  // full_shift | golden_mean | single_orbit | custom
    int alphabet = 2;
    std::vector<std::vector<int>> transitions;
    std::vector<double> roof;
    double theta = 0.5;
    double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0;
    double dt = 1e-3;
    std::vector<double> x0{1.0, 1.0, 1.0};
    double burn_in = 100.0;
    std::size_t cloud_points = 20000;
    double spacing = 0.01;
    double bowen_dt = 0.01;
    double box = 1e4;
};

struct PotentialConfig {
    std::string kind = "zero";  // zero | constant | first_symbol | holder | coordinate
    double value = 0.0;
    std::vector<double> values;
    std::vector<double> coeffs;
    std::size_t axis = 0;
};

struct NeighborhoodConfig {
    std::optional<double> u, u1, lambda;
};

struct DecompositionConfig {
    std::string splitter = "trivial";  // trivial | singular | symbol_run
    double r0 = 3.0;
    int bad_symbol = 1;
};

struct RunConfig {
    std::filesystem::path source;
    FlowConfig flow;
    PotentialConfig potential;
    NeighborhoodConfig nbhd;
    DecompositionConfig decomposition;
    double delta = 0.05;
    double eps = 0.0;
    std::optional<double> gamma_override, rho_override, rho1_override;
    double tmin = 4.0, tmax = 16.0;
    std::size_t tsteps = 13;
    std::vector<double> eq_grid;  // construct grid; empty means the run grid
    double slices_per_unit = 1.0;
    double tau_max = 5.0;
    double t0 = 1.0;
    std::uint64_t seed = 0;
    std::size_t n_samples = 64;
    std::size_t n_probe = 16;
    std::size_t search_budget = 64;
    std::string collection = "lambda";
    std::filesystem::path output = "out";

    double gamma() const { return gamma_override.value_or(10.0 * delta); }
    double rho() const { return rho_override.value_or(22.0 * delta); }
    double rho1() const { return rho1_override.value_or(20.0 * delta); }
    std::vector<double> t_grid() const { return linear_grid(tmin, tmax, tsteps); }
    std::vector<double> construct_grid() const { return eq_grid.empty() ? t_grid() : eq_grid; }

    /// Guardrail messages: ε ≥ 1000δ and γ ∈ [8δ, 200δ].
    std::vector<std::string> warnings() const {
        std::vector<std::string> w;
        if (eps < 1000.0 * delta) w.push_back("eps below 1000*delta");
        if (gamma() < 8.0 * delta || gamma() > 200.0 * delta) w.push_back("gamma outside [8*delta, 200*delta]");
        if (rho_override) w.push_back("rho overridden (default 22*delta)");
        if (rho1_override) w.push_back("rho1 overridden (default 20*delta)");
        return w;
    }
};

namespace detail {

using boost::property_tree::ptree;

inline std::optional<std::string> lookup(const ptree& root, const std::string& section, const std::string& key) {
    auto sec = root.find(section);
    if (sec == root.not_found()) return std::nullopt;
    auto it = sec->second.find(key);  // literal key: INI keys may contain dots
    if (it == sec->second.not_found()) return std::nullopt;
    return it->second.data();
}

}  // namespace detail

inline RunConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw config_error("config file not found: " + path.string());
    detail::ptree root;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), root);
    } catch (const std::exception& e) {
        throw config_error(std::string("cannot parse config: ") + e.what());
    }
    RunConfig c;
    c.source = path;
    auto str = [&](const char* sec, const char* key, auto& dst) {
        if (auto v = detail::lookup(root, sec, key)) dst = trim(*v);
    };
    auto num = [&](const char* sec, const char* key, double& dst) {
        if (auto v = detail::lookup(root, sec, key)) dst = parse_double(*v, std::string(sec) + "." + key);
    };
    auto opt_num = [&](const char* sec, const char* key, std::optional<double>& dst) {
        if (auto v = detail::lookup(root, sec, key)) dst = parse_double(*v, std::string(sec) + "." + key);
    };
    auto count = [&](const char* sec, const char* key, auto& dst) {
        if (auto v = detail::lookup(root, sec, key)) {
            const auto n = parse_int(*v, std::string(sec) + "." + key);
            if (n < 0) throw config_error(std::string(sec) + "." + key + " must be nonnegative");
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(n);
        }
    };
    auto list = [&](const char* sec, const char* key, std::vector<double>& dst) {
        if (auto v = detail::lookup(root, sec, key)) dst = parse_list(*v, std::string(sec) + "." + key);
    };

    str("flow", "kind", c.flow.kind);
    str("flow", "preset", c.flow.preset);
    count("flow", "alphabet", c.flow.alphabet);
    if (auto v = detail::lookup(root, "flow", "transitions")) c.flow.transitions = parse_matrix(*v, "flow.transitions");
    list("flow", "roof", c.flow.roof);
    num("flow", "theta", c.flow.theta);
    num("flow", "sigma", c.flow.sigma);
    num("flow", "rho", c.flow.rho);
    num("flow", "beta", c.flow.beta);
    num("flow", "dt", c.flow.dt);
    list("flow", "x0", c.flow.x0);
    num("flow", "burn_in", c.flow.burn_in);
    count("flow", "cloud_points", c.flow.cloud_points);
    num("flow", "spacing", c.flow.spacing);
    num("flow", "bowen_dt", c.flow.bowen_dt);
    num("flow", "box", c.flow.box);

    str("potential", "kind", c.potential.kind);
    num("potential", "value", c.potential.value);
    list("potential", "values", c.potential.values);
    list("potential", "coeffs", c.potential.coeffs);
    count("potential", "axis", c.potential.axis);

    opt_num("neighborhoods", "u.radius", c.nbhd.u);
    opt_num("neighborhoods", "u1.radius", c.nbhd.u1);
    opt_num("neighborhoods", "lambda.radius", c.nbhd.lambda);

    str("decomposition", "splitter", c.decomposition.splitter);
    num("decomposition", "r0", c.decomposition.r0);
    count("decomposition", "bad_symbol", c.decomposition.bad_symbol);

    num("scales", "delta", c.delta);
    num("scales", "eps", c.eps);
    opt_num("scales", "gamma", c.gamma_override);
    opt_num("scales", "rho", c.rho_override);
    opt_num("scales", "rho1", c.rho1_override);

    num("run", "tmin", c.tmin);
    num("run", "tmax", c.tmax);
    count("run", "tsteps", c.tsteps);
    count("run", "seed", c.seed);
    count("run", "n_samples", c.n_samples);
    count("run", "n_probe", c.n_probe);
    count("run", "search_budget", c.search_budget);
    str("run", "collection", c.collection);
    std::string out = c.output.string();
    str("run", "output", out);
    c.output = out;

    list("equilibrium", "t_grid", c.eq_grid);
    num("equilibrium", "slices_per_unit", c.slices_per_unit);
    num("spec", "tau_max", c.tau_max);
    num("spec", "t0", c.t0);

    if (!(c.delta > 0.0)) throw config_error("scales.delta must be positive");
    if (c.eps < 0.0) throw config_error("scales.eps must be nonnegative");
    if (c.flow.kind != "suspension" && c.flow.kind != "lorenz") throw config_error("flow.kind must be suspension or lorenz");
    if (c.collection != "lambda" && c.collection != "u1" && c.collection != "u")
        throw config_error("run.collection must be lambda, u1 or u");
    return c;
}

}  // namespace thermoflow::cli
