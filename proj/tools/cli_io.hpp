#pragma once

// JSON encoding of points, measures, reports and certificates.

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli_config.hpp"

namespace thermoflow::cli {

using Json = nlohmann::ordered_json;

/// Finite doubles as JSON numbers (shortest round-trip form); infinities and
/// NaN as the strings "inf", "-inf", "nan".
inline Json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline double num_from(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        if (s == "nan") return std::nan("");
    }
    throw Failure(1, "E_INPUT", "expected a number");
}

/// Decimal string with 12 significant digits.
inline std::string dec12(double v) {
    if (!std::isfinite(v)) return num(v).get<std::string>();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline Json to_json(const SuspensionFlow& flow, const SymbolicPoint& x) {
    Json j;
    j["coords"] = flow.features(x);
    j["word"] = word_to_string(*x.word);
    j["origin"] = x.origin;
    j["height"] = x.height;
    return j;
}

inline Json to_json(const LorenzFlow&, const LorenzPoint& p) {
    Json j;
    j["coords"] = std::vector<double>(p.x.begin(), p.x.end());
    j["cache_index"] = p.cache_index;
    return j;
}

inline SymbolicPoint point_from_json(const SuspensionFlow& flow, const Json& j) {
    SymbolicPoint x = flow.make_periodic(word_from_string(j.at("word").get<std::string>()), j.at("origin").get<std::int64_t>());
    x.height = j.at("height").get<std::int64_t>();
    return x;
}

inline LorenzPoint point_from_json(const LorenzFlow&, const Json& j) {
    const auto c = j.at("coords").get<std::vector<double>>();
    if (c.size() != 3) throw Failure(1, "E_INPUT", "Lorenz atoms need three coordinates");
    return LorenzPoint{State<3>{c[0], c[1], c[2]}, j.value("cache_index", std::int64_t{-1})};
}

class Output {
public:
    explicit Output(const std::filesystem::path& path) : path_(path) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw Failure(3, "E_IO", "cannot write " + path.string());
    }
    void line(const Json& j) { out_ << j.dump() << '\n'; }
    void document(const Json& j) { out_ << j.dump(2) << '\n'; }
    void raw(const std::string& s) { out_ << s; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

inline std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure(1, "E_INPUT", "cannot read " + path.string());
    std::vector<Json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const std::exception&) {
            throw Failure(1, "E_INPUT", path.string() + ":" + std::to_string(n) + ": malformed JSON");
        }
    }
    return out;
}

inline Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure(1, "E_INPUT", "cannot read " + path.string());
    try {
        return Json::parse(in);
    } catch (const std::exception&) {
        throw Failure(1, "E_INPUT", path.string() + ": malformed JSON");
    }
}

template <class B>
void write_measure(const B& flow, const EmpiricalMeasure<typename B::point_type>& mu, const std::filesystem::path& path) {
    Output out(path);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        Json j = to_json(flow, mu.atoms[i]);
        j["weight"] = mu.weights[i];
        out.line(j);
    }
}

template <class B>
EmpiricalMeasure<typename B::point_type> read_measure(const B& flow, const std::filesystem::path& path, double t) {
    EmpiricalMeasure<typename B::point_type> mu;
    mu.provenance = Provenance::Limit;
    mu.t = t;
    try {
        for (const auto& j : read_jsonl(path)) {
            mu.atoms.push_back(point_from_json(flow, j));
            mu.weights.push_back(j.at("weight").get<double>());
        }
    } catch (const Failure&) {
        throw;
    } catch (const std::exception& e) {
        throw Failure(1, "E_INPUT", path.string() + ": " + e.what());
    }
    if (mu.size() == 0) throw Failure(1, "E_INPUT", path.string() + ": measure has no atoms");
    return mu;
}

inline Json to_json(const GibbsReport& r) {
    Json j;
    j["kind"] = r.kind == GibbsKind::Lower ? "lower" : "upper";
    j["scale"] = r.scale;
    j["p_hat"] = num(r.p_hat);
    j["p_source"] = r.p_source;
    j["t2"] = r.t2;
    j["t_min"] = num(r.t_min);
    j["t_max"] = num(r.t_max);
    j["skipped"] = r.skipped;
    j["q_hat"] = num(r.q_hat);
    if (r.kind == GibbsKind::Upper) j["q_hat_phi0"] = num(r.q_hat_phi0);
    j["bound"] = r.bound;
    j["pass"] = r.pass;
    Json recs = Json::array();
    for (const auto& g : r.records) {
        Json e;
        e["id"] = g.id;
        e["t"] = g.t;
        e["mass"] = g.mass;
        e["log_reference"] = num(g.log_reference);
        e["ratio"] = num(g.ratio);
        if (r.kind == GibbsKind::Upper) {
            e["good"] = g.good;
            e["ratio_phi0"] = num(g.ratio_phi0);
        }
        recs.push_back(e);
    }
    j["records"] = recs;
    return j;
}

inline Json to_json(const MixingReport& r) {
    Json j;
    j["q"] = r.q;
    j["rho"] = r.rho;
    j["log_reference"] = num(r.log_reference);
    j["best_q_prime"] = r.best_q_prime;
    j["best_ratio"] = num(r.best_ratio);
    j["pass"] = r.pass;
    Json scan = Json::array();
    for (const auto& e : r.scanned) scan.push_back(Json{{"q_prime", e.q_prime}, {"mass", e.mass}, {"ratio", num(e.ratio)}});
    j["scanned"] = scan;
    return j;
}

template <class B>
Json to_json(const B& flow, const ShadowingCertificate<typename B::point_type>& cert, const VerifyReport& rep) {
    Json j;
    j["container"] = cert.container == NeighborhoodLabel::U ? "U" : "U1";
    j["delta"] = cert.delta;
    j["tau_max"] = cert.tau_max;
    Json inputs = Json::array();
    for (const auto& s : cert.inputs) {
        Json e = to_json(flow, s.start);
        e["t"] = s.t;
        inputs.push_back(e);
    }
    j["inputs"] = inputs;
    j["y"] = to_json(flow, cert.y);
    j["gluing"] = cert.gluing;
    j["transfer"] = cert.transfer;
    Json margins = Json::array();
    for (double m : cert.margins) margins.push_back(dec12(m));
    j["margins"] = margins;
    j["stats"] = Json{{"starts_tried", cert.stats.starts_tried},
                      {"evaluations", cert.stats.evaluations},
                      {"winning_start", cert.stats.winning_start},
                      {"best_objective", num(cert.stats.best_objective)}};
    Json checks = Json::array();
    for (const auto& c : rep.checks)
        checks.push_back(Json{{"name", c.name}, {"value", num(c.value)}, {"bound", num(c.bound)}, {"slack", dec12(c.slack)}, {"pass", c.pass}});
    j["verify"] = Json{{"ok", rep.ok}, {"container_ok", rep.container_ok}, {"checks", checks}};
    return j;
}

}  // namespace thermoflow::cli
