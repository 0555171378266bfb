#pragma once

// Backend construction from a RunConfig: the flow, the potential, the
// neighborhoods U, U₁, Λ and the collections Λ×R+, O(U₁), O(U).

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "cli_config.hpp"
#include "thermoflow/io.hpp"

namespace thermoflow::cli {

inline Failure backend_error(const std::string& msg) { return Failure(2, "E_BACKEND", msg); }

template <class B>
struct Context {
    using P = typename B::point_type;
    std::shared_ptr<const B> flow;
    Potential<P> phi;
    NeighborhoodSet<P> nbhd;
    SegmentCollection<P> lambda, u1, u;
    std::optional<double> oracle_pressure;
    std::string backend_hash;

    const SegmentCollection<P>& collection(const std::string& name) const {
        if (name == "u1") return u1;
        if (name == "u") return u;
        return lambda;
    }
};

/// FNV-1a over the bytes of a description string.
inline std::string hash_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

inline SuspensionSpec suspension_spec(const FlowConfig& f) {
    const double roof = f.roof.empty() ? 1.0 : f.roof.front();
    SuspensionSpec s;
    if (f.preset == "full_shift") s = SuspensionSpec::full_shift(f.alphabet, roof, f.theta);
    else if (f.preset == "golden_mean") s = SuspensionSpec::golden_mean(roof, f.theta);
    else if (f.preset == "single_orbit") s = SuspensionSpec::single_orbit(roof, f.theta);
    else if (f.preset == "custom") {
        s.alphabet = f.alphabet;
        s.transitions = f.transitions;
        s.theta = f.theta;
    } else {
        throw config_error("flow.preset must be full_shift, golden_mean, single_orbit or custom");
    }
    if (f.roof.size() > 1 || f.preset == "custom") {
        s.roof = f.roof;
        if (s.roof.size() == 1) s.roof.assign(static_cast<std::size_t>(s.alphabet), s.roof.front());
    }
    return s;
}

inline Context<SuspensionFlow> suspension_context(const RunConfig& c) {
    Context<SuspensionFlow> ctx;
    try {
        ctx.flow = std::make_shared<const SuspensionFlow>(suspension_spec(c.flow));
    } catch (const Error& e) {
        throw backend_error(e.what());
    }
    const auto& flow = *ctx.flow;
    const int u = static_cast<int>(c.nbhd.u.value_or(1.0));
    const int u1 = static_cast<int>(c.nbhd.u1.value_or(2.0));
    const int lam = static_cast<int>(c.nbhd.lambda.value_or(3.0));
    try {
        ctx.nbhd = flow.neighborhoods(u, u1, lam);
    } catch (const Error& e) {
        throw config_error(e.what());
    }
    const auto& pc = c.potential;
    const auto k = static_cast<std::size_t>(flow.alphabet());
    std::optional<std::vector<double>> symbol_values;
    if (pc.kind == "zero" || pc.kind == "constant") {
        const double v = pc.kind == "zero" ? 0.0 : pc.value;
        ctx.phi = constant_potential<SymbolicPoint>(v);
        symbol_values = std::vector<double>(k, v);
    } else if (pc.kind == "first_symbol") {
        if (pc.values.size() != k) throw config_error("potential.values needs one value per symbol");
        ctx.phi = flow.first_symbol_potential(pc.values);
        symbol_values = pc.values;
    } else if (pc.kind == "holder") {
        if (pc.coeffs.empty()) throw config_error("potential.coeffs is empty");
        ctx.phi = flow.holder_potential(pc.coeffs);
    } else {
        throw config_error("potential.kind for suspensions must be zero, constant, first_symbol or holder");
    }
    if (symbol_values) ctx.oracle_pressure = suspension_pressure(flow, *symbol_values);
    ctx.lambda = lambda_collection(flow);
    ctx.u1 = neighborhood_collection(flow, u1, CollectionLabel::OU1);
    ctx.u = neighborhood_collection(flow, u, CollectionLabel::OU);
    std::string desc = "suspension:" + std::to_string(flow.alphabet()) + ":" + exact(flow.spec().theta);
    for (const auto& row : flow.spec().transitions)
        for (int v : row) desc += static_cast<char>('0' + v);
    for (double r : flow.spec().roof) desc += ":" + exact(r);
    ctx.backend_hash = hash_hex(desc);
    return ctx;
}

/// Samples needed on each side of the cloud so that orbit segments up to
/// `horizon` stay inside the cached trajectory.
inline std::size_t margin_for(double horizon, double spacing) {
    return static_cast<std::size_t>(std::ceil((horizon + 10.0) / spacing));
}

inline Context<LorenzFlow> lorenz_context(const RunConfig& c, double horizon) {
    const auto& f = c.flow;
    if (f.x0.size() != 3) throw config_error("flow.x0 needs three coordinates");
    OdeOptions opt;
    opt.dt = f.dt;
    opt.bowen_dt = f.bowen_dt;
    opt.box = f.box;
    Context<LorenzFlow> ctx;
    const State<3> x0{f.x0[0], f.x0[1], f.x0[2]};
    const std::size_t margin = margin_for(horizon, f.spacing);
    try {
        auto base = make_lorenz(LorenzField{f.sigma, f.rho, f.beta}, opt);
        const std::string desc = "lorenz:" + exact(f.sigma) + ":" + exact(f.rho) + ":" + exact(f.beta) + ":" + exact(f.dt) +
                                 ":" + exact(f.box);
        ctx.backend_hash = hash_hex(desc);
        // trajectory cache keyed by backend hash, start point, sample count and spacing
        const std::string key = ctx.backend_hash + "-" +
                                hash_hex(exact(x0[0]) + exact(x0[1]) + exact(x0[2]) + exact(f.burn_in)) + "-" +
                                std::to_string(f.cloud_points + 2 * margin) + "-" + hash_hex(exact(f.spacing));
        const auto dir = c.output / "cache";
        const auto file = dir / ("traj-" + key + ".tfpc");
        if (std::filesystem::exists(file)) {
            TrajectoryCache<3> cache;
            cache.samples = from_cloud<3>(read_tfpc(file.string()));
            cache.steps_per_sample = std::max<std::int64_t>(1, std::llround(f.spacing / f.dt));
            cache.spacing = static_cast<double>(cache.steps_per_sample) * f.dt;
            cache.margin = static_cast<std::int64_t>(margin);
            if (cache.samples.size() != f.cloud_points + 2 * margin) throw backend_error("trajectory cache has the wrong size");
            ctx.flow = std::make_shared<const LorenzFlow>(base.with_cache(std::move(cache)));
        } else {
            ctx.flow = std::make_shared<const LorenzFlow>(base.with_trajectory(x0, f.burn_in, f.cloud_points, f.spacing, margin));
            std::filesystem::create_directories(dir);
            const auto tmp = file.string() + ".tmp";
            write_tfpc(tmp, to_cloud<3>(ctx.flow->cache()->samples));
            std::filesystem::rename(tmp, file);
        }
    } catch (const Error& e) {
        throw backend_error(e.what());
    }
    const auto& flow = *ctx.flow;
    const double u = c.nbhd.u.value_or(2.0), u1 = c.nbhd.u1.value_or(1.0), lam = c.nbhd.lambda.value_or(0.5);
    try {
        ctx.nbhd = ball_neighborhoods(flow, u, u1, lam);
    } catch (const Error& e) {
        throw config_error(e.what());
    }
    const auto& pc = c.potential;
    if (pc.kind == "zero" || pc.kind == "constant") ctx.phi = constant_potential<LorenzPoint>(pc.kind == "zero" ? 0.0 : pc.value);
    else if (pc.kind == "coordinate") ctx.phi = flow.coordinate_potential(pc.axis);
    else throw config_error("potential.kind for lorenz must be zero, constant or coordinate");
    ctx.lambda = cloud_collection(flow, f.cloud_points, CollectionLabel::Lambda);
    ctx.u1 = cloud_collection(flow, f.cloud_points, CollectionLabel::OU1, std::optional(ctx.nbhd.u1));
    ctx.u = cloud_collection(flow, f.cloud_points, CollectionLabel::OU, std::optional(ctx.nbhd.u));
    return ctx;
}

/// Calls fn(context) with the backend named by the config.
template <class Fn>
decltype(auto) with_backend(const RunConfig& c, double horizon, Fn&& fn) {
    if (c.flow.kind == "lorenz") return fn(lorenz_context(c, horizon));
    return fn(suspension_context(c));
}

}  // namespace thermoflow::cli
