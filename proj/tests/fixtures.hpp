#pragma once

// Small backends and helpers shared by the unit tests.

#include <cmath>
#include <vector>

#include "thermoflow/thermoflow.hpp"

namespace fixtures {

using namespace thermoflow;

/// Translation x ↦ x + t on the real line, declared non-invertible.
struct ForwardOnlyFlow {
    using point_type = double;
    BackendKind kind() const { return BackendKind::Ode; }
    std::size_t dimension() const { return 1; }
    double time_step() const { return 1e-3; }
    bool invertible() const { return false; }
    double diameter() const { return 1.0; }
    double evolve(double x, double t) const { return x + t; }
    double distance(double a, double b) const { return std::abs(a - b); }
    bool same_point(double a, double b) const { return a == b; }
    std::vector<double> features(double x) const { return {x}; }
    std::vector<double> hash_features(double x, double) const { return {x}; }
    double perturb(double x, double s, Rng& rng) const { return x + s * (2 * uniform01(rng) - 1); }
};

/// Periodic point with the given word, origin 0 and height 0.
inline SymbolicPoint word_point(const SuspensionFlow& flow, const std::string& w) { return flow.point(w); }

inline Word random_word(Rng& rng, int len, int k) {
    Word w(static_cast<std::size_t>(len));
    for (auto& c : w) c = static_cast<std::uint8_t>(rng() % static_cast<std::uint64_t>(k));
    return w;
}

/// Cloud of the attractor shared across tests (built once).
inline const LorenzFlow& lorenz_with_trajectory() {
    static const LorenzFlow flow = make_lorenz().with_trajectory({1.0, 1.0, 1.0}, 100.0, 4000, 0.01, 6000);
    return flow;
}

}  // namespace fixtures
