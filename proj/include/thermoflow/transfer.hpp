#pragma once

// Transfer-matrix pressure for suspensions with first-symbol potentials.
// The pressure P solves  spectral_radius( A_ij · exp(a_i − P·r_i) ) = 1.

#include <cmath>
#include <vector>

#include "thermoflow/core.hpp"
#include "thermoflow/suspension.hpp"

namespace thermoflow {

using Matrix = std::vector<std::vector<double>>;

/// Perron root of a nonnegative matrix, by power iteration on I + M (which
/// is primitive whenever M is irreducible).
inline double spectral_radius(const Matrix& m, int iterations = 20000, double tol = 1e-15) {
    const std::size_t n = m.size();
    if (n == 0) return 0.0;
    std::vector<double> v(n, 1.0), w(n);
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = v[i];
            for (std::size_t j = 0; j < n; ++j) acc += m[i][j] * v[j];
            w[i] = acc;
        }
        double norm = 0.0;
        for (double x : w) norm = std::max(norm, x);
        if (norm <= 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) w[i] /= norm;
        const double prev = lambda;
        lambda = norm;
        v.swap(w);
        if (it > 10 && std::abs(lambda - prev) <= tol * lambda) break;
    }
    return lambda - 1.0;
}

/// Pressure of the suspension restricted to `symbols` (all symbols when
/// empty) for the potential taking value a_i on fiber i.  Returns -inf
/// when the restricted graph carries no cycle.
inline double suspension_pressure(const SuspensionFlow& flow, const std::vector<double>& a,
                                  const std::vector<int>& symbols = {}) {
    const int k = flow.alphabet();
    if (static_cast<int>(a.size()) != k) throw Error(ErrorCode::InvalidArgument, "one potential value per symbol");
    std::vector<int> sub = symbols;
    if (sub.empty())
        for (int s = 0; s < k; ++s) sub.push_back(s);
    const std::size_t n = sub.size();
    auto radius_at = [&](double p) {
        Matrix m(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (flow.allowed(sub[i], sub[j]))
                    m[i][j] = std::exp(a[static_cast<std::size_t>(sub[i])] - p * flow.roof(sub[i]));
        return spectral_radius(m);
    };
    if (radius_at(0.0) <= 0.0) return -kInf;
    double amax = 0.0;
    for (double v : a) amax = std::max(amax, std::abs(v));
    double span = (amax + std::log(static_cast<double>(k)) + 1.0) / flow.min_roof() + 1.0;
    double lo = -span, hi = span;
    while (radius_at(lo) < 1.0) lo *= 2.0;
    while (radius_at(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        (radius_at(mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Topological entropy of the suspension flow (φ ≡ 0).
inline double suspension_entropy(const SuspensionFlow& flow) {
    return suspension_pressure(flow, std::vector<double>(static_cast<std::size_t>(flow.alphabet()), 0.0));
}

}  // namespace thermoflow
