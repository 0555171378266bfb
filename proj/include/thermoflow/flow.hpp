#pragma once

// Backend-independent vocabulary: the FlowBackend concept, potentials and
// neighborhoods, plus the generic evolve/distance entry points.

#include <concepts>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "thermoflow/core.hpp"

namespace thermoflow {

enum class BackendKind { SymbolicSuspension, Ode };

inline const char* to_string(BackendKind k) {
    return k == BackendKind::SymbolicSuspension ? "symbolic-suspension" : "ode";
}

/// What every flow backend provides. Backends are immutable after
/// construction and safe to share between threads.
///
/// `hash_features(x, t)` returns at most four reals, each 1-Lipschitz with
/// respect to the Bowen metric d_t; the separated-set builder uses them to
/// prune pair checks without ever missing a conflict.
template <class B>
concept FlowBackend = requires(const B& b, const typename B::point_type& x, double t, Rng& rng) {
    typename B::point_type;
    { b.kind() } -> std::same_as<BackendKind>;
    { b.dimension() } -> std::convertible_to<std::size_t>;
    { b.time_step() } -> std::convertible_to<double>;
    { b.invertible() } -> std::convertible_to<bool>;
    { b.diameter() } -> std::convertible_to<double>;
    { b.evolve(x, t) } -> std::same_as<typename B::point_type>;
    { b.distance(x, x) } -> std::convertible_to<double>;
    { b.same_point(x, x) } -> std::convertible_to<bool>;
    { b.features(x) } -> std::same_as<std::vector<double>>;
    { b.hash_features(x, t) } -> std::same_as<std::vector<double>>;
    { b.perturb(x, t, rng) } -> std::same_as<typename B::point_type>;
};

enum class NeighborhoodKind { MetricBallUnion, SublevelSet, SymbolicCylinderUnion, Everything };
enum class NeighborhoodLabel { U, U1, LambdaHull };

inline const char* to_string(NeighborhoodLabel l) {
    switch (l) {
    case NeighborhoodLabel::U: return "U";
    case NeighborhoodLabel::U1: return "U1";
    case NeighborhoodLabel::LambdaHull: return "lambda";
    }
    return "?";
}

template <class P>
struct Neighborhood {
    NeighborhoodKind kind = NeighborhoodKind::Everything;
    NeighborhoodLabel label = NeighborhoodLabel::U;
    std::function<bool(const P&)> contains = [](const P&) { return true; };
};

/// The nested family Lambda-hull ⊂ U1 ⊂ U.
template <class P>
struct NeighborhoodSet {
    Neighborhood<P> u;
    Neighborhood<P> u1;
    Neighborhood<P> lambda;

    const Neighborhood<P>& get(NeighborhoodLabel l) const {
        switch (l) {
        case NeighborhoodLabel::U: return u;
        case NeighborhoodLabel::U1: return u1;
        case NeighborhoodLabel::LambdaHull: return lambda;
        }
        return u;
    }
};

enum class PotentialKind { Constant, FirstSymbol, Holder, Coordinate, Custom };

template <class P>
struct Potential {
    PotentialKind kind = PotentialKind::Custom;
    std::function<double(const P&)> evaluator;
    std::optional<double> constant;           // set when φ ≡ c
    std::vector<double> symbol_values;        // set for first-symbol potentials
    double sup_norm = 0.0;                    // ‖φ‖ over the neighborhood
    std::optional<double> holder_exponent;    // modulus hint
    std::optional<double> holder_constant;
    std::string label;
    std::optional<Neighborhood<P>> domain;    // U; unset means no domain check

    double operator()(const P& x) const { return constant ? *constant : evaluator(x); }
};

template <class P>
Potential<P> constant_potential(double c) {
    Potential<P> phi;
    phi.kind = PotentialKind::Constant;
    phi.constant = c;
    phi.evaluator = [c](const P&) { return c; };
    phi.sup_norm = std::abs(c);
    phi.label = "constant";
    return phi;
}

/// φ(x), raising OutsideDomain when x is outside the potential's domain.
template <class P>
double eval_potential(const Potential<P>& phi, const P& x) {
    if (phi.domain && !phi.domain->contains(x))
        throw Error(ErrorCode::OutsideDomain, "point is outside the potential's domain");
    return phi(x);
}

template <FlowBackend B>
typename B::point_type evolve(const B& backend, const typename B::point_type& x, double t) {
    if (t < 0.0 && !backend.invertible())
        throw Error(ErrorCode::NonInvertible, "negative time on a non-invertible backend");
    return backend.evolve(x, t);
}

template <FlowBackend B>
double distance(const B& backend, const typename B::point_type& x, const typename B::point_type& y) {
    return backend.distance(x, y);
}

}  // namespace thermoflow
