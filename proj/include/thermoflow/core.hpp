#pragma once

// Shared plumbing: error type, seeded RNG streams, deterministic parallel
// loops and small numeric helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace thermoflow {

enum class ErrorCode {
    InvalidArgument,
    NonInvertible,
    Diverged,
    OutsideDomain,
    EmptySlice,
    DegenerateFit,
    NotInDomain,
    NoCertificate,
    InfeasibleGap,
    Config,
    Io,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonInvertible: return "NonInvertible";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::EmptySlice: return "EmptySlice";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::NotInDomain: return "NotInDomain";
    case ErrorCode::NoCertificate: return "NoCertificate";
    case ErrorCode::InfeasibleGap: return "InfeasibleGap";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent, reproducible streams
/// from one user seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(mix_seed(seed, stream)); }

inline double uniform01(Rng& rng) {
    // 53 random mantissa bits; avoids distribution-implementation drift
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Worker count, capped by THERMOFLOW_THREADS when set.
inline unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("THERMOFLOW_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

/// Runs fn(i) for i in [0, n). Each index must write only its own output slot,
/// which makes results independent of the worker count.  `grain` is the
/// smallest number of indices worth a thread.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t grain = 64) {
    const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n / std::max<std::size_t>(grain, 1), 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

inline double log_sum_exp(std::span<const double> values) {
    if (values.empty()) return -kInf;
    const double m = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - m);
    return m + std::log(acc);
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS of residuals
};

inline LinearFit least_squares(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) throw Error(ErrorCode::DegenerateFit, "need at least two points");
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw Error(ErrorCode::DegenerateFit, "abscissae are identical");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

/// Evenly spaced grid with `steps` entries from lo to hi inclusive.
inline std::vector<double> linear_grid(double lo, double hi, std::size_t steps) {
    if (steps == 0) return {};
    if (steps == 1) return {lo};
    std::vector<double> g(steps);
    for (std::size_t i = 0; i < steps; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
    return g;
}

}  // namespace thermoflow
