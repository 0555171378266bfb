#pragma once

// Suspension flows over subshifts of finite type.
//
// Points are periodic bi-infinite sequences over the ambient alphabet
// (stored as one period) plus a height in the fiber over the current symbol.
// Heights are integer ticks of 2^-32 time units, so flow composition on
// tick-aligned times is exact.  The metric is
//
//     d((a,u),(b,v)) = theta^n + |u - v|,   n = min{|i| : a_i != b_i},
//
// which is discontinuous at roof crossings; Bowen distances therefore take the
// sup over [0, t) (left limits at the right endpoint).

#include <cstdint>
#include <memory>
#include <optional>
#include <numeric>
#include <string>
#include <vector>

#include "thermoflow/core.hpp"
#include "thermoflow/flow.hpp"

namespace thermoflow {

using Word = std::vector<std::uint8_t>;

inline constexpr double kTicksPerUnit = 4294967296.0;  // 2^32

inline std::int64_t to_ticks(double t) { return std::llround(t * kTicksPerUnit); }
inline double from_ticks(std::int64_t ticks) { return static_cast<double>(ticks) / kTicksPerUnit; }

struct SymbolicPoint {
    std::shared_ptr<const Word> word;
    std::int64_t origin = 0;  // index into *word of coordinate 0, in [0, period)
    std::int64_t height = 0;  // ticks, in [0, roof(symbol(0)))

    std::int64_t period() const { return static_cast<std::int64_t>(word->size()); }

    int symbol(std::int64_t i) const {
        const std::int64_t p = period();
        std::int64_t k = (origin + i) % p;
        if (k < 0) k += p;
        return (*word)[static_cast<std::size_t>(k)];
    }

    double height_value() const { return from_ticks(height); }

    /// Symbols at indices [from, from + count).
    Word window(std::int64_t from, std::int64_t count) const {
        Word w(static_cast<std::size_t>(count));
        for (std::int64_t i = 0; i < count; ++i) w[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(symbol(from + i));
        return w;
    }
};

inline std::string word_to_string(const Word& w) {
    std::string s;
    s.reserve(w.size());
    for (auto c : w) s.push_back(c < 10 ? static_cast<char>('0' + c) : static_cast<char>('a' + c - 10));
    return s;
}

inline Word word_from_string(const std::string& s) {
    Word w;
    w.reserve(s.size());
    for (char c : s) {
        if (c >= '0' && c <= '9') w.push_back(static_cast<std::uint8_t>(c - '0'));
        else if (c >= 'a' && c <= 'z') w.push_back(static_cast<std::uint8_t>(c - 'a' + 10));
        else throw Error(ErrorCode::InvalidArgument, std::string("bad symbol '") + c + "'");
    }
    return w;
}

struct SuspensionSpec {
    int alphabet = 2;
    std::vector<std::vector<int>> transitions;  // k x k, entries 0/1
    std::vector<double> roof;                   // per symbol, > 0
    double theta = 0.5;

    static SuspensionSpec full_shift(int k, double roof = 1.0, double theta = 0.5) {
        SuspensionSpec s;
        s.alphabet = k;
        s.transitions.assign(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(k), 1));
        s.roof.assign(static_cast<std::size_t>(k), roof);
        s.theta = theta;
        return s;
    }

    static SuspensionSpec golden_mean(double roof = 1.0, double theta = 0.5) {
        SuspensionSpec s = full_shift(2, roof, theta);
        s.transitions = {{1, 1}, {1, 0}};
        return s;
    }

    /// One symbol: the suspension is a single periodic orbit of period `roof`.
    static SuspensionSpec single_orbit(double roof = 1.0, double theta = 0.5) { return full_shift(1, roof, theta); }
};

class SuspensionFlow {
public:
    using point_type = SymbolicPoint;

    /// Longest word enumerated for candidate clouds.
    static constexpr int kWordCap = 22;

    explicit SuspensionFlow(SuspensionSpec spec) : spec_(std::move(spec)) {
        const auto k = static_cast<std::size_t>(spec_.alphabet);
        if (spec_.alphabet < 1 || spec_.alphabet > 36)
            throw Error(ErrorCode::InvalidArgument, "alphabet size must be in [1, 36]");
        if (spec_.transitions.size() != k) throw Error(ErrorCode::InvalidArgument, "transition matrix has wrong size");
        for (const auto& row : spec_.transitions)
            if (row.size() != k) throw Error(ErrorCode::InvalidArgument, "transition matrix has wrong size");
        if (spec_.roof.size() != k) throw Error(ErrorCode::InvalidArgument, "roof needs one value per symbol");
        if (!(spec_.theta > 0.0 && spec_.theta < 1.0)) throw Error(ErrorCode::InvalidArgument, "theta must lie in (0,1)");
        for (double r : spec_.roof) {
            if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "roof values must be positive");
            roof_ticks_.push_back(to_ticks(r));
            if (roof_ticks_.back() <= 0) throw Error(ErrorCode::InvalidArgument, "roof below tick resolution");
        }
        if (!irreducible()) throw Error(ErrorCode::InvalidArgument, "transition matrix is not irreducible");
        min_roof_ = *std::min_element(spec_.roof.begin(), spec_.roof.end());
        max_roof_ = *std::max_element(spec_.roof.begin(), spec_.roof.end());
        theta_pow_.resize(128);
        theta_pow_[0] = 1.0;
        for (std::size_t i = 1; i < theta_pow_.size(); ++i) theta_pow_[i] = theta_pow_[i - 1] * spec_.theta;
        full_ = true;
        for (const auto& row : spec_.transitions)
            for (int v : row) full_ = full_ && v != 0;
        build_bridges();
    }

    const SuspensionSpec& spec() const { return spec_; }
    BackendKind kind() const { return BackendKind::SymbolicSuspension; }
    std::size_t dimension() const { return 2; }
    double time_step() const { return 1.0 / kTicksPerUnit; }
    bool invertible() const { return true; }
    double diameter() const { return 1.0 + max_roof_; }
    int alphabet() const { return spec_.alphabet; }
    double theta() const { return spec_.theta; }
    double min_roof() const { return min_roof_; }
    double max_roof() const { return max_roof_; }
    bool is_full_shift() const { return full_; }
    std::int64_t roof_ticks(int symbol) const { return roof_ticks_[static_cast<std::size_t>(symbol)]; }
    double roof(int symbol) const { return spec_.roof[static_cast<std::size_t>(symbol)]; }

    bool allowed(int a, int b) const {
        return spec_.transitions[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] != 0;
    }

    bool admissible(const Word& w, bool cyclic) const {
        for (std::size_t i = 0; i + 1 < w.size(); ++i)
            if (!allowed(w[i], w[i + 1])) return false;
        return !cyclic || w.empty() || allowed(w.back(), w.front());
    }

    SymbolicPoint point(Word word, std::int64_t origin = 0, double height = 0.0) const {
        if (word.empty()) throw Error(ErrorCode::InvalidArgument, "empty word");
        for (auto c : word)
            if (c >= spec_.alphabet) throw Error(ErrorCode::InvalidArgument, "symbol outside alphabet");
        SymbolicPoint x;
        const auto p = static_cast<std::int64_t>(word.size());
        x.word = std::make_shared<const Word>(std::move(word));
        x.origin = ((origin % p) + p) % p;
        x.height = to_ticks(height);
        if (x.height < 0 || x.height >= roof_ticks(x.symbol(0)))
            throw Error(ErrorCode::InvalidArgument, "height outside the fiber");
        return x;
    }

    SymbolicPoint point(const std::string& word, std::int64_t origin = 0, double height = 0.0) const {
        return point(word_from_string(word), origin, height);
    }

    SymbolicPoint evolve(const SymbolicPoint& x, double t) const { return evolve_ticks(x, to_ticks(t)); }

    SymbolicPoint evolve_ticks(const SymbolicPoint& x, std::int64_t dt) const {
        SymbolicPoint y = x;
        std::int64_t h = x.height + dt;
        const std::int64_t p = x.period();
        std::int64_t pos = x.origin;
        while (h >= roof_ticks((*x.word)[static_cast<std::size_t>(pos)])) {
            h -= roof_ticks((*x.word)[static_cast<std::size_t>(pos)]);
            pos = pos + 1 == p ? 0 : pos + 1;
        }
        while (h < 0) {
            pos = pos == 0 ? p - 1 : pos - 1;
            h += roof_ticks((*x.word)[static_cast<std::size_t>(pos)]);
        }
        y.origin = pos;
        y.height = h;
        return y;
    }

    /// min{|i| : a_i != b_i}, or -1 when the sequences coincide.
    std::int64_t first_disagreement(const SymbolicPoint& x, const SymbolicPoint& y) const {
        return first_disagreement(*x.word, x.origin, *y.word, y.origin);
    }

    double distance(const SymbolicPoint& x, const SymbolicPoint& y) const {
        return distance_raw(*x.word, x.origin, x.height, *y.word, y.origin, y.height);
    }

    bool same_point(const SymbolicPoint& x, const SymbolicPoint& y) const {
        return x.height == y.height && first_disagreement(x, y) < 0;
    }

    /// sup{ d(f_s x, f_s y) : s in [0, t) }, and d(x, y) when t = 0.  Evaluated
    /// exactly: the distance is constant between roof crossings.
    double bowen_distance(const SymbolicPoint& x, const SymbolicPoint& y, double t) const {
        return bowen_walk(x, y, t, kInf);
    }

    /// True iff the exact Bowen distance exceeds `bound`; stops early.
    bool bowen_exceeds(const SymbolicPoint& x, const SymbolicPoint& y, double t, double bound) const {
        return bowen_walk(x, y, t, bound) > bound;
    }

    /// Calls fn(symbol_index, start, duration) for every fiber the orbit
    /// segment f_[0,t)(x) passes through; start/duration in time units.
    template <class Fn>
    void for_each_fiber(const SymbolicPoint& x, double t, Fn&& fn) const {
        std::int64_t remaining = to_ticks(t);
        std::int64_t h = x.height;
        std::int64_t index = 0;
        std::int64_t elapsed = 0;
        while (remaining > 0) {
            const std::int64_t r = roof_ticks(x.symbol(index));
            const std::int64_t step = std::min(r - h, remaining);
            fn(index, from_ticks(elapsed), from_ticks(step));
            elapsed += step;
            remaining -= step;
            h = 0;
            ++index;
        }
    }

    /// inf{ d(f_s x, y) : |s| <= T }, evaluated fiber by fiber.
    double tube_distance(const SymbolicPoint& x, const SymbolicPoint& y, double T) const {
        const std::int64_t limit = to_ticks(T);
        double best = kInf;
        auto visit = [&](std::int64_t j, std::int64_t bottom) {
            const int sym = x.symbol(j);
            const std::int64_t u = std::min(y.height, roof_ticks(sym) - 1);
            const std::int64_t s = bottom + u;
            if (s < -limit || s > limit) return false;
            SymbolicPoint z = fiber_point(x, j);
            z.height = u;
            best = std::min(best, distance(z, y));
            return true;
        };
        std::int64_t bottom = -x.height;
        for (std::int64_t j = 0; bottom <= limit; ++j) {
            visit(j, bottom);
            bottom += roof_ticks(x.symbol(j));
        }
        bottom = -x.height;
        for (std::int64_t j = -1;; --j) {
            bottom -= roof_ticks(x.symbol(j));
            if (bottom + roof_ticks(x.symbol(j)) < -limit) break;
            visit(j, bottom);
        }
        return best;
    }

    /// Point at the bottom of fiber `index` of x's orbit.
    SymbolicPoint fiber_point(const SymbolicPoint& x, std::int64_t index) const {
        SymbolicPoint y = x;
        const std::int64_t p = x.period();
        y.origin = (((x.origin + index) % p) + p) % p;
        y.height = 0;
        return y;
    }

    /// Exact Birkhoff integral for potentials that do not depend on height.
    template <class Phi>
    double birkhoff(const Phi& phi, const SymbolicPoint& x, double t) const {
        double acc = 0.0;
        for_each_fiber(x, t, [&](std::int64_t index, double, double duration) {
            acc += phi(fiber_point(x, index)) * duration;
        });
        return acc;
    }

    double sequence_code(const SymbolicPoint& x) const {
        if (spec_.alphabet == 1) return 0.0;
        const double c = (1.0 - spec_.theta) / static_cast<double>(spec_.alphabet - 1);
        double acc = 0.0;
        for (std::int64_t i = 0; i < 40; ++i) acc += theta_pow_[static_cast<std::size_t>(i)] * x.symbol(i);
        return c * acc;
    }

    /// 1-Lipschitz coordinates: a code of the forward sequence, and the height.
    std::vector<double> features(const SymbolicPoint& x) const { return {sequence_code(x), x.height_value()}; }

    std::vector<double> hash_features(const SymbolicPoint& x, double t) const {
        if (t <= 0.0) return {sequence_code(x)};
        std::vector<double> f;
        f.reserve(4);
        for (int j = 0; j < 4; ++j) f.push_back(sequence_code(evolve(x, t * j / 4.0)));
        return f;
    }

    /// The current symbol as a function of s in [0, t): run symbols and the
    /// tick times where they change.  For δ < 1 two points within Bowen
    /// distance δ share it, since unequal current symbols are at distance ≥ 1.
    std::optional<std::uint64_t> separation_key(const SymbolicPoint& x, double t, double delta) const {
        if (!(delta < 1.0)) return std::nullopt;
        const std::int64_t total = to_ticks(t);
        int current = x.symbol(0);
        std::uint64_t h = mix_seed(0x6b43a9b5u, static_cast<std::uint64_t>(current));
        std::int64_t end = roof_ticks(current) - x.height;
        for (std::int64_t i = 1; end < total; ++i) {
            const int sym = x.symbol(i);
            if (sym != current) {
                h = mix_seed(mix_seed(h, static_cast<std::uint64_t>(end)), static_cast<std::uint64_t>(sym));
                current = sym;
            }
            end += roof_ticks(sym);
        }
        return h;
    }

    /// A point at distance at most about `scale` from x: either a symbol change
    /// far enough out that theta^|i| <= scale, or a height shift below scale.
    /// At scales of at least the diameter any point qualifies, and a random
    /// periodic point over the ambient alphabet is returned.
    SymbolicPoint perturb(const SymbolicPoint& x, double scale, Rng& rng) const {
        if (scale >= diameter() && spec_.alphabet > 1) {
            Word w(static_cast<std::size_t>(std::max<std::int64_t>(x.period(), 8)));
            for (auto& c : w) c = static_cast<std::uint8_t>(rng() % static_cast<std::uint64_t>(spec_.alphabet));
            SymbolicPoint y = make_periodic(std::move(w), 0);
            y.height = std::min<std::int64_t>(to_ticks(uniform01(rng) * roof(y.symbol(0))), roof_ticks(y.symbol(0)) - 1);
            return y;
        }
        const bool height_only = spec_.alphabet == 1 || uniform01(rng) < 0.25;
        if (height_only) {
            SymbolicPoint y = x;
            const std::int64_t r = roof_ticks(x.symbol(0));
            const std::int64_t shift = to_ticks((2.0 * uniform01(rng) - 1.0) * std::min(scale, 0.5 * min_roof_));
            y.height = std::clamp<std::int64_t>(x.height + shift, 0, r - 1);
            return y;
        }
        std::int64_t n0 = 0;
        while (n0 < 200 && std::pow(spec_.theta, static_cast<double>(n0)) > scale) ++n0;
        std::int64_t i = n0 + static_cast<std::int64_t>(rng() % 4);
        if (rng() & 1U) i = -i;
        const std::int64_t p = x.period();
        const std::int64_t need = 2 * std::abs(i) + 2;
        const std::int64_t newp = p * ((need + p - 1) / p);
        Word w = x.window(0, newp);
        const auto pos = static_cast<std::size_t>(((i % newp) + newp) % newp);
        const auto k = static_cast<std::uint64_t>(spec_.alphabet);
        w[pos] = static_cast<std::uint8_t>((w[pos] + 1 + rng() % (k - 1)) % k);
        SymbolicPoint y;
        y.word = std::make_shared<const Word>(std::move(w));
        y.origin = 0;
        y.height = x.height;
        return y;
    }

    /// A point of the Bowen ball B_t(x, eps): same height, and one symbol
    /// changed outside the window that the orbit segment reads at this scale.
    /// Returns x itself when eps <= theta^n for every n.
    SymbolicPoint bowen_ball_sample(const SymbolicPoint& x, double t, double eps, Rng& rng) const {
        std::int64_t n0 = 0;
        while (n0 < 200 && theta_pow(n0) >= eps) ++n0;
        if (n0 >= 200 || spec_.alphabet == 1) return x;
        std::int64_t visited = 0;
        for_each_fiber(x, t, [&](std::int64_t, double, double) { ++visited; });
        visited = std::max<std::int64_t>(visited, 1);
        const auto r = static_cast<std::int64_t>(rng() % 4);
        const std::int64_t i = (rng() & 1U) ? -n0 - r : visited - 1 + n0 + r;
        const std::int64_t p = x.period();
        const std::int64_t span = visited + 2 * (n0 + 4);
        const std::int64_t newp = p * ((span + p - 1) / p);
        // window starting at -(n0 + 4) so that index i lands inside it once
        const std::int64_t from = -(n0 + 4);
        Word w = x.window(from, newp);
        const auto pos = static_cast<std::size_t>(i - from);
        const auto k = static_cast<std::uint64_t>(spec_.alphabet);
        w[pos] = static_cast<std::uint8_t>((w[pos] + 1 + rng() % (k - 1)) % k);
        SymbolicPoint y = make_periodic(std::move(w), -from);
        y.height = x.height;
        return y;
    }

    /// Admissible words of length `len`; cyclic words also need last->first.
    std::vector<Word> enumerate_words(int len, bool cyclic) const {
        std::vector<Word> out;
        if (len <= 0) return out;
        Word cur;
        cur.reserve(static_cast<std::size_t>(len));
        enumerate_rec(cur, len, cyclic, out);
        return out;
    }

    /// Words needed to cover the fibers visited in [0, t) from height 0.
    int visited_length(double t) const {
        if (t <= 0.0) return 1;
        return std::max(1, static_cast<int>(std::ceil(t / min_roof_ - 1e-9)));
    }

    /// Candidate cloud for (Λ×R+)_t: for every admissible word of the visited
    /// length, the periodic point of Λ repeating that word followed by its
    /// shortest bridge back to the first symbol.
    std::vector<SymbolicPoint> lambda_cloud(double t) const {
        const int len = visited_length(t);
        if (len > kWordCap) throw Error(ErrorCode::InvalidArgument, "time exceeds the word-length cap");
        std::vector<SymbolicPoint> out;
        for (auto& w : enumerate_words(len, false)) {
            const Word& b = bridge(w.back(), w.front());
            w.insert(w.end(), b.begin(), b.end());
            out.push_back(make_periodic(std::move(w), 0));
        }
        return out;
    }

    /// Shortest word v (lexicographically first among those) such that a v b
    /// is admissible.
    const Word& bridge(int a, int b) const {
        return bridges_[static_cast<std::size_t>(a) * static_cast<std::size_t>(spec_.alphabet) + static_cast<std::size_t>(b)];
    }

    /// Candidate cloud for (O(U_w))_t, where U_w requires the symbols within
    /// distance w of the current one to form an admissible word.  Each point is
    /// an admissible core of length L + 2w surrounded by two free symbols.
    std::vector<SymbolicPoint> neighborhood_cloud(double t, int w) const {
        if (full_) return lambda_cloud(t);
        const int len = visited_length(t);
        const int core = len + 2 * w;
        if (core + 2 > kWordCap) throw Error(ErrorCode::InvalidArgument, "time exceeds the word-length cap");
        std::vector<SymbolicPoint> out;
        for (const auto& c : enumerate_words(core, false)) {
            for (int a = 0; a < spec_.alphabet; ++a) {
                for (int b = 0; b < spec_.alphabet; ++b) {
                    Word word;
                    word.reserve(static_cast<std::size_t>(core + 2));
                    word.push_back(static_cast<std::uint8_t>(a));
                    word.insert(word.end(), c.begin(), c.end());
                    word.push_back(static_cast<std::uint8_t>(b));
                    out.push_back(make_periodic(std::move(word), w + 1));
                }
            }
        }
        return out;
    }

    /// True iff symbols at indices [-radius, radius] form an admissible word.
    bool window_admissible(const SymbolicPoint& x, int radius) const {
        for (std::int64_t i = -radius; i < radius; ++i)
            if (!allowed(x.symbol(i), x.symbol(i + 1))) return false;
        return true;
    }

    Neighborhood<SymbolicPoint> window_neighborhood(int radius, NeighborhoodLabel label) const {
        Neighborhood<SymbolicPoint> n;
        n.kind = NeighborhoodKind::SymbolicCylinderUnion;
        n.label = label;
        n.contains = [this, radius](const SymbolicPoint& x) { return window_admissible(x, radius); };
        return n;
    }

    /// Exact membership in Λ: the periodic sequence is admissible everywhere.
    bool in_lambda(const SymbolicPoint& x) const { return admissible(*x.word, true); }

    Neighborhood<SymbolicPoint> lambda_neighborhood() const {
        Neighborhood<SymbolicPoint> n;
        n.kind = NeighborhoodKind::SymbolicCylinderUnion;
        n.label = NeighborhoodLabel::LambdaHull;
        n.contains = [this](const SymbolicPoint& x) { return in_lambda(x); };
        return n;
    }

    /// Window radii must satisfy u_radius <= u1_radius <= lambda_radius.
    NeighborhoodSet<SymbolicPoint> neighborhoods(int u_radius, int u1_radius, int lambda_radius) const {
        if (!(u_radius <= u1_radius && u1_radius <= lambda_radius))
            throw Error(ErrorCode::InvalidArgument, "window radii must be nested");
        return {window_neighborhood(u_radius, NeighborhoodLabel::U),
                window_neighborhood(u1_radius, NeighborhoodLabel::U1),
                window_neighborhood(lambda_radius, NeighborhoodLabel::LambdaHull)};
    }

    Potential<SymbolicPoint> first_symbol_potential(std::vector<double> values) const {
        if (values.size() != static_cast<std::size_t>(spec_.alphabet))
            throw Error(ErrorCode::InvalidArgument, "one potential value per symbol");
        Potential<SymbolicPoint> phi;
        phi.kind = PotentialKind::FirstSymbol;
        phi.symbol_values = values;
        phi.evaluator = [values](const SymbolicPoint& x) { return values[static_cast<std::size_t>(x.symbol(0))]; };
        for (double v : values) phi.sup_norm = std::max(phi.sup_norm, std::abs(v));
        phi.label = "first-symbol";
        return phi;
    }

    /// φ(x) = Σ_k c_k x_k over forward symbols; Hölder with exponent set by
    /// the decay of the coefficients.
    Potential<SymbolicPoint> holder_potential(std::vector<double> coeffs) const {
        Potential<SymbolicPoint> phi;
        phi.kind = PotentialKind::Holder;
        phi.evaluator = [coeffs](const SymbolicPoint& x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < coeffs.size(); ++k) acc += coeffs[k] * x.symbol(static_cast<std::int64_t>(k));
            return acc;
        };
        double bound = 0.0;
        for (double c : coeffs) bound += std::abs(c) * (spec_.alphabet - 1);
        phi.sup_norm = bound;
        phi.label = "holder";
        return phi;
    }

    SymbolicPoint make_periodic(Word w, std::int64_t origin) const {
        SymbolicPoint x;
        const auto p = static_cast<std::int64_t>(w.size());
        x.word = std::make_shared<const Word>(std::move(w));
        x.origin = ((origin % p) + p) % p;
        x.height = 0;
        return x;
    }

    double theta_pow(std::int64_t n) const {
        if (n < 0) return 0.0;
        if (n < static_cast<std::int64_t>(theta_pow_.size())) return theta_pow_[static_cast<std::size_t>(n)];
        return std::pow(spec_.theta, static_cast<double>(n));
    }

private:
    bool irreducible() const {
        const int k = spec_.alphabet;
        for (int s = 0; s < k; ++s) {
            std::vector<char> seen(static_cast<std::size_t>(k), 0);
            std::vector<int> stack{s};
            int reached_self = 0;
            while (!stack.empty()) {
                int a = stack.back();
                stack.pop_back();
                for (int b = 0; b < k; ++b) {
                    if (!allowed(a, b)) continue;
                    if (b == s) reached_self = 1;
                    if (!seen[static_cast<std::size_t>(b)]) {
                        seen[static_cast<std::size_t>(b)] = 1;
                        stack.push_back(b);
                    }
                }
            }
            if (!reached_self) return false;
            for (char c : seen)
                if (!c) return false;
        }
        return true;
    }

    void build_bridges() {
        const int k = spec_.alphabet;
        bridges_.resize(static_cast<std::size_t>(k * k));
        for (int a = 0; a < k; ++a) {
            // BFS over successors of a; parents give the path back
            std::vector<int> parent(static_cast<std::size_t>(k), -2);
            std::vector<int> frontier;
            for (int s = 0; s < k; ++s)
                if (allowed(a, s)) {
                    parent[static_cast<std::size_t>(s)] = -1;
                    frontier.push_back(s);
                }
            for (std::size_t head = 0; head < frontier.size(); ++head) {
                const int u = frontier[head];
                for (int v = 0; v < k; ++v)
                    if (allowed(u, v) && parent[static_cast<std::size_t>(v)] == -2) {
                        parent[static_cast<std::size_t>(v)] = u;
                        frontier.push_back(v);
                    }
            }
            for (int b = 0; b < k; ++b) {
                Word path;
                if (!allowed(a, b)) {
                    // walk back from a predecessor of b that is reachable from a
                    int best = -1;
                    std::size_t best_rank = frontier.size();
                    for (std::size_t r = 0; r < frontier.size(); ++r)
                        if (allowed(frontier[r], b) && r < best_rank) {
                            best = frontier[r];
                            best_rank = r;
                        }
                    for (int u = best; u >= 0; u = parent[static_cast<std::size_t>(u)])
                        path.push_back(static_cast<std::uint8_t>(u));
                    std::reverse(path.begin(), path.end());
                }
                bridges_[static_cast<std::size_t>(a * k + b)] = std::move(path);
            }
        }
    }

    void enumerate_rec(Word& cur, int len, bool cyclic, std::vector<Word>& out) const {
        if (static_cast<int>(cur.size()) == len) {
            if (!cyclic || allowed(cur.back(), cur.front())) out.push_back(cur);
            return;
        }
        for (int s = 0; s < spec_.alphabet; ++s) {
            if (!cur.empty() && !allowed(cur.back(), s)) continue;
            cur.push_back(static_cast<std::uint8_t>(s));
            enumerate_rec(cur, len, cyclic, out);
            cur.pop_back();
        }
    }

    static std::int64_t wrap(std::int64_t i, std::int64_t p) {
        std::int64_t k = i % p;
        return k < 0 ? k + p : k;
    }

    std::int64_t first_disagreement(const Word& a, std::int64_t oa, const Word& b, std::int64_t ob) const {
        const auto pa = static_cast<std::int64_t>(a.size());
        const auto pb = static_cast<std::int64_t>(b.size());
        const std::int64_t common = std::lcm(pa, pb);
        std::int64_t fa = oa, fb = ob;  // forward cursors
        std::int64_t ba = oa, bb = ob;  // backward cursors
        for (std::int64_t k = 0; k < common; ++k) {
            if (a[static_cast<std::size_t>(fa)] != b[static_cast<std::size_t>(fb)]) return k;
            if (a[static_cast<std::size_t>(ba)] != b[static_cast<std::size_t>(bb)]) return k;
            fa = fa + 1 == pa ? 0 : fa + 1;
            fb = fb + 1 == pb ? 0 : fb + 1;
            ba = ba == 0 ? pa - 1 : ba - 1;
            bb = bb == 0 ? pb - 1 : bb - 1;
        }
        return -1;
    }

    double distance_raw(const Word& a, std::int64_t oa, std::int64_t ha, const Word& b, std::int64_t ob,
                        std::int64_t hb) const {
        const std::int64_t n = first_disagreement(a, oa, b, ob);
        return theta_pow(n) + std::abs(from_ticks(ha - hb));
    }

    double bowen_walk(const SymbolicPoint& x, const SymbolicPoint& y, double t, double bound) const {
        const Word& a = *x.word;
        const Word& b = *y.word;
        const auto pa = static_cast<std::int64_t>(a.size());
        const auto pb = static_cast<std::int64_t>(b.size());
        std::int64_t oa = x.origin, ob = y.origin, ha = x.height, hb = y.height;
        double best = distance_raw(a, oa, ha, b, ob, hb);
        std::int64_t remaining = to_ticks(t);
        while (remaining > 0 && best <= bound) {
            const std::int64_t ra = roof_ticks(a[static_cast<std::size_t>(oa)]) - ha;
            const std::int64_t rb = roof_ticks(b[static_cast<std::size_t>(ob)]) - hb;
            const std::int64_t step = std::min(ra, rb);
            if (step >= remaining) break;  // no crossing inside [0, t)
            ha += step;
            hb += step;
            remaining -= step;
            if (ha == roof_ticks(a[static_cast<std::size_t>(oa)])) {
                ha = 0;
                oa = oa + 1 == pa ? 0 : oa + 1;
            }
            if (hb == roof_ticks(b[static_cast<std::size_t>(ob)])) {
                hb = 0;
                ob = ob + 1 == pb ? 0 : ob + 1;
            }
            best = std::max(best, distance_raw(a, oa, ha, b, ob, hb));
        }
        return best;
    }

    SuspensionSpec spec_;
    std::vector<std::int64_t> roof_ticks_;
    std::vector<double> theta_pow_;
    std::vector<Word> bridges_;
    double min_roof_ = 1.0;
    double max_roof_ = 1.0;
    bool full_ = false;
};

static_assert(FlowBackend<SuspensionFlow>);

}  // namespace thermoflow
