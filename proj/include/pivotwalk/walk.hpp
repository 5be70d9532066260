#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <type_traits>
#include <stdexcept>
#include <vector>

#include "pivotwalk/arena.hpp"
#include "pivotwalk/models.hpp"
#include "pivotwalk/rng.hpp"

namespace pw {

inline double displacement(const Word& g) { return static_cast<double>(g.length()); }
inline double displacement(const Moebius& g) { return plane_distance(kPlaneBase, g.apply(kPlaneBase)); }
inline double tau(const Word& g) { return static_cast<double>(translation_length(g)); }
inline double tau(const Moebius& g) { return translation_length(g); }

// Finite probability measure on group elements.
template <class E>
class StepDistribution {
public:
    StepDistribution() = default;
    StepDistribution(std::vector<E> support, std::vector<double> weights)
        : support_(std::move(support)), weights_(std::move(weights)) {
        if (support_.empty()) throw std::invalid_argument("empty support");
        if (support_.size() != weights_.size()) throw std::invalid_argument("support and weights differ in size");
        double total = 0;
        for (double w : weights_) {
            if (!(w > 0)) throw std::invalid_argument("weights must be positive");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("weights must sum to 1");
        for (std::size_t i = 0; i < support_.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (same(support_[i], support_[j])) throw std::invalid_argument("support elements must be distinct");
        uniform_ = true;
        for (double w : weights_) uniform_ = uniform_ && w == weights_[0];
        cumulative_.resize(weights_.size());
        double acc = 0;
        for (std::size_t i = 0; i < weights_.size(); ++i) cumulative_[i] = (acc += weights_[i]);
        cumulative_.back() = 1.0;
    }

    static StepDistribution uniform(std::vector<E> support) {
        std::size_t n = support.size();
        return StepDistribution(std::move(support), std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    const std::vector<E>& support() const { return support_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return support_.size(); }
    bool is_uniform() const { return uniform_; }

    std::size_t sample(Rng& rng) const {
        if (uniform_) return static_cast<std::size_t>(rng.below(support_.size()));
        double u = rng.uniform();
        std::size_t lo = 0, hi = cumulative_.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (u < cumulative_[mid]) hi = mid;
            else lo = mid + 1;
        }
        return lo;
    }

    // Index of g in the support, if present.
    std::optional<std::size_t> find(const E& g) const {
        for (std::size_t i = 0; i < support_.size(); ++i)
            if (same(support_[i], g)) return i;
        return std::nullopt;
    }

private:
    static bool same(const Word& x, const Word& y) { return x == y; }
    static bool same(const Moebius& x, const Moebius& y) {
        // g and -g are the same isometry.
        auto close = [](const Moebius& p, const Moebius& q) {
            return std::abs(p.a - q.a) + std::abs(p.b - q.b) + std::abs(p.c - q.c) + std::abs(p.d - q.d) <= 1e-12;
        };
        return close(x, y) || close(x, Moebius{-y.a, -y.b, -y.c, -y.d});
    }

    std::vector<E> support_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    bool uniform_ = false;
};

using WordDistribution = StepDistribution<Word>;

template <class E>
double pth_moment(const StepDistribution<E>& mu, double p) {
    if (!(p > 0)) throw std::invalid_argument("p must be positive");
    double s = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weights()[i] * std::pow(displacement(mu.support()[i]), p);
    return s;
}

template <class E>
double exponential_moment(const StepDistribution<E>& mu, double K) {
    if (!(K > 0)) throw std::invalid_argument("K must be positive");
    double s = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weights()[i] * std::exp(K * displacement(mu.support()[i]));
    return s;
}

template <class E>
struct ElementPair {
    bool found = false;
    E g{}, h{};
    int depth = 0;
};

// Products of 1..depth support elements, level by level.
// Duplicates are dropped for words; the enumeration stops at cap elements.
std::vector<std::vector<Word>> semigroup_levels(const std::vector<Word>& gens, int depth, std::size_t cap);
std::vector<std::vector<Moebius>> semigroup_levels(const std::vector<Moebius>& gens, int depth, std::size_t cap);

inline bool loxodromic(const Word& g) { return classify_isometry(g) == IsometryKind::loxodromic; }
inline bool loxodromic(const Moebius& g) { return classify_isometry(g) == IsometryKind::loxodromic; }

// Breadth-first search of the semigroup generated by the support for an
// independent loxodromic pair. A negative answer only means none was found.
template <class E>
ElementPair<E> is_non_elementary(const StepDistribution<E>& mu, int search_depth, std::size_t cap = 20000) {
    ElementPair<E> r;
    std::vector<E> lox;
    auto levels = semigroup_levels(mu.support(), search_depth, cap);
    for (std::size_t d = 0; d < levels.size(); ++d) {
        for (const E& g : levels[d]) {
            if (!loxodromic(g)) continue;
            for (const E& h : lox)
                if (are_independent(g, h)) {
                    r.found = true;
                    r.g = h;
                    r.h = g;
                    r.depth = static_cast<int>(d) + 1;
                    return r;
                }
            lox.push_back(g);
        }
    }
    return r;
}

template <class E>
struct ArithmeticReport {
    bool found = false;
    int N = 0;
    E g{}, h{};
    // per_depth[N-1]: whether the N-fold products show two translation lengths.
    std::vector<bool> per_depth;
};

template <class E>
ArithmeticReport<E> is_non_arithmetic(const StepDistribution<E>& mu, int search_depth, std::size_t cap = 20000) {
    ArithmeticReport<E> r;
    std::vector<E> level = mu.support();
    for (int N = 1; N <= search_depth; ++N) {
        if (N > 1) {
            std::vector<E> next;
            for (const E& x : level) {
                for (const E& s : mu.support()) {
                    next.push_back(x * s);
                    if (next.size() >= cap) break;
                }
                if (next.size() >= cap) break;
            }
            if constexpr (std::is_same_v<E, Word>) {
                std::set<Word> uniq(next.begin(), next.end());
                next.assign(uniq.begin(), uniq.end());
            }
            level = std::move(next);
        }
        bool distinct = false;
        for (std::size_t i = 1; i < level.size() && !distinct; ++i) {
            if (std::abs(tau(level[i]) - tau(level[0])) > 1e-9) {
                distinct = true;
                if (!r.found) {
                    r.found = true;
                    r.N = N;
                    r.g = level[0];
                    r.h = level[i];
                }
            }
        }
        r.per_depth.push_back(distinct);
    }
    return r;
}

enum class AlphaMode { exact, mixture };

// Block law of 6N consecutive steps written as alpha * eta + (1 - alpha) * nu,
// with eta uniform over a^2 c^2 b^2 (a, b in S) spelled in base letters.
//
// exact: alpha is the largest value with alpha * eta <= mu^{6N} and nu is the
// normalized remainder, so single steps are exactly mu-distributed.
// mixture: alpha is given and nu = mu^{6N}; the block law is then a mixture
// that no longer has mu^{6N} as its law.
class DecomposedModel {
public:
    DecomposedModel(WordDistribution base, int N, std::vector<Word> S, Word c, AlphaMode mode,
                    double mixture_alpha = 0.0);

    // Model for the backward walk: steps g^-1, choices from S^-1 and c^-1.
    DecomposedModel reversed() const;

    const WordDistribution& base() const { return base_; }
    int N() const { return N_; }
    int block_length() const { return 6 * N_; }
    const std::vector<Word>& S() const { return S_; }
    const Word& c() const { return c_; }
    AlphaMode mode() const { return mode_; }
    long double alpha() const { return alpha_; }
    double log_alpha() const { return log_alpha_; }

    // Base-support indices spelling s in S (index i) or c.
    const std::vector<std::uint32_t>& spelling(std::size_t i) const { return spell_S_[i]; }
    const std::vector<std::uint32_t>& spelling_c() const { return spell_c_; }

    // Fills 6N base indices for a block. Returns true on a Schottky block,
    // with the chosen S indices in a and b.
    bool sample_block(Rng& rng, std::vector<std::uint32_t>& out, std::uint32_t& a, std::uint32_t& b) const;
    void schottky_block(std::uint32_t a, std::uint32_t b, std::vector<std::uint32_t>& out) const;
    void nu_block(Rng& rng, std::vector<std::uint32_t>& out) const;

    // min over eta-atoms t of log(mu^{6N}(t) / (alpha eta(t))); nonnegative
    // iff the decomposition is a valid split of mu^{6N}, zero when alpha is maximal.
    double decomposition_slack_log() const;
    // log of mu^{6N}(t) for the Schottky atom (a, c, b).
    double log_atom_mass(std::uint32_t a, std::uint32_t b) const;

private:
    std::vector<std::uint32_t> spell(const Word& s) const;
    // Probability that t drawn from mu^{6N} is kept as a nu draw.
    long double keep_probability(const std::vector<std::uint32_t>& t) const;

    WordDistribution base_;
    int N_;
    std::vector<Word> S_;
    Word c_;
    AlphaMode mode_;
    long double alpha_ = 0;
    double log_alpha_ = 0;
    std::vector<std::vector<std::uint32_t>> spell_S_;
    std::vector<std::uint32_t> spell_c_;
    std::vector<double> log_m_S_;
    double log_m_c_ = 0;
    std::vector<double> log_w_;
    // spelling of N letters -> S index, for recognizing eta atoms.
    std::vector<std::pair<std::vector<std::uint32_t>, std::uint32_t>> spell_lookup_;
};

// Sample path of the decomposed model with its block bookkeeping.
struct Trajectory {
    std::shared_ptr<TreeArena> arena;
    std::shared_ptr<const DecomposedModel> model;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<int> token_of;            // base index -> arena token
    std::vector<std::uint32_t> steps;     // base index of g_k, k = 1..n
    std::vector<TreeArena::Node> pos;     // pos[k] = omega_k o, pos[0] = o
    std::vector<std::uint8_t> rho;        // rho_k for full blocks k = 1..
    std::vector<std::uint32_t> a, b;      // choices of the i-th success, i = 1..
    std::vector<std::uint32_t> T;         // T[i-1]: block index of the i-th success
    std::vector<std::uint32_t> B;         // B[k]: successes among blocks 1..k

    std::size_t n() const { return steps.size(); }
    std::size_t full_blocks() const { return rho.size(); }
    std::size_t successes() const { return T.size(); }
    // Walk time at which block k starts (k = 1 starts at 0).
    std::size_t block_start(std::size_t k) const {
        return static_cast<std::size_t>(model->block_length()) * (k - 1);
    }
    Word word(std::size_t k) const { return arena->word(pos[k]); }
    // Writes the path from step `from` onward again, after steps were edited.
    void rematerialize(std::size_t from);
};

// Per-block forcing for tests: -1 draws rho, 0 or 1 fixes it.
struct SampleOverrides {
    std::vector<int> rho;
};

std::vector<int> register_tokens(TreeArena& arena, const WordDistribution& mu);

Trajectory sample_trajectory(std::shared_ptr<const DecomposedModel> model, std::size_t n, std::uint64_t seed,
                             std::uint64_t stream = 1, std::shared_ptr<TreeArena> arena = nullptr,
                             const SampleOverrides* overrides = nullptr);

struct Bidirectional {
    Trajectory backward;
    Trajectory forward;
};
// Forward uses stream 1, backward stream 2, both in one arena.
Bidirectional sample_bidirectional(std::shared_ptr<const DecomposedModel> model,
                                   std::shared_ptr<const DecomposedModel> backward_model, std::size_t n,
                                   std::uint64_t seed);

// Plain i.i.d. walk of mu in an arena; returns positions 0..n.
std::vector<TreeArena::Node> sample_path(TreeArena& arena, const std::vector<int>& tokens, const WordDistribution& mu,
                                         std::size_t n, Rng& rng);

// Reduced word kept as a stack of runs (letter, multiplicity); suited to
// steps like a^k with very large k.
class RunWord {
public:
    void push(int letter, std::uint64_t count);
    void push(const Word& w);
    std::uint64_t length() const { return length_; }
    std::uint64_t cyclic_length() const;
    const std::vector<std::pair<int, std::uint64_t>>& runs() const { return runs_; }

private:
    std::vector<std::pair<int, std::uint64_t>> runs_;
    std::uint64_t length_ = 0;
};


}  // namespace pw
