#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pivotwalk/models.hpp"
#include "pivotwalk/words.hpp"

namespace pw {

struct SchottkyParams {
    double K = 0;
    double Kprime = 0;
    std::vector<Word> set;
    // Search provenance: pattern index (bit j set means the j-th factor is b)
    // and the common power; empty for hand-built sets.
    std::vector<std::uint32_t> patterns;
    long long power = 0;
    int pattern_length = 0;
};

template <class P>
struct Probe {
    P x;
    P y;
};

struct Offender {
    std::size_t probe = 0;
    int condition = 0;  // 1: positive powers, 2: negative powers, 3: displacement, 4: single-orbit
    std::size_t count = 0;
    std::vector<std::size_t> elements;
};

struct VerificationReport {
    bool pass = false;
    std::size_t max_count_positive = 0;
    std::size_t max_count_negative = 0;
    // Same counts with y replaced by o; the strengthened property wants <= 1.
    std::size_t max_single_orbit = 0;
    bool single_orbit_ok = false;
    bool displacement_ok = false;
    double min_displacement = 0;
    std::size_t probes = 0;
    int power_cap = 0;
    // Exact for the tree, "sampled" otherwise.
    std::string evidence;
    bool certificate = false;
    std::string certificate_detail;
    std::vector<Offender> offenders;
};

inline constexpr int kDefaultPowerCap = 64;

// Counting conditions over the probes plus displacement for 1 <= |i| <= power_cap.
VerificationReport verify_schottky(const SchottkyParams& params, const std::vector<Probe<Word>>& probes,
                                   int power_cap = kDefaultPowerCap);
VerificationReport verify_schottky(const SchottkyParams& params, const std::vector<Moebius>& set,
                                   const std::vector<Probe<Plane>>& probes, int power_cap = kDefaultPowerCap);

// (x, s^i y)_o on the tree, exact. Fast path for cyclically reduced s.
std::uint64_t power_product(const Word& x, const Word& s, long long i, const Word& y);

// Tree certificate: every element cyclically reduced, of length >= 2K, and
// the forward rays s^{+inf} (and backward rays s^{-inf}) of distinct elements
// share fewer than K letters. It implies both counting conditions for all x, y.
struct Certificate {
    bool ok = false;
    std::string detail;
};
Certificate tree_certificate(const std::vector<Word>& set, double K);

// Letters shared by the rays u^{+inf} and v^{+inf}, capped at |u| + |v|.
std::size_t ray_overlap(const Word& u, const Word& v);

// Structured probe family: short orbit points, high powers of set elements and
// mixed products, all drawn from the given seed.
std::vector<Probe<Word>> tree_probes(const SchottkyParams& params, std::uint64_t seed, std::size_t count,
                                     int power_cap = kDefaultPowerCap);

struct SearchResult {
    SchottkyParams params;
    VerificationReport report;
};

// Pattern search on the tree: products of pattern_length factors from {a, b},
// raised to a common power so every element has length >= max(Kprime, 2K).
SearchResult search_schottky(const Word& a, const Word& b, std::size_t target_size, double Kprime,
                             std::uint64_t probe_seed, int pattern_length = 10, std::size_t probe_count = 256,
                             int max_escalations = 4);

// K of the pattern search: the longest product of pattern_length factors.
double pattern_constant(const Word& a, const Word& b, int pattern_length = 10);

SchottkyParams schottky_subset(const SchottkyParams& params, std::size_t size);

}  // namespace pw
