#include "pivotwalk/schottky.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pivotwalk/rng.hpp"

namespace pw {

namespace {

// Common prefix of w[from:] and the periodic ray p p p ...
std::size_t lcp_ray(const std::vector<int>& w, std::size_t from, const std::vector<int>& p) {
    std::size_t k = 0, n = p.size();
    while (from + k < w.size() && w[from + k] == p[k % n]) ++k;
    return k;
}

std::size_t lcp_from(const std::vector<int>& x, std::size_t xi, const std::vector<int>& y, std::size_t yi) {
    std::size_t k = 0;
    while (xi + k < x.size() && yi + k < y.size() && x[xi + k] == y[yi + k]) ++k;
    return k;
}

// Cached per (probe, element) data for the fast path.
struct RayData {
    std::size_t fx;  // lcp(x, s^{+inf})
    std::size_t cy;  // lcp(y, s^{-inf})
};

std::uint64_t fast_power_product(const std::vector<int>& x, const std::vector<int>& y, std::size_t P,
                                 long long i, const RayData& r) {
    std::size_t Pi = P * static_cast<std::size_t>(i);
    std::size_t c = std::min(r.cy, Pi);
    std::size_t m = Pi - c;
    if (m > 0) {
        if (r.fx < m) return r.fx;
        return m + lcp_from(x, m, y, c);
    }
    return lcp_from(x, 0, y, c);
}

}  // namespace

std::uint64_t power_product(const Word& x, const Word& s, long long i, const Word& y) {
    if (i == 0) return common_prefix(x, y);
    Word t = i > 0 ? s : s.inverse();
    long long k = i > 0 ? i : -i;
    if (!t.empty() && t.cyclically_reduced()) {
        Word tinv = t.inverse();
        RayData r{lcp_ray(x.letters(), 0, t.letters()), lcp_ray(y.letters(), 0, tinv.letters())};
        return fast_power_product(x.letters(), y.letters(), t.length(), k, r);
    }
    return common_prefix(x, t.pow(k) * y);
}

std::size_t ray_overlap(const Word& u, const Word& v) {
    std::size_t cap = u.length() + v.length(), k = 0;
    if (u.empty() || v.empty()) return 0;
    while (k < cap && u[k % u.length()] == v[k % v.length()]) ++k;
    return k;
}

Certificate tree_certificate(const std::vector<Word>& set, double K) {
    Certificate c;
    std::vector<Word> inv;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Word& s = set[i];
        if (s.empty() || !s.cyclically_reduced()) {
            c.detail = "element " + std::to_string(i) + " is not cyclically reduced";
            return c;
        }
        if (static_cast<double>(s.length()) < 2 * K) {
            c.detail = "element " + std::to_string(i) + " is shorter than 2K";
            return c;
        }
        inv.push_back(s.inverse());
    }
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = i + 1; j < set.size(); ++j) {
            if (static_cast<double>(ray_overlap(set[i], set[j])) >= K) {
                c.detail = "forward rays of " + std::to_string(i) + " and " + std::to_string(j) + " share K letters";
                return c;
            }
            if (static_cast<double>(ray_overlap(inv[i], inv[j])) >= K) {
                c.detail = "backward rays of " + std::to_string(i) + " and " + std::to_string(j) + " share K letters";
                return c;
            }
        }
    c.ok = true;
    c.detail = "pairwise ray overlaps below K";
    return c;
}

namespace {

// Elements s with (x, s^i y)_o >= K for some 0 < sign*i <= cap.
std::vector<std::size_t> heavy_elements(const std::vector<Word>& set, const std::vector<Word>& inv, const Word& x,
                                        const Word& y, double K, int sign, int cap) {
    std::vector<std::size_t> hits;
    for (std::size_t e = 0; e < set.size(); ++e) {
        const Word& t = sign > 0 ? set[e] : inv[e];
        const Word& tinv = sign > 0 ? inv[e] : set[e];
        bool hit = false;
        if (t.cyclically_reduced()) {
            RayData r{lcp_ray(x.letters(), 0, t.letters()), lcp_ray(y.letters(), 0, tinv.letters())};
            const std::size_t P = t.length();
            for (long long i = 1; i <= cap && !hit; ++i) {
                if (static_cast<double>(fast_power_product(x.letters(), y.letters(), P, i, r)) >= K) hit = true;
                // Past this point the product no longer changes with i.
                if (P * static_cast<std::size_t>(i) > x.length() + r.cy) break;
            }
        } else {
            Word acc = y;
            for (long long i = 1; i <= cap && !hit; ++i) {
                acc = t * acc;
                if (static_cast<double>(common_prefix(x, acc)) >= K) hit = true;
                if (static_cast<std::size_t>(i) * translation_length(t) > x.length() + y.length() + 2 * t.length())
                    break;
            }
        }
        if (hit) hits.push_back(e);
    }
    return hits;
}

void record(VerificationReport& rep, std::size_t probe, int cond, const std::vector<std::size_t>& hits) {
    if (rep.offenders.size() < 32) rep.offenders.push_back({probe, cond, hits.size(), hits});
}

}  // namespace

VerificationReport verify_schottky(const SchottkyParams& params, const std::vector<Probe<Word>>& probes,
                                   int power_cap) {
    if (probes.empty()) throw std::invalid_argument("no probes");
    if (power_cap < 1) throw std::invalid_argument("power_cap must be at least 1");
    VerificationReport rep;
    rep.probes = probes.size();
    rep.power_cap = power_cap;
    rep.evidence = "exact";
    const auto& set = params.set;
    std::vector<Word> inv;
    for (const Word& s : set) inv.push_back(s.inverse());

    rep.displacement_ok = true;
    rep.min_displacement = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < set.size(); ++e) {
        // |s^i| is smallest at |i| = 1 whenever s is nontrivial.
        double d = set[e].empty() ? 0.0 : static_cast<double>(set[e].length());
        rep.min_displacement = std::min(rep.min_displacement, d);
        if (d < params.Kprime) {
            rep.displacement_ok = false;
            record(rep, 0, 3, {e});
        }
    }

    const int rank = set.empty() ? 2 : set.front().rank();
    const Word o(rank);
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const auto& pr = probes[p];
        auto pos = heavy_elements(set, inv, pr.x, pr.y, params.K, +1, power_cap);
        auto neg = heavy_elements(set, inv, pr.x, pr.y, params.K, -1, power_cap);
        rep.max_count_positive = std::max(rep.max_count_positive, pos.size());
        rep.max_count_negative = std::max(rep.max_count_negative, neg.size());
        if (pos.size() > 2) record(rep, p, 1, pos);
        if (neg.size() > 2) record(rep, p, 2, neg);
        auto so_pos = heavy_elements(set, inv, pr.x, o, params.K, +1, power_cap);
        auto so_neg = heavy_elements(set, inv, pr.x, o, params.K, -1, power_cap);
        std::size_t so = std::max(so_pos.size(), so_neg.size());
        rep.max_single_orbit = std::max(rep.max_single_orbit, so);
        if (so > 1) record(rep, p, 4, so_pos.size() > 1 ? so_pos : so_neg);
    }
    rep.single_orbit_ok = rep.max_single_orbit <= 1;
    auto cert = tree_certificate(set, params.K);
    rep.certificate = cert.ok;
    rep.certificate_detail = cert.detail;
    rep.pass = rep.displacement_ok && rep.max_count_positive <= 2 && rep.max_count_negative <= 2;
    return rep;
}

VerificationReport verify_schottky(const SchottkyParams& params, const std::vector<Moebius>& set,
                                   const std::vector<Probe<Plane>>& probes, int power_cap) {
    if (probes.empty()) throw std::invalid_argument("no probes");
    if (power_cap < 1) throw std::invalid_argument("power_cap must be at least 1");
    VerificationReport rep;
    rep.probes = probes.size();
    rep.power_cap = power_cap;
    rep.evidence = "sampled";
    rep.certificate_detail = "no certificate on the plane";
    const Plane o = kPlaneBase;
    PlaneSpace space;
    auto product = [&](Plane x, Plane z) {
        return 0.5 * (space.dist(o, x) + space.dist(o, z) - space.dist(x, z));
    };
    rep.displacement_ok = true;
    rep.min_displacement = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < set.size(); ++e) {
        Moebius acc = Moebius::identity(), accinv = Moebius::identity();
        for (int i = 1; i <= power_cap; ++i) {
            acc = acc * set[e];
            accinv = accinv * set[e].inverse();
            double d = std::min(space.dist(o, acc.apply(o)), space.dist(o, accinv.apply(o)));
            if (!std::isfinite(d)) break;
            rep.min_displacement = std::min(rep.min_displacement, d);
            if (d < params.Kprime) {
                rep.displacement_ok = false;
                record(rep, 0, 3, {e});
                break;
            }
        }
    }
    auto heavy = [&](Plane x, Plane y, int sign) {
        std::vector<std::size_t> hits;
        for (std::size_t e = 0; e < set.size(); ++e) {
            Moebius t = sign > 0 ? set[e] : set[e].inverse();
            Plane z = y;
            for (int i = 1; i <= power_cap; ++i) {
                z = t.apply(z);
                if (!(z.imag() > 0) || !std::isfinite(z.real())) break;
                if (product(x, z) >= params.K) {
                    hits.push_back(e);
                    break;
                }
            }
        }
        return hits;
    };
    for (std::size_t p = 0; p < probes.size(); ++p) {
        auto pos = heavy(probes[p].x, probes[p].y, +1);
        auto neg = heavy(probes[p].x, probes[p].y, -1);
        rep.max_count_positive = std::max(rep.max_count_positive, pos.size());
        rep.max_count_negative = std::max(rep.max_count_negative, neg.size());
        if (pos.size() > 2) record(rep, p, 1, pos);
        if (neg.size() > 2) record(rep, p, 2, neg);
        auto so_pos = heavy(probes[p].x, o, +1);
        auto so_neg = heavy(probes[p].x, o, -1);
        std::size_t so = std::max(so_pos.size(), so_neg.size());
        rep.max_single_orbit = std::max(rep.max_single_orbit, so);
        if (so > 1) record(rep, p, 4, so_pos.size() > 1 ? so_pos : so_neg);
    }
    rep.single_orbit_ok = rep.max_single_orbit <= 1;
    rep.pass = rep.displacement_ok && rep.max_count_positive <= 2 && rep.max_count_negative <= 2;
    return rep;
}

std::vector<Probe<Word>> tree_probes(const SchottkyParams& params, std::uint64_t seed, std::size_t count,
                                     int power_cap) {
    const auto& set = params.set;
    const int rank = set.empty() ? 2 : set.front().rank();
    Rng rng(seed, 0x5c077c7, 0);
    auto ball = [&](int radius) {
        std::vector<int> letters;
        auto len = static_cast<int>(rng.below(static_cast<std::uint64_t>(radius) + 1));
        while (static_cast<int>(letters.size()) < len) {
            int l = static_cast<int>(rng.below(static_cast<std::uint64_t>(rank))) + 1;
            if (rng.below(2)) l = -l;
            if (!letters.empty() && letters.back() == -l) continue;
            letters.push_back(l);
        }
        return Word(rank, letters);
    };
    auto pick = [&]() -> const Word& { return set[rng.below(set.size())]; };
    auto power = [&]() {
        static const long long exps[] = {1, 2, 3, -1, -2, -3};
        long long e = rng.below(4) == 0 ? (rng.below(2) ? power_cap : -power_cap) : exps[rng.below(6)];
        return pick().pow(e);
    };
    std::vector<Probe<Word>> probes;
    probes.push_back({Word(rank), Word(rank)});
    if (!set.empty()) {
        Word s = set.front().pow(power_cap);
        probes.push_back({s, s});
        probes.push_back({s, s.inverse()});
    }
    while (probes.size() < count) {
        switch (rng.below(set.empty() ? 1 : 5)) {
            case 0: probes.push_back({ball(6), ball(6)}); break;
            case 1: probes.push_back({power(), ball(6)}); break;
            case 2: probes.push_back({ball(6), power()}); break;
            case 3: probes.push_back({power(), power()}); break;
            default: {
                // Mixed products such as s t^-1 w.
                Word x = pick() * pick().inverse() * ball(4);
                Word y = pick().inverse() * ball(4);
                probes.push_back({x, y});
            }
        }
    }
    return probes;
}

SearchResult search_schottky(const Word& a, const Word& b, std::size_t target_size, double Kprime,
                             std::uint64_t probe_seed, int pattern_length, std::size_t probe_count,
                             int max_escalations) {
    if (a == b) throw std::invalid_argument("a and b must be distinct");
    if (!are_independent(a, b)) throw std::invalid_argument("a and b must be independent loxodromics");
    if (pattern_length < 1 || pattern_length > 20) throw std::invalid_argument("pattern length out of range");
    if (target_size < 2) throw std::invalid_argument("target size must be at least 2");
    const std::uint32_t count = 1u << pattern_length;
    std::vector<Word> patterns;
    patterns.reserve(count);
    for (std::uint32_t p = 0; p < count; ++p) {
        Word g(a.rank());
        for (int j = 0; j < pattern_length; ++j) g *= ((p >> (pattern_length - 1 - j)) & 1u) ? b : a;
        patterns.push_back(g);
    }
    double K = 0;
    for (const Word& g : patterns) K = std::max(K, static_cast<double>(g.length()));

    // Smallest common power putting every element at length >= max(K', 2K).
    const double need = std::max(Kprime, 2 * K);
    long long power = 1;
    for (const Word& g : patterns) {
        auto tl = translation_length(g);
        if (tl == 0) continue;
        long long i = 1;
        while (static_cast<double>(g.pow(i).length()) < need) ++i;
        power = std::max(power, i);
    }

    for (int attempt = 0; attempt <= max_escalations; ++attempt, power *= 2) {
        SchottkyParams params;
        params.K = K;
        params.Kprime = Kprime;
        params.power = power;
        params.pattern_length = pattern_length;
        // Greedy in pattern order, keeping the exact certificate valid.
        std::vector<Word> inv;
        for (std::uint32_t p = 0; p < count && params.set.size() < target_size; ++p) {
            Word s = patterns[p].pow(power);
            if (s.empty() || !s.cyclically_reduced() || static_cast<double>(s.length()) < need) continue;
            Word si = s.inverse();
            bool ok = true;
            for (std::size_t j = 0; j < params.set.size() && ok; ++j)
                ok = static_cast<double>(ray_overlap(s, params.set[j])) < K &&
                     static_cast<double>(ray_overlap(si, inv[j])) < K;
            if (!ok) continue;
            params.set.push_back(std::move(s));
            inv.push_back(std::move(si));
            params.patterns.push_back(p);
        }
        if (params.set.size() < target_size) continue;
        auto probes = tree_probes(params, probe_seed, probe_count);
        auto rep = verify_schottky(params, probes);
        if (rep.pass && rep.certificate) return {std::move(params), std::move(rep)};
    }
    throw std::runtime_error("schottky search exhausted");
}

double pattern_constant(const Word& a, const Word& b, int pattern_length) {
    if (pattern_length < 1 || pattern_length > 20) throw std::invalid_argument("pattern length out of range");
    double K = 0;
    for (std::uint32_t p = 0; p < (1u << pattern_length); ++p) {
        Word g(a.rank());
        for (int j = 0; j < pattern_length; ++j) g *= ((p >> (pattern_length - 1 - j)) & 1u) ? b : a;
        K = std::max(K, static_cast<double>(g.length()));
    }
    return K;
}

SchottkyParams schottky_subset(const SchottkyParams& params, std::size_t size) {
    if (size == 0) throw std::invalid_argument("subset size must be positive");
    if (size > params.set.size()) throw std::invalid_argument("subset larger than the set");
    std::vector<std::size_t> idx(params.set.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return params.set[i] < params.set[j]; });
    SchottkyParams out = params;
    out.set.clear();
    out.patterns.clear();
    for (std::size_t k = 0; k < size; ++k) {
        out.set.push_back(params.set[idx[k]]);
        if (!params.patterns.empty()) out.patterns.push_back(params.patterns[idx[k]]);
    }
    return out;
}

}  // namespace pw
