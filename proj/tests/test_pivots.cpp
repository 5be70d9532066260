#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pivotwalk/pivots.hpp"
#include "pivotwalk/rng.hpp"

using namespace pw;

namespace {

const PivotModel& model() {
    static PivotModel m = build_pivot_model(PivotModelConfig{});
    return m;
}

using Seg = Segment<Node>;

// Exhaustive criterion (2): all subsets of P with at least two elements,
// head-marking checked by the geometry predicate.
std::vector<std::uint32_t> brute_chain(const std::vector<std::uint32_t>& P, const std::vector<Loci>& loci, Node Y,
                                       const GromovConstants& c, const TreeArena& arena) {
    ArenaSpace sp(arena);
    std::vector<std::uint32_t> best;
    const std::size_t m = P.size();
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        if (__builtin_popcount(mask) < 2) continue;
        std::vector<std::uint32_t> ch;
        for (std::size_t k = 0; k < m; ++k)
            if (mask >> k & 1u) ch.push_back(P[k]);
        std::vector<Seg> gammas, etas;
        const Loci& f = loci[ch[0] - 1];
        gammas.push_back({f.y0p, f.y2p});
        for (std::size_t k = 1; k < ch.size(); ++k) {
            const Loci& L = loci[ch[k] - 1];
            gammas.push_back({L.y1m, L.y0m});
            etas.push_back({L.y2m, L.y1m});
        }
        if (!is_head_marked(sp, Seg{f.y0p, Y}, gammas, etas, c.C0, c.D0)) continue;
        bool take = best.empty() || ch[0] > best[0] ||
                    (ch[0] == best[0] && (ch.size() > best.size() || (ch.size() == best.size() && ch > best)));
        if (take) best = ch;
    }
    return best;
}

}  // namespace

TEST_CASE("reference pivot model") {
    const auto& m = model();
    CHECK(m.S0.set.size() == 310);
    CHECK(m.forward->S().size() == 305);
    CHECK(m.forward->base().size() == 624);
    CHECK(m.constants.C0 == 10);
    CHECK(m.constants.L0 == 1280);
    CHECK(m.cblock.ok);
    CHECK(m.cblock.max_c_a < 10);
    CHECK(m.cblock.witnessed);
    CHECK(m.forward->c() == m.S0.set.front());
    CHECK(m.backward->c() == m.forward->c().inverse());
}

TEST_CASE("loci of the first block") {
    const auto& m = model();
    SampleOverrides ov{{1, 1, 0, 1}};
    auto t = sample_trajectory(m.forward, 60, 3, 1, nullptr, &ov);
    auto L = compute_loci(t, 1);
    CHECK(L.y2m == TreeArena::root);
    const Word& a = m.forward->S()[t.a[0]];
    CHECK(t.arena->distance(L.y2m, L.y1m) == a.length());
    CHECK(t.arena->word(L.y0m) == a.pow(2));
    CHECK(t.arena->word(L.y0p) == a.pow(2) * m.forward->c().pow(2));
    CHECK_THROWS(compute_loci(t, 0));
    CHECK_THROWS(compute_loci(t, t.successes() + 1));
}

TEST_CASE("first two forced blocks give a gain") {
    const auto& m = model();
    SampleOverrides ov{{1, 1}};
    auto t = sample_trajectory(m.forward, 12, 4, 1, nullptr, &ov);
    PivotRecord r(t, m.constants);
    REQUIRE(r.final_steps() == 1);
    CHECK(r.history()[0].kind == StepKind::gain);
    CHECK(r.history()[0].increment == 1);
    CHECK(r.P(1) == std::vector<std::uint32_t>{1});
    CHECK(r.z(1) == r.loci(1).y0p);
}

TEST_CASE("loci and records are deterministic under replay") {
    const auto& m = model();
    auto t1 = sample_trajectory(m.forward, 600, 9);
    auto t2 = sample_trajectory(m.forward, 600, 9);
    PivotRecord r1(t1, m.constants), r2(t2, m.constants);
    REQUIRE(r1.final_steps() == r2.final_steps());
    for (std::size_t i = 1; i <= t1.successes(); ++i)
        CHECK(t1.arena->word(r1.loci(i).y0p) == t2.arena->word(r2.loci(i).y0p));
    for (std::size_t n = 0; n <= r1.final_steps(); ++n) CHECK(r1.P(n) == r2.P(n));
    // Same arena, same trajectory: identical records.
    PivotRecord r3(t1, m.constants);
    for (std::size_t n = 1; n <= r1.final_steps(); ++n) {
        CHECK(r3.history()[n - 1].z == r1.history()[n - 1].z);
        CHECK(r3.history()[n - 1].chain == r1.history()[n - 1].chain);
    }
}

TEST_CASE("backtrack search matches exhaustive enumeration") {
    const auto& m = model();
    Rng rng(31);
    std::size_t found = 0, none = 0, compared = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto t = sample_trajectory(m.forward, 200, 500 + static_cast<std::uint64_t>(trial));
        auto loci = compute_all_loci(t);
        if (loci.size() < 4) continue;
        for (int q = 0; q < 25; ++q) {
            std::vector<std::uint32_t> P;
            for (std::uint32_t i = 1; i <= loci.size() && P.size() < 12; ++i)
                if (rng.below(3) != 0) P.push_back(i);
            // Y anywhere on the path, or just past one of the blocks.
            Node Y = rng.below(2) ? t.pos[rng.below(t.pos.size())] : loci[rng.below(loci.size())].y2p;
            auto fast = find_backtrack_chain(P, loci, Y, m.constants, *t.arena);
            auto slow = brute_chain(P, loci, Y, m.constants, *t.arena);
            CHECK(fast == slow);
            ++compared;
            (fast.empty() ? none : found)++;
        }
    }
    CHECK(compared > 500);
    CHECK(found > 50);
    CHECK(none > 50);
}

TEST_CASE("pivot record invariants on sampled paths") {
    const auto& m = model();
    for (std::uint64_t s = 0; s < 30; ++s) {
        auto t = sample_trajectory(m.forward, 1200, 700 + s);
        PivotRecord r(t, m.constants);
        std::vector<std::vector<std::uint32_t>> Ps;
        for (std::size_t n = 0; n <= r.final_steps(); ++n) Ps.push_back(r.P(n));
        for (std::size_t n = 1; n <= r.final_steps(); ++n) {
            const auto& P = Ps[n];
            const auto& rec = r.history()[n - 1];
            CHECK(std::is_sorted(P.begin(), P.end()));
            CHECK(std::adjacent_find(P.begin(), P.end()) == P.end());
            CHECK(P.size() == rec.P_size);
            if (rec.kind == StepKind::gain) {
                CHECK(P.back() == n);
                CHECK(rec.z == r.loci(n).y0p);
                auto prev = Ps[n - 1];
                prev.push_back(static_cast<std::uint32_t>(n));
                CHECK(P == prev);
            } else if (rec.kind == StepKind::backtrack) {
                std::vector<std::uint32_t> cut;
                for (auto i : Ps[n - 1])
                    if (i <= rec.chain.front()) cut.push_back(i);
                CHECK(P == cut);
                CHECK(rec.z == r.loci(rec.chain.back()).y1m);
            } else {
                CHECK(P.empty());
                CHECK(rec.z == TreeArena::root);
            }
            CHECK(check_marking_structure(t, r, n) == 0);
        }
        // Prefix coherence: i < j in P_m and j in P_n (n > m) give i in P_n.
        for (std::size_t mm = 1; mm <= r.final_steps(); mm += 3)
            for (std::size_t n = mm + 1; n <= r.final_steps(); n += 5)
                for (std::size_t a = 0; a < Ps[mm].size(); ++a)
                    for (std::size_t b = a + 1; b < Ps[mm].size(); ++b)
                        if (std::binary_search(Ps[n].begin(), Ps[n].end(), Ps[mm][b]))
                            CHECK(std::binary_search(Ps[n].begin(), Ps[n].end(), Ps[mm][a]));
        auto al = pivotal_alignment(t, r, 1200);
        CHECK(al.ok);
        CHECK(al.max_product.value < m.constants.F0);
        CHECK(al.min_gain >= m.constants.L0 / 2);
    }
}

TEST_CASE("alignment with no pivots") {
    const auto& m = model();
    SampleOverrides ov{std::vector<int>(20, 0)};
    auto t = sample_trajectory(m.forward, 120, 5, 1, nullptr, &ov);
    PivotRecord r(t, m.constants);
    auto al = pivotal_alignment(t, r, 120);
    CHECK(al.ok);
    CHECK(al.points.size() == 2);
    CHECK_NOTHROW(al.require());
}

TEST_CASE("eventual pivots") {
    const auto& m = model();
    auto t = sample_trajectory(m.forward, 1800, 41);
    PivotRecord r(t, m.constants);
    const std::size_t n = r.final_steps() / 2;
    auto e = eventual_pivots(r, n);
    CHECK(e.horizon == 2 * n);
    auto P = r.P(n);
    CHECK(e.Q.size() <= P.size());
    CHECK(std::equal(e.Q.begin(), e.Q.end(), P.begin()));
    bool monotone = true;
    for (std::size_t k = n + 1; k <= 2 * n; ++k) monotone = monotone && r.P_size(k) >= r.P_size(k - 1);
    if (monotone) CHECK(e.Q == P);
    CHECK_THROWS(eventual_pivots(r, n, n));
    CHECK_THROWS(eventual_pivots(r, r.final_steps(), r.final_steps() + 1));
}

TEST_CASE("pivoting keeps the pivotal times") {
    const auto& m = model();
    auto t = sample_trajectory(m.forward, 600, 77);
    PivotRecord r(t, m.constants);
    auto P = r.P(r.final_steps());
    REQUIRE(P.size() >= 5);
    for (std::size_t q = 0; q < 5; ++q) {
        const std::size_t j = P[q * P.size() / 5];
        auto ok = admissible_replacements(t, r, j);
        auto count = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), true));
        CHECK(count >= 304);
        CHECK(ok[t.a[j - 1]]);
        const std::uint32_t orig = t.a[j - 1];
        for (std::uint32_t u = 0; u < ok.size(); u += 37) {
            if (!ok[u]) continue;
            auto mark = t.arena->mark();
            auto t2 = pivot_trajectory(t, r, j, u);
            PivotRecord r2(t2, m.constants);
            CHECK(r2.P(r2.final_steps()) == P);
            for (std::size_t k = 0; k < t.n(); ++k)
                if (t2.steps[k] != t.steps[k]) {
                    CHECK(k >= t.block_start(t.T[j - 1]));
                    CHECK(k < t.block_start(t.T[j - 1]) + 2);
                }
            CHECK(t2.rho == t.rho);
            // And back again.
            auto t3 = pivot_trajectory(t2, r2, j, orig);
            CHECK(t3.steps == t.steps);
            CHECK(t3.a == t.a);
            CHECK(t3.arena->word(t3.pos.back()) == t.arena->word(t.pos.back()));
            t.arena->rollback(mark);
        }
    }
    std::uint32_t outside = 0;
    for (std::uint32_t i = 1; i <= r.final_steps(); ++i)
        if (!std::binary_search(P.begin(), P.end(), i)) outside = i;
    if (outside) CHECK_THROWS_WITH(pivot_trajectory(t, r, outside, 0), doctest::Contains("not a pivoting move"));
}

TEST_CASE("bidirectional pivots") {
    const auto& m = model();
    std::size_t small_m = 0, trials = 0;
    double worst = 0;
    for (std::uint64_t s = 0; s < 40; ++s) {
        auto bi = sample_bidirectional(m.forward, m.backward, 600, 900 + s);
        PivotRecord rf(bi.forward, m.constants), rb(bi.backward, m.constants);
        auto rep = bidirectional_pivot_check(bi.backward, rb, bi.forward, rf);
        ++trials;
        if (rep.found && rep.m <= 5) ++small_m;
        CHECK(rep.violations == 0);
        worst = std::max(worst, rep.max_product);
    }
    CHECK(static_cast<double>(small_m) >= 0.95 * static_cast<double>(trials));
    CHECK(worst <= m.constants.F0);

    auto arena = std::make_shared<TreeArena>(2);
    SampleOverrides none{std::vector<int>(100, 0)};
    auto f = sample_trajectory(m.forward, 600, 1, 1, arena);
    auto b = sample_trajectory(m.backward, 600, 1, 2, arena, &none);
    PivotRecord rf(f, m.constants), rb(b, m.constants);
    CHECK_THROWS_WITH(bidirectional_pivot_check(b, rb, f, rf), doctest::Contains("insufficient pivots"));
}

TEST_CASE("gain frequency over block steps") {
    const auto& m = model();
    std::size_t steps = 0, gains = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto t = sample_trajectory(m.forward, 1200, 1300 + s);
        PivotRecord r(t, m.constants);
        for (const auto& h : r.history()) {
            ++steps;
            gains += h.kind == StepKind::gain;
        }
    }
    double p = static_cast<double>(gains) / static_cast<double>(steps);
    double sigma = std::sqrt(p * (1 - p) / static_cast<double>(steps));
    CHECK(p >= 0.9 - 3 * sigma);
}
