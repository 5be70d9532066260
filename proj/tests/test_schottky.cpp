#include <doctest.h>

#include <chrono>

#include "pivotwalk/rng.hpp"
#include "pivotwalk/schottky.hpp"

using namespace pw;

namespace {

Word w(const char* s) { return Word::parse(2, s); }

Word rand_word(Rng& rng, std::size_t max_len) {
    std::vector<int> v;
    auto len = rng.below(max_len + 1);
    while (v.size() < len) {
        int l = static_cast<int>(rng.below(2)) + 1;
        if (rng.below(2)) l = -l;
        if (!v.empty() && v.back() == -l) continue;
        v.push_back(l);
    }
    return Word(2, v);
}

SchottkyParams hand_set(std::vector<Word> set, double K, double Kp) {
    SchottkyParams p;
    p.K = K;
    p.Kprime = Kp;
    p.set = std::move(set);
    return p;
}

}  // namespace

TEST_CASE("power products match explicit reduction") {
    Rng rng(21);
    for (int t = 0; t < 3000; ++t) {
        Word x = rand_word(rng, 14), y = rand_word(rng, 14), s = rand_word(rng, 6);
        if (s.empty()) continue;
        long long i = static_cast<long long>(rng.below(9)) - 4;
        CHECK(power_product(x, s, i, y) == common_prefix(x, s.pow(i) * y));
    }
}

TEST_CASE("ray overlap") {
    CHECK(ray_overlap(w("ab"), w("abb")) == 2);
    CHECK(ray_overlap(w("ab"), w("abab")) == 6);
    CHECK(ray_overlap(w("a"), w("b")) == 0);
}

TEST_CASE("distinct positive patterns form a Schottky set") {
    const long long m = 20;
    auto p = hand_set({w("ab").pow(m), w("ba").pow(m), w("abb").pow(m), w("aab").pow(m)}, 3, 6);
    std::vector<Probe<Word>> probes;
    Rng rng(22);
    for (int t = 0; t < 300; ++t) probes.push_back({rand_word(rng, 6), rand_word(rng, 6)});
    auto rep = verify_schottky(p, probes);
    CHECK(rep.pass);
    CHECK(rep.certificate);
    CHECK(rep.single_orbit_ok);
    CHECK(rep.max_count_positive <= 2);
}

TEST_CASE("an element together with its inverse") {
    Word s = w("aab").pow(4);
    auto p = hand_set({s, s.inverse()}, 3, 4);
    Word x = s.pow(kDefaultPowerCap);
    auto rep = verify_schottky(p, {{x, x}});
    CHECK(rep.pass);
    CHECK(rep.max_count_positive >= 1);
    CHECK(rep.certificate);
}

TEST_CASE("powers of one generator are not Schottky") {
    Word x = w("a").pow(5);
    auto three = hand_set({w("a"), w("aa"), w("aaa")}, 2, 1);
    auto rep = verify_schottky(three, {{x, Word(2)}});
    CHECK_FALSE(rep.pass);
    CHECK(rep.max_count_positive == 3);
    REQUIRE_FALSE(rep.offenders.empty());
    CHECK(rep.offenders.front().condition == 1);
    CHECK_FALSE(rep.certificate);

    // Two elements can never exceed a count of two; the strengthened
    // single-orbit count does catch them.
    auto two = hand_set({w("a"), w("aa")}, 2, 1);
    auto rep2 = verify_schottky(two, {{x, Word(2)}});
    CHECK(rep2.pass);
    CHECK(rep2.max_single_orbit == 2);
    CHECK_FALSE(rep2.single_orbit_ok);
}

TEST_CASE("displacement condition") {
    auto p = hand_set({w("ab"), w("ba")}, 1, 5);
    auto rep = verify_schottky(p, {{Word(2), Word(2)}});
    CHECK_FALSE(rep.displacement_ok);
    CHECK_FALSE(rep.pass);
    CHECK(rep.min_displacement == 2);
}

TEST_CASE("certificate rejects overlapping axes") {
    auto c = tree_certificate({w("aaab").pow(3), w("aaabb").pow(3)}, 3);
    CHECK_FALSE(c.ok);
    auto c2 = tree_certificate({w("abA")}, 1);
    CHECK_FALSE(c2.ok);
}

TEST_CASE("search with a weak demand") {
    auto r = search_schottky(w("a"), w("b"), 2, 1, 5);
    CHECK(r.params.set.size() == 2);
    CHECK(r.params.K == 10);
    CHECK(r.params.power == 2);
    CHECK(r.report.pass);
    CHECK_THROWS(search_schottky(w("a"), w("a"), 2, 1, 5));
    CHECK_THROWS(search_schottky(w("ab"), w("abab"), 2, 1, 5));
}

TEST_CASE("search for 310 elements of length at least L0") {
    auto t0 = std::chrono::steady_clock::now();
    auto r = search_schottky(w("a"), w("b"), 310, 1280, 7);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 60);
    const auto& p = r.params;
    CHECK(p.set.size() == 310);
    CHECK(p.K == 10);
    CHECK(p.power == 128);
    for (const Word& s : p.set) {
        CHECK(s.cyclically_reduced());
        CHECK(translation_length(s) >= 1280);
    }
    CHECK(r.report.pass);
    CHECK(r.report.single_orbit_ok);
    // Fresh and larger probe family.
    auto rep = verify_schottky(p, tree_probes(p, 99, 600));
    CHECK(rep.pass);
    CHECK(rep.single_orbit_ok);

    auto sub = schottky_subset(p, 305);
    CHECK(sub.set.size() == 305);
    CHECK(sub.K == p.K);
    CHECK(sub.set.front() == p.set.front());
    CHECK(schottky_subset(p, 310).set == p.set);
    CHECK_THROWS(schottky_subset(p, 0));
    CHECK_THROWS(schottky_subset(p, 311));
}
