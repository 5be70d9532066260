#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "pivotwalk/arena.hpp"
#include "pivotwalk/geometry.hpp"
#include "pivotwalk/models.hpp"
#include "pivotwalk/rng.hpp"
#include "pivotwalk/words.hpp"

using namespace pw;

namespace {

// Stack reduction over raw letters; independent of Word's own append.
std::vector<int> reduce(const std::vector<int>& raw) {
    std::vector<int> st;
    for (int l : raw) {
        if (!st.empty() && st.back() == -l) st.pop_back();
        else st.push_back(l);
    }
    return st;
}

std::vector<int> random_letters(Rng& rng, int rank, std::size_t len) {
    std::vector<int> v;
    for (std::size_t i = 0; i < len; ++i) {
        int l = static_cast<int>(rng.below(static_cast<std::uint64_t>(rank))) + 1;
        v.push_back(rng.below(2) ? l : -l);
    }
    return v;
}

Word random_word(Rng& rng, int rank, std::size_t max_len) {
    return Word(rank, reduce(random_letters(rng, rank, rng.below(max_len + 1))));
}

std::size_t naive_lcp(const std::vector<int>& x, const std::vector<int>& y) {
    std::size_t k = 0;
    while (k < x.size() && k < y.size() && x[k] == y[k]) ++k;
    return k;
}

// |w^n| = n tau + const once n >= 1, so a difference of two powers is exact.
double naive_tau(const Word& w, int n) {
    std::vector<int> raw;
    for (int i = 0; i < n; ++i) raw.insert(raw.end(), w.letters().begin(), w.letters().end());
    auto once = reduce(raw).size();
    raw.insert(raw.end(), raw.begin(), raw.end());
    return static_cast<double>(reduce(raw).size() - once) / n;
}

}  // namespace

TEST_CASE("word parse and print round trip") {
    Word w = Word::parse(2, "abAB");
    CHECK(w.str() == "abAB");
    CHECK(w.length() == 4);
    CHECK(Word::parse(2, "aA").empty());
    CHECK(Word::parse(2, "abBa").str() == "aa");
    CHECK_THROWS(Word::parse(2, "c"));
    CHECK(Word::parse(3, "cC").empty());
}

TEST_CASE("word products agree with stack reduction") {
    Rng rng(11);
    for (int t = 0; t < 2000; ++t) {
        Word x = random_word(rng, 2, 12), y = random_word(rng, 2, 12);
        std::vector<int> raw = x.letters();
        raw.insert(raw.end(), y.letters().begin(), y.letters().end());
        CHECK((x * y).letters() == reduce(raw));
        CHECK((x * x.inverse()).empty());
    }
}

TEST_CASE("word powers and cyclic core") {
    Word w = Word::parse(2, "abaB");
    CHECK(w.pow(3) == w * w * w);
    CHECK(w.pow(-2) == w.inverse() * w.inverse());
    CHECK(w.pow(0).empty());
    Word u = Word::parse(2, "bAAbaB");
    CHECK(u.cyclic_core().str() == "Ab");
    CHECK(u.conjugator_length() == 2);
    CHECK(Word::parse(2, "ab").cyclically_reduced());
    CHECK(Word::parse(2, "aba").cyclically_reduced());
    CHECK(Word::parse(2, "abab").cyclically_reduced());
    CHECK_FALSE(Word::parse(2, "abA").cyclically_reduced());
}

TEST_CASE("tree translation length closed form matches the limit") {
    Rng rng(12);
    for (int t = 0; t < 300; ++t) {
        Word w = random_word(rng, 2, 10);
        if (w.empty()) continue;
        double closed = static_cast<double>(translation_length(w));
        CHECK(closed == naive_tau(w, 16));
        CHECK(closed == doctest::Approx(translation_length_limit_oracle(w, 1 << 12)).epsilon(1e-3));
        CHECK(static_cast<double>(w.length()) >= closed);
    }
    CHECK(translation_length(Word::parse(2, "bAAbaB")) == 2);
    CHECK(classify_isometry(Word(2)) == IsometryKind::elliptic);
    CHECK(classify_isometry(Word::parse(2, "abA")) == IsometryKind::loxodromic);
}

TEST_CASE("arena agrees with word arithmetic") {
    Rng rng(13);
    TreeArena arena(2);
    std::vector<Word> tokens;
    std::vector<int> ids;
    for (int i = 0; i < 30; ++i) {
        Word w = random_word(rng, 2, 9);
        if (w.empty()) continue;
        tokens.push_back(w);
        ids.push_back(arena.add_token(w));
        tokens.push_back(w.inverse());
        ids.push_back(TreeArena::inverse_token(ids.back()));
    }
    // Several walks sharing the arena.
    std::vector<std::vector<TreeArena::Node>> nodes(4);
    std::vector<std::vector<Word>> words(4);
    for (int w = 0; w < 4; ++w) {
        nodes[w].push_back(TreeArena::root);
        words[w].push_back(Word(2));
        for (int k = 0; k < 400; ++k) {
            auto j = rng.below(tokens.size());
            nodes[w].push_back(arena.push(nodes[w].back(), ids[j]));
            words[w].push_back(words[w].back() * tokens[j]);
        }
    }
    for (int t = 0; t < 3000; ++t) {
        auto w1 = rng.below(4), w2 = rng.below(4);
        auto k1 = rng.below(401), k2 = rng.below(401);
        const Word& x = words[w1][k1];
        const Word& y = words[w2][k2];
        auto u = nodes[w1][k1], v = nodes[w2][k2];
        REQUIRE(arena.length(u) == x.length());
        CHECK(arena.lcp(u, v) == naive_lcp(x.letters(), y.letters()));
        CHECK(arena.distance(u, v) == (x.inverse() * y).length());
        if (t % 10 == 0) {
            CHECK(arena.word(u) == x);
            CHECK(arena.cyclic_length(u) == translation_length(x));
        }
        if (x.length() > 0) {
            auto i = rng.below(x.length());
            CHECK(arena.letter_at(u, i) == x[i]);
        }
    }
    // Prefix nodes stand for the right words.
    for (int t = 0; t < 200; ++t) {
        auto w = rng.below(4), k = rng.below(401);
        const Word& x = words[w][k];
        auto len = rng.below(x.length() + 1);
        auto p = arena.prefix(nodes[w][k], len);
        CHECK(arena.word(p) == Word(2, std::vector<int>(x.letters().begin(), x.letters().begin() + static_cast<long>(len))));
    }
}

TEST_CASE("arena push_word and from_word") {
    TreeArena arena(2);
    Word w = Word::parse(2, "abbaBA");
    auto u = arena.from_word(w);
    CHECK(arena.word(u) == w);
    auto v = arena.push_word(u, w.inverse());
    CHECK(v == TreeArena::root);
    CHECK(arena.gromov(arena.from_word(Word::parse(2, "ab")), arena.from_word(Word::parse(2, "aB")), TreeArena::root) == 1.0);
}

TEST_CASE("Gromov product identities are exact on the tree") {
    Rng rng(14);
    WordSpace sp;
    for (int t = 0; t < 10000; ++t) {
        Word x = random_word(rng, 2, 10), y = random_word(rng, 2, 10), z = random_word(rng, 2, 10);
        double gxy = gromov_product(sp, x, y, z);
        // (y,z)_x + (x,z)_y = d(x,y)
        CHECK(gxy + gromov_product(sp, y, x, z) == sp.dist(x, y));
        CHECK(gxy >= 0);
        CHECK(gxy <= std::min(sp.dist(x, y), sp.dist(x, z)));
        // Basepoint identity: (y,z)_e is the common prefix.
        CHECK(gromov_product(sp, Word(2), y, z) == static_cast<double>(common_prefix(y, z)));
        // Isometry invariance under left multiplication.
        Word g = random_word(rng, 2, 6);
        CHECK(gromov_product(sp, g * x, g * y, g * z) == gxy);
    }
}

TEST_CASE("four-point condition with zero defect on the tree") {
    Rng rng(15);
    WordSpace sp;
    for (int t = 0; t < 10000; ++t) {
        Word x = random_word(rng, 2, 8), y = random_word(rng, 2, 8), z = random_word(rng, 2, 8),
             w = random_word(rng, 2, 8);
        CHECK(check_four_point(sp, x, y, z, w, 0.0));
    }
}

TEST_CASE("hyperbolic plane distance and translation length") {
    CHECK(plane_distance({0, 1}, {0, 2}) == doctest::Approx(std::log(2.0)));
    // 2 asinh(1/2)
    CHECK(plane_distance({0, 1}, {1, 1}) == doctest::Approx(0.9624236501192069).epsilon(1e-14));
    Moebius g{2, 0, 0, 0.5};
    CHECK(translation_length(g) == doctest::Approx(2 * std::log(2.0)));
    CHECK(translation_length_limit_oracle(g, 1 << 20) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-4));
    Moebius h{2, 1, 1, 1};
    CHECK(translation_length(h) == doctest::Approx(translation_length_limit_oracle(h, 1 << 20)).epsilon(1e-4));
    CHECK(classify_isometry(Moebius{1, 1, 0, 1}) == IsometryKind::parabolic);
    CHECK(classify_isometry(Moebius{0, -1, 1, 0}) == IsometryKind::elliptic);
    CHECK(classify_isometry(g) == IsometryKind::loxodromic);
    CHECK(are_independent(g, h));
    CHECK_FALSE(are_independent(g, g * g));
}

TEST_CASE("plane Gromov products satisfy the four-point condition with the plane constant") {
    Rng rng(16);
    PlaneSpace sp;
    auto pt = [&] { return Plane(rng.uniform() * 8 - 4, std::exp(rng.uniform() * 6 - 3)); };
    for (int t = 0; t < 5000; ++t) CHECK(check_four_point(sp, pt(), pt(), pt(), pt(), kPlaneDelta));
}

TEST_CASE("constant ladder for C0 = 10 on the tree") {
    auto c = GromovConstants::from(10, 0);
    CHECK(c.D0 == 20);
    CHECK(c.E0 == 20);
    CHECK(c.F0 == 40);
    CHECK(c.G0 == 120);
    CHECK(c.L1 == 81);
    CHECK(c.L2 == 41);
    CHECK(c.L3 == 161);
    CHECK(c.D3 == 80);
    CHECK(c.L0 == 1280);
    CHECK_NOTHROW(c.check());
    auto bad = c;
    bad.L0 = 100;
    CHECK_THROWS_AS(bad.check(), std::logic_error);
}

TEST_CASE("space model dispatch") {
    auto tree = SpaceModel::tree(2);
    GroupElement a = Word::parse(2, "a");
    CHECK(tree.dist(tree.basepoint(), tree.act(a, tree.basepoint())) == 1);
    CHECK(tree.translation_length(Word::parse(2, "abA")) == 1);
    auto plane = SpaceModel::plane();
    CHECK_THROWS(plane.dist(plane.basepoint(), tree.basepoint()));
}
