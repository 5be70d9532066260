#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "pivotwalk/stats.hpp"

using namespace pw;

namespace {

Word w(const char* s) { return Word::parse(2, s); }

WordDistribution simple_walk() { return WordDistribution::uniform({w("a"), w("A"), w("b"), w("B")}); }
WordDistribution six() { return WordDistribution::uniform({w("a"), w("A"), w("b"), w("B"), w("ab"), w("BA")}); }

// Distance from o of the simple walk on the 4-regular tree is a birth and
// death chain: 0 -> 1, and k -> k+1 with 3/4, k -> k-1 with 1/4.
std::vector<double> distance_law(int n) {
    std::vector<double> p(static_cast<std::size_t>(n) + 2, 0.0);
    p[0] = 1;
    for (int s = 0; s < n; ++s) {
        std::vector<double> q(p.size(), 0.0);
        q[1] += p[0];
        for (std::size_t k = 1; k + 1 < p.size(); ++k) {
            q[k + 1] += 0.75 * p[k];
            q[k - 1] += 0.25 * p[k];
        }
        p = q;
    }
    return p;
}

std::vector<Plane> plane_path(const StepDistribution<Moebius>& mu, std::size_t n, Rng& rng) {
    std::vector<Plane> pts{kPlaneBase};
    Moebius m;
    for (std::size_t k = 0; k < n; ++k) {
        m = (m * mu.support()[mu.sample(rng)]).normalized();
        pts.push_back(m.apply(kPlaneBase));
    }
    return pts;
}

StepDistribution<Moebius> plane_walk() {
    Moebius g{1.2, 0, 0, 1 / 1.2}, h{1.1, 0.3, 0.3, (1 + 0.09) / 1.1};
    return StepDistribution<Moebius>::uniform({g, g.inverse(), h, h.inverse()});
}

}  // namespace

TEST_CASE("quantile, fit and normal KS helpers") {
    CHECK(quantile({4, 1, 3, 2}, 0.5) == 2.5);
    std::vector<double> hundred;
    for (int i = 1; i <= 100; ++i) hundred.push_back(i);
    CHECK(quantile(hundred, 0.99) == doctest::Approx(99.01));
    CHECK_THROWS(quantile({}, 0.5));

    auto f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(f.slope == doctest::Approx(2));
    CHECK(f.intercept == doctest::Approx(1));
    CHECK(f.r2 == doctest::Approx(1));
    CHECK(f.slope_se == doctest::Approx(0).epsilon(1e-12));

    // Samples at the midpoint quantiles sit 1/(2n) from the normal CDF.
    std::vector<double> xs;
    const int n = 400;
    for (int i = 0; i < n; ++i) {
        double u = (i + 0.5) / n;
        // bisection for the normal quantile, kept independent of the code under test
        double lo = -10, hi = 10;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (0.5 * std::erfc(-mid / (2 * std::sqrt(2.0))) < u ? lo : hi) = mid;
        }
        xs.push_back(0.5 * (lo + hi));
    }
    CHECK(ks_normal(xs, 2.0) == doctest::Approx(0.5 / n).epsilon(1e-6));
    CHECK(ks_normal({100.0}, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("drift of the simple walk") {
    auto e = estimate_drift(simple_walk(), 10000, 500, 1);
    CHECK(std::abs(e.value - 0.5) <= 0.01);
    CHECK(e.trials == 500);
    CHECK(e.seed == 1);

    // Exact law at small n against the estimate.
    const int n = 20;
    auto p = distance_law(n);
    double mean = 0, m2 = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        mean += static_cast<double>(k) * p[k];
        m2 += static_cast<double>(k * k) * p[k];
    }
    auto d = estimate_drift(simple_walk(), n, 20000, 3);
    CHECK(std::abs(d.value - mean / n) <= 2 * d.half_width);
    auto v = estimate_variance(simple_walk(), n, 20000, 3);
    CHECK(std::abs(v.value - (m2 - mean * mean) / n) <= 2 * v.half_width);
}

TEST_CASE("point mass walk is deterministic") {
    WordDistribution a({w("a")}, {1.0});
    auto d = estimate_drift(a, 37, 5, 2);
    CHECK(d.value == 1.0);
    CHECK(d.half_width == 0.0);
    auto v = estimate_variance(a, 37, 5, 2);
    CHECK(v.value == 0.0);
}

TEST_CASE("variance is positive and stable across n") {
    std::vector<Estimate> es;
    for (std::size_t n : {1024, 2048, 4096}) es.push_back(estimate_variance(six(), n, 2000, 5));
    for (const auto& e : es) CHECK(e.lo() > 0);
    for (std::size_t i = 0; i < es.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) CHECK((es[i].lo() <= es[j].hi() && es[j].lo() <= es[i].hi()));
}

TEST_CASE("plane walk drift and translation lengths") {
    auto mu = plane_walk();
    auto e = estimate_drift(mu, 200, 200, 4);
    CHECK(e.lo() > 0);
    Rng rng(4);
    auto p = sample_checkpoints(mu, {50, 100, 200}, rng);
    CHECK(p.tau_violations == 0);
    for (std::size_t i = 0; i < p.n.size(); ++i) CHECK(p.tau[i] <= p.d[i] + 1e-9);
}

TEST_CASE("long plane walks keep d and tau accurate") {
    // Oracle: w_n i evaluated right to left in long double, d = d(i, w_n i).
    Moebius g{2, 0, 0, 0.5}, h{1.25, 0.75, 0.75, 1.25};
    auto mu = StepDistribution<Moebius>::uniform({g, g.inverse(), h, h.inverse()});
    for (std::size_t n : {40, 400, 2000}) {
        Rng rng(11, 0, n), replay(11, 0, n);
        auto p = sample_checkpoints(mu, {n}, rng);
        std::vector<std::size_t> idx(n);
        for (auto& x : idx) x = mu.sample(replay);
        std::complex<long double> z{0, 1};
        for (std::size_t k = n; k-- > 0;) {
            const auto& m = mu.support()[idx[k]];
            z = (static_cast<long double>(m.a) * z + static_cast<long double>(m.b)) /
                (static_cast<long double>(m.c) * z + static_cast<long double>(m.d));
        }
        const std::complex<long double> i{0, 1};
        const long double d = 2 * std::asinh(std::abs(z - i) / (2 * std::sqrt(z.imag())));
        CHECK(std::isfinite(p.d[0]));
        CHECK(std::abs(p.d[0] - static_cast<double>(d)) <= 1e-9 * (1 + p.d[0]));
        CHECK(p.tau[0] <= p.d[0] + 1e-9 * (1 + p.d[0]));
        CHECK(p.tau_violations == 0);
        if (n == 2000) CHECK(p.d[0] > 700);  // past where cosh d overflows a double
    }
}

TEST_CASE("estimators are deterministic and independent of the worker count") {
    auto a = estimate_drift(six(), 300, 64, 9, 1);
    auto b = estimate_drift(six(), 300, 64, 9, 3);
    CHECK(a.value == b.value);
    CHECK(a.half_width == b.half_width);
    auto c1 = clt_samples(six(), 256, 64, 9, 1);
    auto c2 = clt_samples(six(), 256, 64, 9, 4);
    CHECK(c1.displacement == c2.displacement);
    CHECK(c1.translation == c2.translation);
    auto c3 = estimate_drift(six(), 300, 64, 10, 1);
    CHECK(c3.value != a.value);
}

TEST_CASE("central limit samples") {
    auto r = clt_samples(six(), 1024, 2000, 1);
    CHECK_FALSE(r.arithmetic_warning);
    CHECK(r.ks_displacement <= 0.05);
    CHECK(r.ks_translation <= 0.05);
    CHECK(r.max_pair_diff <= r.pair_bound);
    CHECK(r.lambda.trials == 2000);

    auto one = clt_samples(six(), 1, 50, 2);
    for (std::size_t i = 0; i < one.displacement.size(); ++i) {
        double d = one.displacement[i] + one.lambda.value;
        CHECK((d == doctest::Approx(1) || d == doctest::Approx(2)));
        CHECK(one.translation[i] == one.displacement[i]);
    }

    WordDistribution pm({w("ab")}, {1.0});
    CHECK(clt_samples(pm, 8, 4, 1).arithmetic_warning);
}

TEST_CASE("LLn and the normalizers") {
    CHECK(LL(1) == 1);
    CHECK(LL(2) == 1);
    CHECK(LL(3) == doctest::Approx(std::log(std::log(3.0))));
    CHECK(lil_alpha(16) == doctest::Approx(std::sqrt(32 * std::log(std::log(16.0)))));
    CHECK(lil_beta(2) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("deterministic walk gives zero series") {
    WordDistribution a({w("a")}, {1.0});
    std::vector<std::size_t> cp{1, 2, 3, 10, 100};
    Rng rng(1);
    auto p = sample_checkpoints(a, cp, rng);
    auto ld = log_deviation_series(p);
    auto ls = lil_series(p, 1.0);
    for (std::size_t i = 0; i < cp.size(); ++i) {
        CHECK(ld.value[i] == 0);
        CHECK(ls.value[i] == 0);
    }
    CHECK_THROWS(sample_checkpoints(a, {3, 2}, rng));
}

TEST_CASE("log deviation and LIL series on a random path") {
    std::vector<std::size_t> cp;
    for (std::size_t n = 16; n <= 4096; ++n) cp.push_back(n);
    for (std::uint64_t i = 0; i < 20; ++i) {
        Rng rng(7, streams::logdev, i);
        auto p = sample_checkpoints(six(), cp, rng);
        CHECK(p.tau_violations == 0);
        auto ld = log_deviation_series(p);
        auto ls = lil_series(p, 2.0 / 3);
        auto lt = lil_series(p, 2.0 / 3, true);
        for (std::size_t j = 0; j < cp.size(); ++j) {
            CHECK(ld.value[j] >= 0);
            CHECK(ld.running_max[j] >= ld.value[j]);
            CHECK(ls.running_min[j] <= ls.value[j]);
            double n = static_cast<double>(cp[j]);
            CHECK(std::abs(ls.value[j] - lt.value[j]) <= 10 * std::log(n) / lil_alpha(n));
        }
        // Series at a checkpoint depend only on the path.
        Rng again(7, streams::logdev, i);
        auto q = sample_checkpoints(six(), {100, 4096}, again);
        CHECK(q.d[1] == p.d.back());
        CHECK(q.tau[0] == p.tau[100 - 16]);
    }
}

TEST_CASE("converse diagnostic separates heavy tails from the control") {
    auto r = converse_diagnostic(2.5, 1000000, six(), {256, 512, 1024, 2048, 4096}, 400, 3, {1000});
    CHECK(r.heavy.fit_d.slope > 0);
    CHECK(r.heavy.fit_tau.slope > 0);
    CHECK(r.heavy.fit_d.slope >= 3 * std::abs(r.control.fit_d.slope));
    REQUIRE(r.truncation_sweep.size() == 1);
    CHECK(r.truncation_sweep[0].first == 1000);
    CHECK_THROWS(HeavyTailModel(0.5, 10));

    HeavyTailModel h(2.5, 3, 0.999999);
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        auto [l, k] = h.sample(rng);
        CHECK(k >= 1);
        CHECK(k <= 3);
        CHECK(std::abs(l) <= 2);
    }
}

TEST_CASE("dyadic identity is exact on a long tree path") {
    TreeArena arena(2);
    auto mu = six();
    auto tokens = register_tokens(arena, mu);
    Rng rng(11);
    auto pos = sample_path(arena, tokens, mu, 1 << 15, rng);
    auto D = dyadic_decompose(arena, pos, 3, 12);
    CHECK(D.identity_failures == 0);
    CHECK(D.max_identity_error == 0);
    CHECK(D.max_telescoping_error == 0);
    CHECK(D.Y[0].size() == 4096);
    CHECK(D.Y[12].size() == 1);
    CHECK(D.Y[12][0] == static_cast<double>(arena.length(pos[1 << 15])));
    for (const auto& level : D.b)
        for (double b : level) CHECK(b >= 0);
    CHECK_THROWS(dyadic_decompose(arena, pos, 3, 13));
}

TEST_CASE("dyadic decomposition of a deterministic walk") {
    TreeArena arena(2);
    WordDistribution a({w("a")}, {1.0});
    auto tokens = register_tokens(arena, a);
    Rng rng(1);
    auto pos = sample_path(arena, tokens, a, 256, rng);
    auto D = dyadic_decompose(arena, pos, 2, 6);
    for (int k = 0; k <= 6; ++k) {
        for (double y : D.Y[static_cast<std::size_t>(k)]) CHECK(y == static_cast<double>(4 << k));
        for (double b : D.b[static_cast<std::size_t>(k)]) CHECK(b == 0);
    }
}

TEST_CASE("dyadic identity on the plane") {
    Rng rng(12);
    auto pts = plane_path(plane_walk(), 1 << 10, rng);
    auto D = dyadic_decompose(pts, 2, 8);
    CHECK(D.identity_failures == 0);
    CHECK(D.max_identity_error <= 1e-6);
    CHECK(D.max_telescoping_error <= 1e-6);
}

TEST_CASE("fourth moments of the dyadic defects stay bounded") {
    auto m = dyadic_fourth_moments(six(), 2, 7, 500, 13);
    REQUIRE(m.size() == 7);
    for (const auto& e : m) CHECK(e.value < 100);
}

TEST_CASE("difference inequalities") {
    Rng rng(14);
    for (int i = 0; i < 100000; ++i) {
        double t = rng.uniform() * 20, s = rng.uniform() * 20, p = rng.uniform() * 4;
        CHECK(std::abs(std::pow(t, p) - std::pow(s, p)) <= diff_ineq_simple_bound(t, s, p) * (1 + 1e-12) + 1e-12);
        double t2 = rng.uniform() * 20, s2 = rng.uniform() * 20, q = rng.uniform() * 4;
        double lhs = std::abs(std::pow(t, p) * std::pow(t2, q) - std::pow(s, p) * std::pow(s2, q));
        CHECK(lhs <= diff_ineq_bound(t, t2, s, s2, p, q) * (1 + 1e-12) + 1e-12);
    }
}

TEST_CASE("deviation probabilities") {
    // With x = o the event is w_k = e, impossible at odd k for the simple walk.
    auto zero = deviation_probability_check(simple_walk(), Word(2), {1, 3, 7}, 500, 1);
    for (auto h : zero.hits) CHECK(h == 0);
    auto r = deviation_probability_check(simple_walk(), w("A").pow(512), {8, 16, 32, 64}, 5000, 1);
    CHECK(r.fit.slope < 0);
    for (double f : r.frequency) CHECK(f <= 1);
    CHECK(r.hits[0] >= r.hits[1]);
    CHECK_THROWS(deviation_probability_check(simple_walk(), Word(2), {8}, 10, 1, 3));
}

TEST_CASE("opposite deviation moments") {
    WordDistribution a({w("a")}, {1.0});
    auto det = opposite_deviation_moment(a, 1, 0.5, {64}, 3, 1);
    CHECK(det[0].power.value == 0);
    CHECK(det[0].exponential.value == 1);
    auto r = opposite_deviation_moment(six(), 1, 0.5, {1024, 2048}, 1000, 2);
    REQUIRE(r.size() == 2);
    CHECK(std::abs(r[1].power.value / r[0].power.value - 1) < 0.1);
    CHECK(std::abs(r[1].exponential.value / r[0].exponential.value - 1) < 0.1);
    CHECK(r[1].power.value >= r[0].power.value);
}

TEST_CASE("tracking distances agree with a full scan") {
    PivotModelConfig cfg;
    auto pm = build_pivot_model(cfg);
    for (std::uint64_t s = 0; s < 4; ++s) {
        auto t = sample_trajectory(pm.forward, 600, 21, s + 1);
        PivotRecord r(t, pm.constants);
        Rng prng(21, 5, s);
        auto rep = tracking_series(t, r, 600, prng, 500);
        CHECK(rep.quasi_violations == 0);
        CHECK(rep.pairs_checked == 500);
        const auto& g = rep.gamma;
        const TreeArena& A = *t.arena;
        for (std::size_t k = 0; k <= 600; ++k) {
            double best = 1e300;
            for (std::size_t j = 0; j + 1 < g.size(); ++j) best = std::min(best, A.gromov(g[j], g[j + 1], t.pos[k]));
            CHECK(rep.dist[k] == best);
        }
        // Marked points lie on Gamma.
        auto st = r.at_time(t.n());
        for (std::size_t k = 0; k <= 600; ++k)
            for (auto i : st.P)
                if (t.pos[k] == r.loci(i).y0m || t.pos[k] == r.loci(i).y0p) CHECK(rep.dist[k] == 0);
    }
    // No Schottky blocks at all.
    SampleOverrides none;
    none.rho.assign(100, 0);
    auto t = sample_trajectory(pm.forward, 120, 1, 1, nullptr, &none);
    PivotRecord r(t, pm.constants);
    Rng prng(1);
    CHECK_THROWS_WITH(tracking_series(t, r, 100, prng), "fewer than 2 pivotal loci");
}

TEST_CASE("pivot statistics and decay are reproducible") {
    PivotModelConfig cfg;
    auto pm = build_pivot_model(cfg);
    auto a = pivot_stats(pm.forward, pm.constants, 300, 6, 4, 1);
    auto b = pivot_stats(pm.forward, pm.constants, 300, 6, 4, 3);
    CHECK(a.steps == b.steps);
    CHECK(a.gains == b.gains);
    CHECK(a.steps > 0);
    CHECK(a.gain_frequency() >= 0.9 - 3 * a.sigma(0.9));

    cfg.alpha = 0.02;
    auto low = build_pivot_model(cfg);
    auto d = pivot_decay(low.forward, low.constants, {16, 32, 64}, 100, 4);
    CHECK(d.density > 0);
    CHECK(d.kappa == doctest::Approx(d.density / 2));
    CHECK(d.hits[0] >= d.hits[2]);
    CHECK_THROWS(pivot_decay(low.forward, low.constants, {32, 16}, 10, 1));
}
