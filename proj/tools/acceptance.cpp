// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: acceptance [config.yaml] [--only N[,M...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "pivotwalk/cli.hpp"
#include "pivotwalk/geometry.hpp"
#include "pivotwalk/stats.hpp"
#include "pivotwalk/suites.hpp"

using namespace pw;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fd(double x) { return format_double(x); }

Word random_word(Rng& rng, std::size_t max_len) {
    Word w(2);
    const std::size_t n = rng.below(max_len + 1);
    for (std::size_t k = 0; k < n; ++k) {
        int l = static_cast<int>(rng.below(2)) + 1;
        w *= Word::generator(2, rng.below(2) ? l : -l);
    }
    return w;
}

const Assertion& find(const SuiteResult& r, const std::string& name) {
    for (const auto& a : r.assertions)
        if (a.name == name) return a;
    throw std::logic_error("suite " + r.suite + " has no assertion " + name);
}

Outcome from_suite(const SuiteResult& r, const std::vector<std::string>& names) {
    Outcome o{true, ""};
    for (const auto& n : names) {
        const auto& a = find(r, n);
        o.pass = o.pass && a.pass;
        o.detail += (o.detail.empty() ? "" : "; ") + n + " " + a.detail;
    }
    return o;
}

// Criterion 1: exact identities on the tree.
Outcome exactness(const ExperimentConfig& cfg) {
    Rng rng(require_seed(cfg), 9001, 0);
    WordSpace sp;
    std::size_t bad = 0;
    for (int t = 0; t < 10000; ++t) {
        Word x = random_word(rng, 12), y = random_word(rng, 12), z = random_word(rng, 12), g = random_word(rng, 8);
        const double p = gromov_product(sp, x, y, z);
        bad += p + gromov_product(sp, y, x, z) != sp.dist(x, y);
        bad += p < 0 || p > std::min(sp.dist(x, y), sp.dist(x, z));
        bad += gromov_product(sp, Word(2), y, z) != static_cast<double>(common_prefix(y, z));
        bad += gromov_product(sp, g * x, g * y, g * z) != p;
    }
    std::size_t four = 0;
    for (int t = 0; t < 10000; ++t) {
        Word x = random_word(rng, 10), y = random_word(rng, 10), z = random_word(rng, 10), w = random_word(rng, 10);
        four += !check_four_point(sp, x, y, z, w, 0.0);
    }
    // tau from the cyclic core against |w^{k+1}| - |w^k| and |w^N| / N.
    std::size_t taubad = 0;
    for (int t = 0; t < 1000; ++t) {
        Word w = random_word(rng, 14);
        const auto tau = static_cast<double>(translation_length(w));
        Word p = w;
        for (int k = 1; k < 6; ++k) {
            Word q = p * w;
            taubad += static_cast<double>(q.length()) - static_cast<double>(p.length()) != tau;
            p = q;
        }
        const int N = 4096;
        taubad += std::abs(translation_length_limit_oracle(w, N) - tau) > static_cast<double>(w.length()) / N;
    }
    auto mu = tree_law(cfg.model);
    Rng prng(require_seed(cfg), streams::dyadic_exact, 0);
    TreeArena arena(2);
    auto tokens = register_tokens(arena, mu);
    auto pos = sample_path(arena, tokens, mu, std::size_t{1} << 15, prng);
    auto D = dyadic_decompose(arena, pos, 3, 12);
    const bool ok = bad == 0 && four == 0 && taubad == 0 && D.identity_failures == 0 && D.max_identity_error == 0 &&
                    D.max_telescoping_error == 0;
    return {ok, "product identity failures " + std::to_string(bad) + " / 40000, four-point failures " +
                    std::to_string(four) + " / 10000, tau mismatches " + std::to_string(taubad) +
                    ", dyadic identity failures " + std::to_string(D.identity_failures) + " on a 2^15 path"};
}

// Criterion 2: artifact through the CLI, reloaded and checked on fresh probes.
Outcome schottky(const ExperimentConfig& cfg, const std::string& config_path) {
    const auto dir = std::filesystem::temp_directory_path() / "pivotwalk_acceptance";
    std::filesystem::remove_all(dir);
    std::vector<std::string> args{"schottky-search", "--out", dir.string()};
    if (!config_path.empty()) args.insert(args.end(), {"--config", config_path});
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (code != kExitPass) return {false, "schottky-search exit " + std::to_string(code) + ": " + err.str()};
    auto S = load_schottky((dir / "schottky.json").string());
    std::filesystem::remove_all(dir);
    const std::uint64_t fresh = cfg.schottky.probe_seed + 0x9e3779b97f4a7c15ull;
    auto rep = verify_schottky(S, tree_probes(S, fresh, cfg.schottky.probe_count));
    const double L0 = GromovConstants::from(S.K, 0.0).L0;
    std::size_t shortest = SIZE_MAX;
    for (const auto& w : S.set) shortest = std::min(shortest, w.length());
    const bool ok = rep.pass && S.set.size() >= 310 && S.Kprime >= L0 && static_cast<double>(shortest) >= L0;
    return {ok, std::to_string(S.set.size()) + " elements, K " + fd(S.K) + ", K' " + fd(S.Kprime) + ", shortest " +
                    std::to_string(shortest) + ", fresh-probe verification " + (rep.pass ? "pass" : "fail") + " (" +
                    rep.evidence + ", " + std::to_string(rep.probes) + " probes)"};
}

struct PivotContext {
    PivotModel model;
    PivotStats stats;
};

Outcome gain(const ExperimentConfig& cfg, PivotContext& ctx) {
    ctx.model = reference_model(cfg);
    ctx.stats = pivot_stats(ctx.model.forward, ctx.model.constants, 2400, 100, require_seed(cfg));
    const auto& s = ctx.stats;
    const double f = s.gain_frequency(), b = 0.9 - 3 * s.sigma(0.9);
    return {s.steps >= 10000 && f >= b,
            std::to_string(s.steps) + " block steps, P(+1) " + fd(f) + " >= " + fd(b)};
}

Outcome tail(const PivotContext& ctx) {
    const auto& s = ctx.stats;
    Outcome o{s.steps >= 10000, ""};
    for (int j = 0; j < 3; ++j) {
        const double p = std::pow(10.0, -(j + 1)), f = s.drop_frequency(j), b = p + 3 * s.sigma(p);
        o.pass = o.pass && f <= b;
        o.detail += (j ? "; " : "") + std::string("j=") + std::to_string(j) + " " + fd(f) + " <= " + fd(b);
    }
    return o;
}

Outcome pivoting(const ExperimentConfig& cfg, const PivotContext& ctx) {
    const auto& m = ctx.model;
    const std::uint64_t seed = require_seed(cfg);
    std::size_t times = 0, min_count = SIZE_MAX, tried = 0, changed = 0;
    for (std::size_t i = 0; times < 100; ++i) {
        auto t = sample_trajectory(m.forward, 240, seed, trial_stream(9002, i));
        PivotRecord r(t, m.constants);
        const auto P = r.P(r.final_steps());
        // Up to five pivotal times per path, spread over P.
        const std::size_t take = std::min<std::size_t>({5, P.size(), 100 - times});
        for (std::size_t q = 0; q < take; ++q, ++times) {
            const std::uint32_t j = P[q * P.size() / take];
            auto ok = admissible_replacements(t, r, j);
            std::size_t count = 0;
            for (std::uint32_t u = 0; u < ok.size(); ++u) {
                if (!ok[u]) continue;
                ++count;
                auto mark = t.arena->mark();
                auto t2 = pivot_trajectory(t, r, j, u);
                PivotRecord r2(t2, m.constants);
                ++tried;
                changed += r2.P(r2.final_steps()) != P;
                t.arena->rollback(mark);
            }
            min_count = std::min(min_count, count);
        }
    }
    return {min_count >= 304 && changed == 0,
            std::to_string(times) + " pivotal times, min admissible " + std::to_string(min_count) + ", " +
                std::to_string(tried) + " replacements, P changed in " + std::to_string(changed)};
}

Outcome alignment(const ExperimentConfig& cfg, const PivotContext& ctx) {
    const auto& m = ctx.model;
    const std::size_t n = 200 * static_cast<std::size_t>(m.forward->block_length());
    std::size_t pv = 0, gv = 0, failed = 0;
    double maxp = 0, ming = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 100; ++i) {
        auto t = sample_trajectory(m.forward, n, require_seed(cfg), trial_stream(9003, i));
        PivotRecord r(t, m.constants);
        auto al = pivotal_alignment(t, r, n);
        pv += al.product_violations;
        gv += al.gain_violations;
        failed += !al.ok;
        maxp = std::max(maxp, al.max_product.value);
        if (al.points.size() > 2) ming = std::min(ming, al.min_gain);
    }
    return {pv == 0 && gv == 0 && failed == 0,
            "100 paths of 200 blocks, product violations " + std::to_string(pv) + " (max " + fd(maxp) + " < F0 " +
                fd(m.constants.F0) + "), gain violations " + std::to_string(gv) + " (min " + fd(ming) +
                " >= L0/2 " + fd(m.constants.L0 / 2) + ")"};
}

Outcome decay(const ExperimentConfig& cfg) {
    auto m = reference_model(cfg, true);
    auto d = pivot_decay(m.forward, m.constants, {64, 128, 256, 512, 1024}, 4000, require_seed(cfg));
    std::string hits;
    for (auto h : d.hits) hits += (hits.empty() ? "" : ",") + std::to_string(h);
    return {d.fit.points >= 2 && d.fit.slope < 0 && d.fit.r2 >= 0.8,
            "alpha " + fd(static_cast<double>(m.forward->alpha())) + ", kappa " + fd(d.kappa) + ", hits " + hits +
                " of 4000, slope " + fd(d.fit.slope) + ", R^2 " + fd(d.fit.r2)};
}

}  // namespace

int main(int argc, char** argv) {
    std::string config_path;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string x; std::getline(ss, x, ',');) only.insert(std::stoi(x));
        } else {
            config_path = a;
        }
    }
    ExperimentConfig cfg;
    try {
        if (!config_path.empty()) cfg = load_config(config_path);
        if (!cfg.run.seed) cfg.run.seed = 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    // Suites run with their own defaults for n and trials.
    cfg.run.n = cfg.run.trials = 0;
    cfg.run.checkpoints.clear();
    const unsigned threads = std::max(1u, std::thread::hardware_concurrency());

    PivotContext ctx;
    struct Criterion {
        int id;
        std::string name;
        double limit_s;  // 0: none
        std::function<Outcome()> run;
    };
    std::vector<Criterion> all{
        {1, "exactness", 10, [&] { return exactness(cfg); }},
        {2, "schottky artifact", 60, [&] { return schottky(cfg, config_path); }},
        {3, "pivot gain", 120, [&] { return gain(cfg, ctx); }},
        {4, "backtrack tail", 0, [&] { return tail(ctx); }},
        {5, "pivoting equivalence", 0, [&] { return pivoting(cfg, ctx); }},
        {6, "alignment bounds", 0, [&] { return alignment(cfg, ctx); }},
        {7, "pivot decay", 0, [&] { return decay(cfg); }},
        {8, "log deviation", 0,
         [&] { return from_suite(run_suite("logdev", cfg, threads), {"tau_le_d", "p99_stable"}); }},
        {9, "clt", 600,
         [&] { return from_suite(run_suite("clt", cfg, threads), {"ks_displacement", "ks_translation"}); }},
        {10, "converse diagnostic", 0,
         [&] {
             return from_suite(run_suite("converse", cfg, threads), {"heavy_slope_positive", "heavy_dominates_control"});
         }},
        {11, "lil (diagnostic)", 0, [&] { return from_suite(run_suite("lil", cfg, threads), {"running_max_window"}); }},
        {12, "tracking", 0,
         [&] { return from_suite(run_suite("tracking", cfg, threads), {"quasi_geodesic", "p99_stable"}); }},
    };
    // 4, 5 and 6 reuse the model built by 3.
    if (!only.empty() && (only.count(4) || only.count(5) || only.count(6))) only.insert(3);

    int failures = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_s > 0 && secs >= c.limit_s) {
            o.pass = false;
            o.detail += "; took longer than " + fd(c.limit_s) + " s";
        }
        char timing[32];
        std::snprintf(timing, sizeof timing, "%.1f s", secs);
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " " << c.name << ": " << o.detail << " ["
                  << timing << "]" << std::endl;
        failures += !o.pass;
    }
    return failures ? 1 : 0;
}
