#include "pivotwalk/suites.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "pivotwalk/stats.hpp"

namespace pw {

using nlohmann::json;

namespace {

std::size_t pick(std::size_t v, std::size_t def) { return v ? v : def; }

double rel_change(double from, double to) {
    if (from == 0) return to == 0 ? 0 : std::numeric_limits<double>::infinity();
    return std::abs(to / from - 1);
}

Assertion check(std::string name, bool pass, std::string detail) {
    Assertion a;
    a.name = std::move(name);
    a.pass = pass;
    a.detail = std::move(detail);
    return a;
}

std::string fd(double x) { return format_double(x); }

json est_json(const Estimate& e) { return {{"value", e.value}, {"half_width", e.half_width}, {"trials", e.trials}}; }

json fit_json(const Fit& f) {
    return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"slope_se", f.slope_se}, {"points", f.points}};
}

void require_tree(const ExperimentConfig& cfg, const std::string& suite) {
    if (cfg.model.space != "tree") throw ConfigError("suite " + suite + " runs on the tree model only");
}

// Dump points of a long path: powers of two and the end.
std::vector<std::size_t> dump_points(std::size_t n) {
    std::vector<std::size_t> v;
    for (std::size_t k = 1; k < n; k *= 2) v.push_back(k);
    v.push_back(n);
    return v;
}

template <class E>
std::vector<std::size_t> draw_steps(const StepDistribution<E>& mu, std::size_t n, Rng rng) {
    std::vector<std::size_t> s(n);
    for (auto& x : s) x = mu.sample(rng);
    return s;
}

template <class E>
json path_json(const StepDistribution<E>& mu, const std::vector<std::size_t>& cps, Rng rng) {
    auto p = sample_checkpoints(mu, cps, rng);
    json pts = json::array();
    for (std::size_t j = 0; j < p.n.size(); ++j) pts.push_back({{"n", p.n[j]}, {"d", p.d[j]}, {"tau", p.tau[j]}});
    return pts;
}

// ---- pivot-stats

struct PivotTrial {
    std::vector<StepRecord> history;
    std::vector<std::size_t> Q;
};

Trajectory pivot_trajectory_of(const PivotModel& pm, std::size_t n, std::uint64_t seed, std::uint64_t experiment,
                               std::size_t i) {
    return sample_trajectory(pm.forward, n, seed, trial_stream(experiment, i));
}

PivotTrial pivot_trial(const PivotModel& pm, std::size_t n, std::uint64_t seed, std::size_t i) {
    auto t = pivot_trajectory_of(pm, n, seed, streams::pivot_stats, i);
    PivotRecord r(t, pm.constants);
    PivotTrial out;
    out.history = r.history();
    // |Q_n| with the horizon at the last final step.
    out.Q.resize(out.history.size());
    std::size_t m = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = out.history.size(); k-- > 0;) {
        m = std::min(m, out.history[k].P_size);
        out.Q[k] = m;
    }
    return out;
}

const std::vector<std::size_t> kDecayBlocks{64, 128, 256, 512, 1024};
constexpr std::size_t kDecayTrials = 4000;

SuiteResult suite_pivot_stats(const ExperimentConfig& cfg, unsigned threads) {
    require_tree(cfg, "pivot-stats");
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t n = pick(cfg.run.n, 2400), trials = pick(cfg.run.trials, 100);
    auto pm = reference_model(cfg);
    std::vector<PivotTrial> per(trials);
    parallel_for(trials, threads, [&](std::size_t i) { per[i] = pivot_trial(pm, n, seed, i); });

    SuiteResult res;
    res.suite = "pivot-stats";
    CsvTable steps{"steps", {"trial", "step", "kind", "P_size", "Q_size", "increment", "backtrack_depth"}, {}};
    std::size_t total = 0, gains = 0, drops[3] = {0, 0, 0};
    std::map<std::size_t, std::size_t> hist;
    std::vector<std::size_t> drop_trials[3];
    for (std::size_t i = 0; i < trials; ++i) {
        const auto& h = per[i].history;
        for (std::size_t k = 0; k < h.size(); ++k) {
            steps.row(i, h[k].step, to_string(h[k].kind), h[k].P_size, per[i].Q[k], h[k].increment,
                      h[k].backtrack_depth);
            ++total;
            gains += h[k].increment == 1;
            for (int j = 0; j < 3; ++j)
                if (h[k].increment < -j) {
                    ++drops[j];
                    if (drop_trials[j].empty() || drop_trials[j].back() != i) drop_trials[j].push_back(i);
                }
            ++hist[h[k].backtrack_depth];
        }
    }
    CsvTable histogram{"histogram", {"backtrack_depth", "count"}, {}};
    for (auto [d, c] : hist) histogram.row(d, c);

    auto pmd = reference_model(cfg, true);
    auto dec = pivot_decay(pmd.forward, pmd.constants, kDecayBlocks, kDecayTrials, seed, 0, threads);
    CsvTable decay{"decay", {"blocks", "hits", "probability"}, {}};
    for (std::size_t g = 0; g < dec.blocks.size(); ++g) decay.row(dec.blocks[g], dec.hits[g], dec.probability[g]);
    res.tables = {steps, histogram, decay};

    const double T = static_cast<double>(total);
    auto sig = [&](double p) { return total ? std::sqrt(p * (1 - p) / T) : 0.0; };
    const double gain = total ? static_cast<double>(gains) / T : 0;
    res.summary = {{"n", n},
                   {"trials", trials},
                   {"steps", total},
                   {"gain_frequency", gain},
                   {"alpha", pm.forward->alpha()},
                   {"constants", constants_json(pm.constants)},
                   {"schottky_size", pm.S0.set.size()},
                   {"decay",
                    {{"alpha", pmd.forward->alpha()},
                     {"trials", kDecayTrials},
                     {"density", dec.density},
                     {"kappa", dec.kappa},
                     {"fit", fit_json(dec.fit)}}}};
    res.assertions.push_back(check("block_steps_at_least_1e4", total >= 10000, std::to_string(total) + " steps"));
    const double gb = 0.9 - 3 * sig(0.9);
    res.assertions.push_back(
        check("gain_frequency", gain >= gb, "P(increment = +1) = " + fd(gain) + ", bound " + fd(gb)));
    for (int j = 0; j < 3; ++j) {
        const double p = std::pow(10.0, -(j + 1));
        const double f = total ? static_cast<double>(drops[j]) / T : 0;
        const double b = p + 3 * sig(p);
        res.summary["drop_frequency"].push_back(f);
        auto a = check("backtrack_tail_j" + std::to_string(j), f <= b,
                       "P(drop > " + std::to_string(j) + ") = " + fd(f) + ", bound " + fd(b));
        if (!a.pass) a.offending_trials = drop_trials[j];
        res.assertions.push_back(a);
    }
    res.assertions.push_back(check("decay_slope_negative", dec.fit.points >= 2 && dec.fit.slope < 0,
                                   "slope " + fd(dec.fit.slope) + " over " + std::to_string(dec.fit.points) + " points"));
    res.assertions.push_back(check("decay_r2", dec.fit.points >= 2 && dec.fit.r2 >= 0.8, "R^2 " + fd(dec.fit.r2)));
    return res;
}

json replay_pivot_stats(const ExperimentConfig& cfg, std::size_t i) {
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t n = pick(cfg.run.n, 2400);
    auto pm = reference_model(cfg);
    auto t = pivot_trajectory_of(pm, n, seed, streams::pivot_stats, i);
    PivotRecord r(t, pm.constants);
    auto pt = pivot_trial(pm, n, seed, i);
    json hist = json::array();
    for (std::size_t k = 0; k < pt.history.size(); ++k) {
        const auto& h = pt.history[k];
        hist.push_back({{"step", h.step},
                        {"kind", to_string(h.kind)},
                        {"P_size", h.P_size},
                        {"Q_size", pt.Q[k]},
                        {"increment", h.increment},
                        {"backtrack_depth", h.backtrack_depth},
                        {"chain", h.chain}});
    }
    return {{"steps", t.steps},
            {"rho", t.rho},
            {"successes", t.T},
            {"final_P", r.P(r.final_steps())},
            {"history", hist},
            {"final_position_length", t.arena->length(t.pos.back())}};
}

// ---- clt

template <class E>
SuiteResult suite_clt(const StepDistribution<E>& mu, const ExperimentConfig& cfg, unsigned threads) {
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t n = pick(cfg.run.n, 1024), trials = pick(cfg.run.trials, 2000);
    auto r = clt_samples(mu, n, trials, seed, threads);
    SuiteResult res;
    res.suite = "clt";
    CsvTable t{"trials", {"trial", "displacement", "translation"}, {}};
    std::vector<std::size_t> over;
    for (std::size_t i = 0; i < trials; ++i) {
        t.row(i, r.displacement[i], r.translation[i]);
        if (std::abs(r.displacement[i] - r.translation[i]) > r.pair_bound) over.push_back(i);
    }
    res.tables = {t};
    res.summary = {{"n", n},
                   {"trials", trials},
                   {"space", cfg.model.space},
                   {"lambda", est_json(r.lambda)},
                   {"sigma", r.sigma},
                   {"ks_displacement", r.ks_displacement},
                   {"ks_translation", r.ks_translation},
                   {"max_pair_diff", r.max_pair_diff},
                   {"pair_bound", r.pair_bound},
                   {"arithmetic_warning", r.arithmetic_warning}};
    res.assertions.push_back(check("ks_displacement", r.ks_displacement <= 0.05, "KS " + fd(r.ks_displacement)));
    res.assertions.push_back(check("ks_translation", r.ks_translation <= 0.05, "KS " + fd(r.ks_translation)));
    auto a = check("pair_bound", over.empty(), "max |disp - trans| " + fd(r.max_pair_diff) + ", bound " + fd(r.pair_bound));
    a.offending_trials = over;
    res.assertions.push_back(a);
    auto w = check("non_arithmetic", !r.arithmetic_warning,
                   r.arithmetic_warning ? "no witness of non-arithmeticity up to length 3" : "witness found");
    w.diagnostic = true;
    res.assertions.push_back(w);
    return res;
}

template <class E>
json replay_clt(const StepDistribution<E>& mu, const ExperimentConfig& cfg, std::size_t i) {
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t n = pick(cfg.run.n, 1024), trials = pick(cfg.run.trials, 2000);
    const double lam = estimate_drift(mu, n, trials, seed, 1, streams::lambda).value;
    Rng rng(seed, streams::clt, i);
    auto p = sample_checkpoints(mu, {n}, rng);
    const double rn = std::sqrt(static_cast<double>(n));
    return {{"steps", draw_steps(mu, n, Rng(seed, streams::clt, i))},
            {"path", path_json(mu, dump_points(n), Rng(seed, streams::clt, i))},
            {"lambda", lam},
            {"displacement", (p.d[0] - lam * static_cast<double>(n)) / rn},
            {"translation", (p.tau[0] - lam * static_cast<double>(n)) / rn}};
}

// ---- lil

struct LilTrial {
    double max_d = 0, max_tau = 0;
    std::size_t violations = 0;
};

template <class E>
LilTrial lil_trial(const StepDistribution<E>& mu, std::size_t n, double lam, std::uint64_t seed, std::size_t i) {
    std::vector<std::size_t> cp(n - 15);
    std::iota(cp.begin(), cp.end(), std::size_t{16});
    Rng rng(seed, streams::lil, i);
    auto p = sample_checkpoints(mu, cp, rng);
    return {lil_series(p, lam).running_max.back(), lil_series(p, lam, true).running_max.back(), p.tau_violations};
}

constexpr std::size_t kLilVarN = 4096, kLilVarTrials = 2000;

template <class E>
SuiteResult suite_lil(const StepDistribution<E>& mu, const ExperimentConfig& cfg, unsigned threads) {
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t n = pick(cfg.run.n, 65536), trials = pick(cfg.run.trials, 200);
    if (n < 16) throw ConfigError("lil needs n >= 16");
    auto lam = estimate_drift(mu, n, trials, seed, threads, streams::lambda);
    auto var = estimate_variance(mu, kLilVarN, kLilVarTrials, seed, threads);
    const double sig = std::sqrt(var.value);
    std::vector<LilTrial> per(trials);
    parallel_for(trials, threads, [&](std::size_t i) { per[i] = lil_trial(mu, n, lam.value, seed, i); });
    SuiteResult res;
    res.suite = "lil";
    CsvTable t{"trials", {"trial", "running_max_d", "running_max_tau", "tau_violations"}, {}};
    std::vector<double> md, mt;
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < trials; ++i) {
        t.row(i, per[i].max_d, per[i].max_tau, per[i].violations);
        md.push_back(per[i].max_d);
        mt.push_back(per[i].max_tau);
        if (per[i].violations) bad.push_back(i);
    }
    res.tables = {t};
    auto ed = mean_estimate(md, seed), et = mean_estimate(mt, seed);
    res.summary = {{"n", n},
                   {"trials", trials},
                   {"start", 16},
                   {"lambda", est_json(lam)},
                   {"variance", est_json(var)},
                   {"sigma", sig},
                   {"mean_running_max_d", est_json(ed)},
                   {"mean_running_max_tau", est_json(et)},
                   {"ratio_d", ed.value / sig},
                   {"ratio_tau", et.value / sig}};
    auto w = check("running_max_window", ed.value >= 0.5 * sig && ed.value <= 1.5 * sig,
                   "mean running max " + fd(ed.value) + " against sigma " + fd(sig) + " (diagnostic)");
    w.diagnostic = true;
    res.assertions.push_back(w);
    auto a = check("tau_le_d", bad.empty(), "tau > d at some step in " + std::to_string(bad.size()) + " trials");
    a.offending_trials = bad;
    res.assertions.push_back(a);
    return res;
}

template <class E>
json replay_lil(const StepDistribution<E>& mu, const ExperimentConfig& cfg, std::size_t i) {
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t n = pick(cfg.run.n, 65536), trials = pick(cfg.run.trials, 200);
    if (n < 16) throw ConfigError("lil needs n >= 16");
    const double lam = estimate_drift(mu, n, trials, seed, 1, streams::lambda).value;
    auto r = lil_trial(mu, n, lam, seed, i);
    return {{"steps", draw_steps(mu, n, Rng(seed, streams::lil, i))},
            {"path", path_json(mu, dump_points(n), Rng(seed, streams::lil, i))},
            {"lambda", lam},
            {"running_max_d", r.max_d},
            {"running_max_tau", r.max_tau},
            {"tau_violations", r.violations}};
}

// ---- logdev

struct LogdevTrial {
    double lo = 0, hi = 0;  // sup of (d - tau)/log m over (n/4, n/2] and (n/2, n]
    double at_half = 0, at_n = 0;
    std::size_t violations = 0;
};

template <class E>
LogdevTrial logdev_trial(const StepDistribution<E>& mu, std::size_t n, std::uint64_t seed, std::size_t i) {
    std::vector<std::size_t> cp(n - n / 4);
    std::iota(cp.begin(), cp.end(), n / 4 + 1);
    Rng rng(seed, streams::logdev, i);
    auto p = sample_checkpoints(mu, cp, rng);
    auto s = log_deviation_series(p);
    LogdevTrial t;
    t.violations = p.tau_violations;
    for (std::size_t j = 0; j < s.n.size(); ++j) {
        const double v = s.value[j] / std::log(static_cast<double>(s.n[j]));
        double& w = s.n[j] <= n / 2 ? t.lo : t.hi;
        w = std::max(w, v);
        if (s.n[j] == n / 2) t.at_half = v;
        if (s.n[j] == n) t.at_n = v;
    }
    return t;
}

template <class E>
SuiteResult suite_logdev(const StepDistribution<E>& mu, const ExperimentConfig& cfg, unsigned threads) {
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t n = pick(cfg.run.n, 65536), trials = pick(cfg.run.trials, 100);
    if (n < 16) throw ConfigError("logdev needs n >= 16");
    std::vector<LogdevTrial> per(trials);
    parallel_for(trials, threads, [&](std::size_t i) { per[i] = logdev_trial(mu, n, seed, i); });
    SuiteResult res;
    res.suite = "logdev";
    CsvTable t{"trials", {"trial", "window_sup_lower", "window_sup_upper", "at_half_n", "at_n", "tau_violations"}, {}};
    std::vector<double> lo, hi, ah, an;
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < trials; ++i) {
        const auto& r = per[i];
        t.row(i, r.lo, r.hi, r.at_half, r.at_n, r.violations);
        lo.push_back(r.lo);
        hi.push_back(r.hi);
        ah.push_back(r.at_half);
        an.push_back(r.at_n);
        if (r.violations) bad.push_back(i);
    }
    res.tables = {t};
    const double ql = quantile(lo, 0.99), qh = quantile(hi, 0.99);
    const double fl = quantile(ah, 0.99), fh = quantile(an, 0.99);
    const double ch = rel_change(ql, qh);
    res.summary = {{"n", n},
                   {"trials", trials},
                   {"p99_window_lower", ql},
                   {"p99_window_upper", qh},
                   {"window_change", ch},
                   {"median_window_lower", quantile(lo, 0.5)},
                   {"median_window_upper", quantile(hi, 0.5)},
                   {"p99_at_half_n", fl},
                   {"p99_at_n", fh},
                   {"fixed_change", rel_change(fl, fh)}};
    auto a = check("tau_le_d", bad.empty(), "tau > d at some step in " + std::to_string(bad.size()) + " trials");
    a.offending_trials = bad;
    res.assertions.push_back(a);
    res.assertions.push_back(check("p99_stable", ch < 0.2, "p99 " + fd(ql) + " -> " + fd(qh) + ", change " + fd(ch)));
    return res;
}

template <class E>
json replay_logdev(const StepDistribution<E>& mu, const ExperimentConfig& cfg, std::size_t i) {
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t n = pick(cfg.run.n, 65536);
    if (n < 16) throw ConfigError("logdev needs n >= 16");
    auto r = logdev_trial(mu, n, seed, i);
    return {{"steps", draw_steps(mu, n, Rng(seed, streams::logdev, i))},
            {"path", path_json(mu, dump_points(n), Rng(seed, streams::logdev, i))},
            {"window_sup_lower", r.lo},
            {"window_sup_upper", r.hi},
            {"at_half_n", r.at_half},
            {"at_n", r.at_n},
            {"tau_violations", r.violations}};
}

// ---- tracking

constexpr std::size_t kTrackingTail = 384, kTrackingPairs = 2000;

struct TrackTrial {
    double lo = 0, hi = 0;
    std::size_t gamma = 0, pairs = 0, violations = 0;
    double max_excess = 0, mult = 0, add = 0;
    std::vector<double> dist;
};

TrackTrial tracking_trial(const PivotModel& pm, std::size_t K, std::uint64_t seed, std::size_t i, bool keep = false) {
    auto t = pivot_trajectory_of(pm, K + kTrackingTail, seed, streams::tracking, i);
    PivotRecord r(t, pm.constants);
    Rng prng(seed, streams::tracking, i);
    auto rep = tracking_series(t, r, K, prng, kTrackingPairs);
    TrackTrial out;
    for (std::size_t k = K / 4 + 1; k <= K; ++k) {
        const double v = rep.dist[k] / std::log(static_cast<double>(k));
        if (k <= K / 2)
            out.lo = std::max(out.lo, v);
        else
            out.hi = std::max(out.hi, v);
    }
    out.gamma = rep.gamma.size();
    out.pairs = rep.pairs_checked;
    out.violations = rep.quasi_violations;
    out.max_excess = rep.max_excess;
    out.mult = rep.mult;
    out.add = rep.add;
    if (keep) out.dist = rep.dist;
    return out;
}

SuiteResult suite_tracking(const ExperimentConfig& cfg, unsigned threads) {
    require_tree(cfg, "tracking");
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t K = pick(cfg.run.n, 16384), trials = pick(cfg.run.trials, 100);
    if (K < 16) throw ConfigError("tracking needs n >= 16");
    auto pm = reference_model(cfg);
    std::vector<TrackTrial> per(trials);
    parallel_for(trials, threads, [&](std::size_t i) { per[i] = tracking_trial(pm, K, seed, i); });
    SuiteResult res;
    res.suite = "tracking";
    CsvTable t{"trials",
               {"trial", "window_sup_lower", "window_sup_upper", "gamma_points", "pairs", "violations", "max_excess"},
               {}};
    std::vector<double> lo, hi;
    std::vector<std::size_t> bad;
    std::size_t pairs = 0, viol = 0;
    double excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trials; ++i) {
        const auto& r = per[i];
        t.row(i, r.lo, r.hi, r.gamma, r.pairs, r.violations, r.max_excess);
        lo.push_back(r.lo);
        hi.push_back(r.hi);
        pairs += r.pairs;
        viol += r.violations;
        excess = std::max(excess, r.max_excess);
        if (r.violations) bad.push_back(i);
    }
    res.tables = {t};
    const double ql = quantile(lo, 0.99), qh = quantile(hi, 0.99), ch = rel_change(ql, qh);
    res.summary = {{"n", K},
                   {"trials", trials},
                   {"trajectory_length", K + kTrackingTail},
                   {"quasi_geodesic", {{"mult", per.front().mult}, {"add", per.front().add}}},
                   {"pairs_checked", pairs},
                   {"max_excess", excess},
                   {"p99_window_lower", ql},
                   {"p99_window_upper", qh},
                   {"window_change", ch},
                   {"median_window_lower", quantile(lo, 0.5)},
                   {"median_window_upper", quantile(hi, 0.5)},
                   {"mean_window_lower", mean_estimate(lo, seed).value},
                   {"mean_window_upper", mean_estimate(hi, seed).value},
                   {"constants", constants_json(pm.constants)}};
    auto a = check("quasi_geodesic", viol == 0,
                   std::to_string(viol) + " violations in " + std::to_string(pairs) + " pairs, max excess " + fd(excess));
    a.offending_trials = bad;
    res.assertions.push_back(a);
    res.assertions.push_back(check("p99_stable", ch < 0.2, "p99 " + fd(ql) + " -> " + fd(qh) + ", change " + fd(ch)));
    return res;
}

json replay_tracking(const ExperimentConfig& cfg, std::size_t i) {
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t K = pick(cfg.run.n, 16384);
    if (K < 16) throw ConfigError("tracking needs n >= 16");
    auto pm = reference_model(cfg);
    auto tr = pivot_trajectory_of(pm, K + kTrackingTail, seed, streams::tracking, i);
    auto r = tracking_trial(pm, K, seed, i, true);
    json dist = json::array();
    for (std::size_t k : dump_points(K)) dist.push_back({{"k", k}, {"dist", r.dist[k]}});
    return {{"steps", tr.steps},
            {"rho", tr.rho},
            {"window_sup_lower", r.lo},
            {"window_sup_upper", r.hi},
            {"gamma_points", r.gamma},
            {"pairs", r.pairs},
            {"violations", r.violations},
            {"max_excess", r.max_excess},
            {"dist", dist}};
}

// ---- converse

constexpr double kHeavyQ = 2.5;
constexpr std::uint64_t kHeavyT = 1000000;
const std::vector<std::uint64_t> kSweep{10000, 100000, 1000000};

std::vector<std::size_t> converse_grid(const ExperimentConfig& cfg) {
    if (!cfg.run.checkpoints.empty()) return cfg.run.checkpoints;
    return {1024, 2048, 4096, 8192, 16384};
}

SuiteResult suite_converse(const ExperimentConfig& cfg, unsigned threads) {
    require_tree(cfg, "converse");
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t trials = pick(cfg.run.trials, 1000);
    const auto grid = converse_grid(cfg);
    auto r = converse_diagnostic(kHeavyQ, kHeavyT, tree_law(cfg.model), grid, trials, seed, kSweep, threads);
    SuiteResult res;
    res.suite = "converse";
    CsvTable sp{"spread", {"model", "n", "iqr_d", "iqr_tau"}, {}};
    for (const auto& p : r.heavy.points) sp.row("heavy", p.n, p.iqr_d, p.iqr_tau);
    for (const auto& p : r.control.points) sp.row("control", p.n, p.iqr_d, p.iqr_tau);
    CsvTable sw{"sweep", {"truncation", "slope"}, {}};
    for (auto [T, s] : r.truncation_sweep) sw.row(T, s);
    res.tables = {sp, sw};
    res.summary = {{"trials", trials},
                   {"grid", grid},
                   {"q", kHeavyQ},
                   {"truncation", kHeavyT},
                   {"heavy_fit_d", fit_json(r.heavy.fit_d)},
                   {"heavy_fit_tau", fit_json(r.heavy.fit_tau)},
                   {"control_fit_d", fit_json(r.control.fit_d)},
                   {"control_fit_tau", fit_json(r.control.fit_tau)}};
    const double h = r.heavy.fit_d.slope, c = r.control.fit_d.slope;
    res.assertions.push_back(check("heavy_slope_positive", h > 0, "slope " + fd(h)));
    res.assertions.push_back(
        check("heavy_dominates_control", h >= 3 * std::abs(c), "heavy " + fd(h) + ", control " + fd(c)));
    return res;
}

json replay_converse(const ExperimentConfig& cfg, std::size_t i) {
    const std::uint64_t seed = require_seed(cfg);
    const auto grid = converse_grid(cfg);
    auto mu = tree_law(cfg.model);
    HeavyTailModel heavy(kHeavyQ, kHeavyT);
    json pts = json::array();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        auto [hd, ht] = spread_trial(heavy, grid[g], g, seed, i);
        auto [cd, ct] = spread_trial(mu, grid[g], g, seed, i);
        pts.push_back({{"n", grid[g]}, {"heavy_d", hd}, {"heavy_tau", ht}, {"control_d", cd}, {"control_tau", ct}});
    }
    return {{"points", pts}};
}

// ---- deviation

const std::vector<std::size_t> kDeviationK{8, 16, 32, 64};
const std::vector<std::size_t> kOppositeHorizons{1024, 2048};
constexpr std::size_t kOppositeTrials = 1000;
constexpr std::size_t kDeviationHorizon = 4;

Word deviation_target(const ExperimentConfig& cfg) { return Word::generator(cfg.model.rank, -1).pow(512); }

SuiteResult suite_deviation(const ExperimentConfig& cfg, unsigned threads) {
    require_tree(cfg, "deviation");
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t trials = pick(cfg.run.trials, 20000);
    const auto ks = cfg.run.checkpoints.empty() ? kDeviationK : cfg.run.checkpoints;
    auto mu = tree_law(cfg.model);
    auto r = deviation_probability_check(mu, deviation_target(cfg), ks, trials, seed, kDeviationHorizon, threads);
    auto opp = opposite_deviation_moment(mu, 1, 0.5, kOppositeHorizons, kOppositeTrials, seed, threads);
    SuiteResult res;
    res.suite = "deviation";
    CsvTable t{"probability", {"k", "hits", "frequency"}, {}};
    for (std::size_t j = 0; j < ks.size(); ++j) t.row(r.k[j], r.hits[j], r.frequency[j]);
    CsvTable o{"opposite", {"horizon", "power_mean", "power_half_width", "exp_mean", "exp_half_width"}, {}};
    for (const auto& m : opp)
        o.row(m.horizon, m.power.value, m.power.half_width, m.exponential.value, m.exponential.half_width);
    res.tables = {t, o};
    const double ch = rel_change(opp.front().power.value, opp.back().power.value);
    res.summary = {{"trials", trials},
                   {"target", "A^512"},
                   {"horizon_multiplier", kDeviationHorizon},
                   {"fit", fit_json(r.fit)},
                   {"opposite_trials", kOppositeTrials},
                   {"opposite_power_change", ch}};
    res.assertions.push_back(check("deviation_decays", r.fit.slope < 0, "log-frequency slope " + fd(r.fit.slope)));
    res.assertions.push_back(check("opposite_moment_stable", ch < 0.1,
                                   "E[max^2] " + fd(opp.front().power.value) + " -> " + fd(opp.back().power.value)));
    return res;
}

json replay_deviation(const ExperimentConfig& cfg, std::size_t i) {
    const std::uint64_t seed = require_seed(cfg);
    const auto ks = cfg.run.checkpoints.empty() ? kDeviationK : cfg.run.checkpoints;
    auto mu = tree_law(cfg.model);
    const std::size_t H = *std::max_element(ks.begin(), ks.end()) * kDeviationHorizon;
    return {{"steps", draw_steps(mu, H, Rng(seed, streams::deviation, i))},
            {"k", ks},
            {"hits", deviation_trial(mu, deviation_target(cfg), ks, kDeviationHorizon, seed, i)}};
}

// ---- dyadic

constexpr int kExactM = 3, kExactK = 12, kMomentM = 2, kMomentK = 7;

DyadicDecomposition exact_dyadic(const WordDistribution& mu, std::uint64_t seed) {
    Rng rng(seed, streams::dyadic_exact, 0);
    TreeArena arena(mu.support().front().rank());
    auto tokens = register_tokens(arena, mu);
    auto pos = sample_path(arena, tokens, mu, std::size_t{1} << (kExactM + kExactK), rng);
    return dyadic_decompose(arena, pos, kExactM, kExactK);
}

SuiteResult suite_dyadic(const ExperimentConfig& cfg, unsigned threads) {
    require_tree(cfg, "dyadic");
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t trials = pick(cfg.run.trials, 500);
    auto mu = tree_law(cfg.model);
    auto D = exact_dyadic(mu, seed);
    auto mom = dyadic_fourth_moments(mu, kMomentM, kMomentK, trials, seed, threads);
    SuiteResult res;
    res.suite = "dyadic";
    CsvTable t{"moments", {"level", "mean_b4", "half_width"}, {}};
    double worst = 0;
    for (std::size_t k = 0; k < mom.size(); ++k) {
        t.row(k, mom[k].value, mom[k].half_width);
        worst = std::max(worst, mom[k].value);
    }
    res.tables = {t};
    res.summary = {{"trials", trials},
                   {"exact_path_length", std::size_t{1} << (kExactM + kExactK)},
                   {"identity_failures", D.identity_failures},
                   {"max_identity_error", D.max_identity_error},
                   {"max_telescoping_error", D.max_telescoping_error},
                   {"moment_m", kMomentM},
                   {"moment_levels", kMomentK},
                   {"max_level_mean_b4", worst}};
    res.assertions.push_back(check("identity_exact", D.identity_failures == 0 && D.max_identity_error == 0,
                                   std::to_string(D.identity_failures) + " failures"));
    res.assertions.push_back(
        check("telescoping_exact", D.max_telescoping_error == 0, "max error " + fd(D.max_telescoping_error)));
    res.assertions.push_back(check("fourth_moments_bounded", worst < 100, "max level mean " + fd(worst)));
    return res;
}

json replay_dyadic(const ExperimentConfig& cfg, std::size_t i) {
    const std::uint64_t seed = require_seed(cfg);
    auto mu = tree_law(cfg.model);
    return {{"steps", draw_steps(mu, std::size_t{1} << (kMomentM + kMomentK), Rng(seed, streams::dyadic, i))},
            {"level_mean_b4", dyadic_trial_moments(mu, kMomentM, kMomentK, seed, i)}};
}

template <class F>
auto on_law(const ExperimentConfig& cfg, F f) {
    if (cfg.model.space == "tree") return f(tree_law(cfg.model));
    return f(plane_law(cfg.model));
}

std::size_t suite_trials(const std::string& s, const ExperimentConfig& cfg) {
    static const std::map<std::string, std::size_t> def{{"pivot-stats", 100}, {"clt", 2000},      {"lil", 200},
                                                        {"logdev", 100},      {"tracking", 100},  {"converse", 1000},
                                                        {"deviation", 20000}, {"dyadic", 500}};
    return pick(cfg.run.trials, def.at(s));
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> v{"pivot-stats", "clt",       "lil",      "logdev",
                                            "tracking",    "converse", "deviation", "dyadic"};
    return v;
}

SearchResult run_schottky_search(const ExperimentConfig& cfg) {
    const auto& s = cfg.schottky;
    if (cfg.model.space != "tree") throw ConfigError("schottky-search runs on the tree model only");
    if (cfg.model.rank < 2) throw ConfigError("model.rank must be at least 2");
    if (s.pattern_length < 1) throw ConfigError("schottky.pattern_length must be positive");
    if (s.target_size < 1) throw ConfigError("schottky.target_size must be positive");
    const Word a = Word::generator(cfg.model.rank, 1), b = Word::generator(cfg.model.rank, 2);
    const double K = pattern_constant(a, b, s.pattern_length);
    const double Kp = s.Kprime > 0 ? s.Kprime : GromovConstants::from(K, 0.0).L0;
    return search_schottky(a, b, s.target_size, Kp, s.probe_seed, s.pattern_length, s.probe_count);
}

PivotModel reference_model(const ExperimentConfig& cfg, bool decay) {
    auto pc = pivot_config(cfg, decay);
    try {
        if (!cfg.schottky.artifact.empty()) return build_pivot_model(pc, load_schottky(cfg.schottky.artifact));
        return build_pivot_model(pc);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("pivot model: ") + e.what());
    }
}

SuiteResult run_suite(const std::string& name, const ExperimentConfig& cfg, unsigned threads) {
    if (threads < 1) threads = 1;
    require_seed(cfg);
    SuiteResult r;
    if (name == "pivot-stats")
        r = suite_pivot_stats(cfg, threads);
    else if (name == "clt")
        r = on_law(cfg, [&](const auto& mu) { return suite_clt(mu, cfg, threads); });
    else if (name == "lil")
        r = on_law(cfg, [&](const auto& mu) { return suite_lil(mu, cfg, threads); });
    else if (name == "logdev")
        r = on_law(cfg, [&](const auto& mu) { return suite_logdev(mu, cfg, threads); });
    else if (name == "tracking")
        r = suite_tracking(cfg, threads);
    else if (name == "converse")
        r = suite_converse(cfg, threads);
    else if (name == "deviation")
        r = suite_deviation(cfg, threads);
    else if (name == "dyadic")
        r = suite_dyadic(cfg, threads);
    else
        throw ConfigError("unknown suite '" + name + "'");
    r.summary["seed"] = require_seed(cfg);
    return r;
}

json replay_trial(const std::string& suite, const ExperimentConfig& cfg, std::size_t trial) {
    if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
        throw ConfigError("unknown suite '" + suite + "'");
    const std::size_t trials = suite_trials(suite, cfg);
    if (trial >= trials)
        throw ConfigError("trial " + std::to_string(trial) + " out of range (" + std::to_string(trials) + " trials)");
    json out;
    if (suite == "pivot-stats")
        out = replay_pivot_stats(cfg, trial);
    else if (suite == "clt")
        out = on_law(cfg, [&](const auto& mu) { return replay_clt(mu, cfg, trial); });
    else if (suite == "lil")
        out = on_law(cfg, [&](const auto& mu) { return replay_lil(mu, cfg, trial); });
    else if (suite == "logdev")
        out = on_law(cfg, [&](const auto& mu) { return replay_logdev(mu, cfg, trial); });
    else if (suite == "tracking")
        out = replay_tracking(cfg, trial);
    else if (suite == "converse")
        out = replay_converse(cfg, trial);
    else if (suite == "deviation")
        out = replay_deviation(cfg, trial);
    else
        out = replay_dyadic(cfg, trial);
    out["suite"] = suite;
    out["trial"] = trial;
    out["seed"] = require_seed(cfg);
    out["config_hash"] = config_hash(cfg);
    return out;
}

}  // namespace pw
