#include "pivotwalk/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <thread>

#include "pivotwalk/suites.hpp"

namespace pw {

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string out;
    unsigned threads = 0;
};

void add_common(CLI::App* app, Common& c, bool with_trials = true, bool with_threads = true) {
    app->add_option("--config", c.config, "YAML or JSON experiment config");
    app->add_option("--seed", c.seed, "master seed");
    if (with_trials) app->add_option("--trials", c.trials, "trial count");
    app->add_option("--out", c.out, std::string("output directory (else $") + kOutEnv + ", else the config)");
    if (with_threads) app->add_option("--threads", c.threads, "worker threads (results do not depend on it)");
}

ExperimentConfig load(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
    if (c.seed) cfg.run.seed = *c.seed;
    if (c.trials) cfg.run.trials = *c.trials;
    return cfg;
}

std::string out_dir(const Common& c, const ExperimentConfig& cfg) {
    if (!c.out.empty()) return c.out;
    if (const char* e = std::getenv(kOutEnv); e && *e) return e;
    return cfg.outputs;
}

unsigned thread_count(const Common& c) {
    if (c.threads) return c.threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

int print_result(const SuiteResult& r, const std::string& path, std::ostream& out) {
    for (const auto& a : r.assertions) {
        out << (a.pass ? "PASS " : (a.diagnostic ? "WARN " : "FAIL ")) << r.suite << "." << a.name << ": " << a.detail;
        if (!a.offending_trials.empty()) {
            out << " [trials";
            const std::size_t shown = std::min<std::size_t>(a.offending_trials.size(), 20);
            for (std::size_t i = 0; i < shown; ++i) out << " " << a.offending_trials[i];
            if (shown < a.offending_trials.size()) out << " ...";
            out << "]";
        }
        out << "\n";
    }
    out << "report: " << path << "\n";
    return r.pass() ? kExitPass : kExitFail;
}

int cmd_run(const std::string& suite, const Common& c, std::ostream& out) {
    auto cfg = load(c);
    require_seed(cfg);
    auto r = run_suite(suite, cfg, thread_count(c));
    std::string path = write_report(out_dir(c, cfg), r, cfg);
    if (!r.pass()) out << "seed " << require_seed(cfg) << " config_hash " << config_hash(cfg) << "\n";
    return print_result(r, path, out);
}

int cmd_search(const Common& c, std::ostream& out) {
    auto cfg = load(c);
    // The probes are the only randomness of the search.
    if (c.seed) cfg.schottky.probe_seed = *c.seed;
    auto found = run_schottky_search(cfg);
    const std::string dir = out_dir(c, cfg);
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/schottky.json";
    write_text(path, schottky_to_json(found.params, found.report, cfg.schottky.probe_seed, cfg.schottky.probe_count).dump(2) + "\n");
    out << (found.report.pass ? "PASS" : "FAIL") << " schottky-search: " << found.params.set.size() << " elements, K "
        << found.params.K << ", K' " << found.params.Kprime << ", power " << found.params.power << ", evidence "
        << found.report.evidence << "\n";
    out << "artifact: " << path << "\n";
    const bool enough = found.params.set.size() >= cfg.schottky.target_size;
    if (!enough) out << "search exhausted below the target size " << cfg.schottky.target_size << "\n";
    return found.report.pass && enough ? kExitPass : kExitFail;
}

int cmd_replay(const std::string& report, std::size_t trial, const Common& c, std::ostream& out) {
    auto rep = read_json(report);
    if (!rep.contains("suite") || !rep.contains("config") || !rep.contains("config_hash"))
        throw ConfigError(report + " is not a suite report");
    ExperimentConfig cfg = c.config.empty() ? config_from_json(rep["config"]) : load_config(c.config);
    if (c.seed) cfg.run.seed = *c.seed;
    if (c.trials) cfg.run.trials = *c.trials;
    const std::string want = rep["config_hash"].get<std::string>();
    if (config_hash(cfg) != want)
        throw ConfigError("config hash mismatch: report has " + want + ", replay config gives " + config_hash(cfg));
    auto dump = replay_trial(rep["suite"].get<std::string>(), cfg, trial);
    if (c.out.empty()) {
        out << dump.dump(2) << "\n";
    } else {
        std::filesystem::create_directories(c.out);
        const std::string path = c.out + "/replay_" + dump["suite"].get<std::string>() + "_" + std::to_string(trial) + ".json";
        write_text(path, dump.dump(2) + "\n");
        out << "replay: " << path << "\n";
    }
    return kExitPass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"pivotwalk: pivotal-time random walk experiments"};
    app.require_subcommand(1);

    Common search_opts, run_opts, pivot_opts, replay_opts;
    auto* search = app.add_subcommand("schottky-search", "search and verify a Schottky set, write the artifact");
    add_common(search, search_opts, false, false);

    std::string suite;
    auto* run = app.add_subcommand("run", "run a suite and write CSV and JSON reports");
    run->add_option("suite", suite, "suite name")->required()->check(CLI::IsMember(suite_names()));
    add_common(run, run_opts);

    auto* pivot = app.add_subcommand("pivot-stats", "shorthand for run pivot-stats");
    add_common(pivot, pivot_opts);

    std::string report;
    std::size_t trial = 0;
    auto* replay = app.add_subcommand("replay", "re-derive one trial of a report");
    replay->add_option("report", report, "suite JSON report")->required();
    replay->add_option("trial", trial, "trial index")->required();
    add_common(replay, replay_opts, true, false);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (*search) return cmd_search(search_opts, out);
        if (*run) return cmd_run(suite, run_opts, out);
        if (*pivot) return cmd_run("pivot-stats", pivot_opts, out);
        if (*replay) return cmd_replay(report, trial, replay_opts, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitUsage;
}

}  // namespace pw
