#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pivotwalk/cli.hpp"
#include "pivotwalk/config.hpp"
#include "pivotwalk/report.hpp"
#include "pivotwalk/rng.hpp"
#include "pivotwalk/suites.hpp"

using namespace pw;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("pivotwalk_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream o, e;
    int c = run_cli(args, o, e);
    return {c, o.str(), e.str()};
}

ExperimentConfig full_config() {
    ExperimentConfig c;
    c.model.space = "hyperbolic_plane";
    c.model.weights = {0.25, 0.25, 0.25, 0.25};
    c.model.matrices = {{2, 0, 0, 0.5}, {0.5, 0, 0, 2}, {1.25, 0.75, 0.75, 1.25}, {1.25, -0.75, -0.75, 1.25}};
    c.schottky.Kprime = 1500.5;
    c.schottky.artifact = "a b/c.json";
    c.run.seed = 18446744073709551615ull;
    c.run.n = 77;
    c.run.trials = 9;
    c.run.horizon_multiplier = 0.1;
    c.run.checkpoints = {1, 2, 3};
    c.outputs = "dir with: colon";
    return c;
}

}  // namespace

TEST_CASE("config round-trips through YAML and JSON") {
    for (const auto& c : {ExperimentConfig{}, full_config()}) {
        CHECK(parse_config_yaml(config_to_yaml(c)) == c);
        CHECK(parse_config_json(config_to_json(c).dump()) == c);
        CHECK(config_hash(parse_config_yaml(config_to_yaml(c))) == config_hash(c));
    }
    // Random doubles survive the YAML text form.
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        ExperimentConfig c;
        c.schottky.alpha = rng.uniform() * std::pow(10.0, static_cast<int>(rng.below(40)) - 20);
        c.model.weights = {rng.uniform(), rng.normal()};
        REQUIRE(parse_config_yaml(config_to_yaml(c)) == c);
    }
}

TEST_CASE("config parsing is strict") {
    CHECK_THROWS_AS(parse_config_yaml("model:\n  rnak: 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_yaml("extra: 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_yaml("model: {rank: two}\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_yaml("model: {space: torus}\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_yaml("run: {seed: -4}\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_yaml("model: [\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_json("{\"run\": {\"seed\": 1.5}}"), ConfigError);
    CHECK_THROWS_AS(parse_config_yaml("model: {matrices: [[1, 0, 0]]}\n"), ConfigError);
    auto c = parse_config_yaml("run: {seed: 12, n: 5}\nmodel: {support: ['ab', B]}\n");
    CHECK(*c.run.seed == 12);
    CHECK(c.run.n == 5);
    CHECK(c.model.support == std::vector<std::string>{"ab", "B"});
    CHECK(parse_config_yaml("") == ExperimentConfig{});
}

TEST_CASE("seed is mandatory and enters the hash") {
    ExperimentConfig c;
    CHECK_THROWS_AS(require_seed(c), ConfigError);
    c.run.seed = 1;
    const auto h1 = config_hash(c);
    c.run.seed = 2;
    CHECK(config_hash(c) != h1);
    CHECK(h1.size() == 16);
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("laws from config") {
    ExperimentConfig c;
    auto mu = tree_law(c.model);
    CHECK(mu.support().size() == 6);
    CHECK(mu.is_uniform());
    c.model.support = {"a", "aA"};
    CHECK_THROWS_AS(tree_law(c.model), ConfigError);
    c.model.support = {"a", "c"};
    CHECK_THROWS_AS(tree_law(c.model), ConfigError);
    auto p = full_config();
    CHECK(plane_law(p.model).support().size() == 4);
    CHECK_THROWS_AS(tree_law(p.model), ConfigError);
    p.model.matrices[0] = {1, 2, 2, 1};
    CHECK_THROWS_AS(plane_law(p.model), ConfigError);
}

TEST_CASE("shortest round-trip doubles") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    Rng rng(9);
    for (int i = 0; i < 10000; ++i) {
        double x = (rng.uniform() - 0.5) * std::pow(2.0, static_cast<int>(rng.below(200)) - 100);
        REQUIRE(std::strtod(format_double(x).c_str(), nullptr) == x);
    }
}

TEST_CASE("csv carries schema_version and quotes fields") {
    CsvTable t{"x", {"a", "b"}, {}};
    t.row(1, "p,q");
    t.row(0.25, std::string("say \"hi\""));
    CHECK(to_csv(t) == "schema_version,a,b\n1,1,\"p,q\"\n1,0.25,\"say \"\"hi\"\"\"\n");
    t.rows.push_back({"only one"});
    CHECK_THROWS(to_csv(t));
}

TEST_CASE("schottky artifact round trip") {
    SchottkyParams p;
    p.K = 10;
    p.Kprime = 1280;
    p.pattern_length = 2;
    p.power = 3;
    p.patterns = {1, 2};
    p.set = {Word::parse(2, "abababab"), Word::parse(2, "bAbAbA")};
    VerificationReport rep;
    rep.pass = true;
    auto q = schottky_from_json(schottky_to_json(p, rep, 4, 16));
    CHECK(q.set == p.set);
    CHECK(q.K == p.K);
    CHECK(q.Kprime == p.Kprime);
    CHECK(q.power == p.power);
    CHECK(q.patterns == p.patterns);
    auto j = schottky_to_json(p, rep, 4, 16);
    j["schema_version"] = 99;
    CHECK_THROWS_AS(schottky_from_json(j), ConfigError);
}

TEST_CASE("cli exit codes") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"run", "nope", "--seed", "1"}).code == kExitUsage);
    CHECK(cli({"run", "dyadic"}).code == kExitUsage);  // no seed
    CHECK(cli({"run", "dyadic", "--config", "/nonexistent.yaml", "--seed", "1"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitPass);
    TempDir d("badcfg");
    std::ofstream(d / "c.yaml") << "run: {seed: 1, unknown: 2}\n";
    auto r = cli({"run", "clt", "--config", d / "c.yaml"});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("unknown key") != std::string::npos);
}

TEST_CASE("run is deterministic across thread counts and replay reproduces trials") {
    TempDir a("runa"), b("runb");
    std::ofstream(a / "c.yaml") << "run: {seed: 7, n: 256}\n";
    auto r1 = cli({"run", "logdev", "--config", a / "c.yaml", "--trials", "12", "--out", a / "o", "--threads", "1"});
    auto r2 = cli({"run", "logdev", "--config", a / "c.yaml", "--trials", "12", "--out", b / "o", "--threads", "3"});
    REQUIRE(r1.code == kExitPass);
    REQUIRE(r2.code == kExitPass);
    CHECK(slurp(a / "o/logdev.json") == slurp(b / "o/logdev.json"));
    CHECK(slurp(a / "o/logdev_trials.csv") == slurp(b / "o/logdev_trials.csv"));

    // Trial 5 of the CSV, re-derived.
    auto rep = read_json(a / "o/logdev.json");
    CHECK(rep["seed"] == 7);
    CHECK(rep["schema_version"] == kSchemaVersion);
    auto rp = cli({"replay", a / "o/logdev.json", "5"});
    REQUIRE(rp.code == kExitPass);
    auto dump = nlohmann::json::parse(rp.out);
    std::istringstream csv(slurp(a / "o/logdev_trials.csv"));
    std::string line;
    for (int i = 0; i < 7; ++i) std::getline(csv, line);
    CHECK(line.rfind("1,5," + format_double(dump["window_sup_lower"].get<double>()) + "," +
                         format_double(dump["window_sup_upper"].get<double>()) + ",",
                     0) == 0);
    CHECK(dump["steps"].size() == 256);

    auto bad = cli({"replay", a / "o/logdev.json", "5", "--seed", "8"});
    CHECK(bad.code == kExitUsage);
    CHECK(bad.err.find("hash mismatch") != std::string::npos);
    CHECK(cli({"replay", a / "o/logdev.json", "12"}).code == kExitUsage);
}

TEST_CASE("output directory from the environment") {
    TempDir d("envout");
    ::setenv(kOutEnv, (d / "env").c_str(), 1);
    auto r = cli({"run", "dyadic", "--seed", "3", "--trials", "20"});
    ::unsetenv(kOutEnv);
    CHECK(r.code == kExitPass);
    CHECK(fs::exists(d / "env/dyadic.json"));
    CHECK(fs::exists(d / "env/dyadic_moments.csv"));
}

TEST_CASE("plane model through the runner") {
    TempDir d("plane");
    auto c = full_config();
    c.run.n = 64;
    c.run.trials = 200;
    c.run.checkpoints.clear();
    c.schottky.artifact.clear();
    std::ofstream(d / "p.json") << config_to_json(c).dump();
    auto r = cli({"run", "clt", "--config", d / "p.json", "--out", d / "o"});
    CHECK(r.out.find("clt.ks_displacement") != std::string::npos);
    CHECK(fs::exists(d / "o/clt_trials.csv"));
    CHECK(cli({"run", "dyadic", "--config", d / "p.json", "--out", d / "o"}).code == kExitUsage);
}

TEST_CASE("failing assertions give exit 1 with the offending trials") {
    // Point mass: sigma is 0, so the KS checks cannot pass.
    TempDir d("fail");
    std::ofstream(d / "c.yaml") << "model: {support: [a]}\nrun: {seed: 1, n: 16, trials: 10}\n";
    auto r = cli({"run", "clt", "--config", d / "c.yaml", "--out", d / "o"});
    CHECK(r.code == kExitFail);
    CHECK(r.out.find("FAIL clt.ks_displacement") != std::string::npos);
    CHECK(r.out.find("config_hash") != std::string::npos);
}
