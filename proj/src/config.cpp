#include "pivotwalk/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace pw {

using nlohmann::json;

namespace {

json yaml_to_json(const YAML::Node& n) {
    switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
        return nullptr;
    case YAML::NodeType::Sequence: {
        json a = json::array();
        for (const auto& e : n) a.push_back(yaml_to_json(e));
        return a;
    }
    case YAML::NodeType::Map: {
        json o = json::object();
        for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
        return o;
    }
    case YAML::NodeType::Scalar: {
        const std::string s = n.Scalar();
        if (n.Tag() == "!") return s;  // quoted
        std::uint64_t u;
        std::int64_t i;
        double d;
        bool b;
        if (YAML::convert<std::uint64_t>::decode(n, u) && s.find_first_not_of("0123456789") == std::string::npos)
            return u;
        if (YAML::convert<std::int64_t>::decode(n, i) && s.find_first_not_of("-0123456789") == std::string::npos)
            return i;
        if (YAML::convert<bool>::decode(n, b)) return b;
        if (YAML::convert<double>::decode(n, d)) return d;
        return s;
    }
    }
    return nullptr;
}

void emit(YAML::Emitter& out, const json& j) {
    if (j.is_object()) {
        out << YAML::BeginMap;
        for (auto it = j.begin(); it != j.end(); ++it) {
            out << YAML::Key << it.key() << YAML::Value;
            emit(out, it.value());
        }
        out << YAML::EndMap;
    } else if (j.is_array()) {
        out << YAML::Flow << YAML::BeginSeq;
        for (const auto& e : j) emit(out, e);
        out << YAML::EndSeq;
    } else if (j.is_string()) {
        out << YAML::DoubleQuoted << j.get<std::string>();
    } else if (j.is_null()) {
        out << YAML::Null;
    } else {
        // json's number formatting round-trips.
        out << j.dump();
    }
}

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a table");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(std::string(where) + ": unknown key '" + it.key() + "'");
}

template <class T>
void get(const json& j, const char* key, T& out, const char* where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string(where) + "." + key + ": " + e.what());
    }
}

double as_double(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    return v.get<double>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    check_keys(j, "config", {"model", "schottky", "run", "outputs"});
    if (j.contains("model")) {
        const json& m = j["model"];
        check_keys(m, "model", {"space", "rank", "support", "weights", "matrices"});
        get(m, "space", c.model.space, "model");
        get(m, "rank", c.model.rank, "model");
        get(m, "support", c.model.support, "model");
        if (m.contains("weights")) {
            c.model.weights.clear();
            if (!m["weights"].is_array()) throw ConfigError("model.weights: expected a list");
            for (const auto& w : m["weights"]) c.model.weights.push_back(as_double(w, "model.weights"));
        }
        if (m.contains("matrices")) {
            if (!m["matrices"].is_array()) throw ConfigError("model.matrices: expected a list");
            for (const auto& row : m["matrices"]) {
                if (!row.is_array() || row.size() != 4) throw ConfigError("model.matrices: each entry needs a, b, c, d");
                std::array<double, 4> a{};
                for (std::size_t k = 0; k < 4; ++k) a[k] = as_double(row[k], "model.matrices");
                c.model.matrices.push_back(a);
            }
        }
        if (c.model.space != "tree" && c.model.space != "hyperbolic_plane")
            throw ConfigError("model.space must be tree or hyperbolic_plane");
    }
    if (j.contains("schottky")) {
        const json& s = j["schottky"];
        check_keys(s, "schottky",
                   {"target_size", "Kprime", "pattern_length", "probe_seed", "probe_count", "S_size", "N", "mode",
                    "alpha", "decay_alpha", "artifact"});
        auto& t = c.schottky;
        get(s, "target_size", t.target_size, "schottky");
        if (s.contains("Kprime")) t.Kprime = as_double(s["Kprime"], "schottky.Kprime");
        get(s, "pattern_length", t.pattern_length, "schottky");
        get(s, "probe_seed", t.probe_seed, "schottky");
        get(s, "probe_count", t.probe_count, "schottky");
        get(s, "S_size", t.S_size, "schottky");
        get(s, "N", t.N, "schottky");
        get(s, "mode", t.mode, "schottky");
        if (s.contains("alpha")) t.alpha = as_double(s["alpha"], "schottky.alpha");
        if (s.contains("decay_alpha")) t.decay_alpha = as_double(s["decay_alpha"], "schottky.decay_alpha");
        get(s, "artifact", t.artifact, "schottky");
        if (t.mode != "mixture" && t.mode != "exact") throw ConfigError("schottky.mode must be mixture or exact");
    }
    if (j.contains("run")) {
        const json& r = j["run"];
        check_keys(r, "run", {"seed", "n", "trials", "horizon_multiplier", "checkpoints"});
        if (r.contains("seed") && !r["seed"].is_null()) {
            if (!r["seed"].is_number_unsigned()) throw ConfigError("run.seed: expected a nonnegative integer");
            c.run.seed = r["seed"].get<std::uint64_t>();
        }
        get(r, "n", c.run.n, "run");
        get(r, "trials", c.run.trials, "run");
        if (r.contains("horizon_multiplier")) c.run.horizon_multiplier = as_double(r["horizon_multiplier"], "run.horizon_multiplier");
        get(r, "checkpoints", c.run.checkpoints, "run");
    }
    get(j, "outputs", c.outputs, "config");
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json m = {{"space", c.model.space}, {"rank", c.model.rank}, {"support", c.model.support}, {"weights", c.model.weights}};
    json mats = json::array();
    for (const auto& a : c.model.matrices) mats.push_back({a[0], a[1], a[2], a[3]});
    m["matrices"] = mats;
    const auto& s = c.schottky;
    json sj = {{"target_size", s.target_size}, {"Kprime", s.Kprime},       {"pattern_length", s.pattern_length},
               {"probe_seed", s.probe_seed},   {"probe_count", s.probe_count}, {"S_size", s.S_size},
               {"N", s.N},                     {"mode", s.mode},           {"alpha", s.alpha},
               {"decay_alpha", s.decay_alpha}, {"artifact", s.artifact}};
    json r = {{"seed", c.run.seed ? json(*c.run.seed) : json(nullptr)},
              {"n", c.run.n},
              {"trials", c.run.trials},
              {"horizon_multiplier", c.run.horizon_multiplier},
              {"checkpoints", c.run.checkpoints}};
    return {{"model", m}, {"schottky", sj}, {"run", r}, {"outputs", c.outputs}};
}

ExperimentConfig parse_config_yaml(const std::string& text) {
    YAML::Node n;
    try {
        n = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("yaml: ") + e.what());
    }
    if (n.IsNull()) return ExperimentConfig{};
    return config_from_json(yaml_to_json(n));
}

ExperimentConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("json: ") + e.what());
    }
    return config_from_json(j);
}

std::string config_to_yaml(const ExperimentConfig& c) {
    YAML::Emitter out;
    emit(out, config_to_json(c));
    return std::string(out.c_str()) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    return is_json ? parse_config_json(ss.str()) : parse_config_yaml(ss.str());
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string config_hash(const ExperimentConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_to_json(c).dump())));
    return buf;
}

std::uint64_t require_seed(const ExperimentConfig& c) {
    if (!c.run.seed) throw ConfigError("run.seed is required");
    return *c.run.seed;
}

WordDistribution tree_law(const ModelConfig& m) {
    if (m.space != "tree") throw ConfigError("this needs the tree model");
    if (m.rank < 2) throw ConfigError("model.rank must be at least 2");
    if (m.support.empty()) throw ConfigError("model.support is empty");
    std::vector<Word> words;
    try {
        for (const auto& s : m.support) {
            Word w = Word::parse(m.rank, s);
            if (w.empty()) throw ConfigError("model.support: identity step '" + s + "'");
            words.push_back(w);
        }
        if (m.weights.empty()) return WordDistribution::uniform(words);
        return WordDistribution(words, m.weights);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

StepDistribution<Moebius> plane_law(const ModelConfig& m) {
    if (m.space != "hyperbolic_plane") throw ConfigError("this needs the hyperbolic_plane model");
    if (m.matrices.empty()) throw ConfigError("model.matrices is empty");
    std::vector<Moebius> gs;
    for (const auto& a : m.matrices) {
        Moebius g{a[0], a[1], a[2], a[3]};
        if (!(g.det() > 0)) throw ConfigError("model.matrices: determinant must be positive");
        gs.push_back(g.normalized());
    }
    try {
        if (m.weights.empty()) return StepDistribution<Moebius>::uniform(gs);
        return StepDistribution<Moebius>(gs, m.weights);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

PivotModelConfig pivot_config(const ExperimentConfig& c, bool decay) {
    PivotModelConfig p;
    p.rank = c.model.rank;
    p.schottky_size = c.schottky.target_size;
    p.S_size = c.schottky.S_size;
    p.N = c.schottky.N;
    p.pattern_length = c.schottky.pattern_length;
    p.mode = c.schottky.mode == "exact" ? AlphaMode::exact : AlphaMode::mixture;
    p.alpha = decay ? c.schottky.decay_alpha : c.schottky.alpha;
    p.probe_seed = c.schottky.probe_seed;
    return p;
}

}  // namespace pw
