#include "pivotwalk/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef PIVOTWALK_BUILD_ID
#define PIVOTWALK_BUILD_ID "unknown"
#endif

namespace pw {

using nlohmann::json;

std::string format_double(double x) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string build_id() { return PIVOTWALK_BUILD_ID; }

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string to_csv(const CsvTable& t) {
    std::string out = "schema_version";
    for (const auto& c : t.columns) out += "," + csv_field(c);
    out += "\n";
    const std::string v = std::to_string(kSchemaVersion);
    for (const auto& r : t.rows) {
        if (r.size() != t.columns.size()) throw std::logic_error("csv row width differs from the header in " + t.name);
        out += v;
        for (const auto& f : r) out += "," + csv_field(f);
        out += "\n";
    }
    return out;
}

bool SuiteResult::pass() const {
    for (const auto& a : assertions)
        if (!a.diagnostic && !a.pass) return false;
    return true;
}

json constants_json(const GromovConstants& c) {
    return {{"delta", c.delta}, {"C0", c.C0}, {"D0", c.D0}, {"E0", c.E0}, {"F0", c.F0}, {"G0", c.G0},
            {"L0", c.L0},       {"L1", c.L1}, {"L2", c.L2}, {"L3", c.L3}, {"D3", c.D3}};
}

json report_json(const SuiteResult& r, const ExperimentConfig& cfg) {
    json as = json::array();
    for (const auto& a : r.assertions)
        as.push_back({{"name", a.name},
                      {"pass", a.pass},
                      {"diagnostic", a.diagnostic},
                      {"detail", a.detail},
                      {"offending_trials", a.offending_trials}});
    json tables = json::array();
    for (const auto& t : r.tables) tables.push_back(r.suite + "_" + t.name + ".csv");
    return {{"schema_version", kSchemaVersion},
            {"suite", r.suite},
            {"seed", require_seed(cfg)},
            {"config_hash", config_hash(cfg)},
            {"config", config_to_json(cfg)},
            {"build", build_id()},
            {"pass", r.pass()},
            {"assertions", as},
            {"summary", r.summary},
            {"tables", tables}};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::string write_report(const std::string& dir, const SuiteResult& r, const ExperimentConfig& cfg) {
    std::filesystem::create_directories(dir);
    for (const auto& t : r.tables) write_text(dir + "/" + r.suite + "_" + t.name + ".csv", to_csv(t));
    const std::string path = dir + "/" + r.suite + ".json";
    write_text(path, report_json(r, cfg).dump(2) + "\n");
    return path;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

json schottky_to_json(const SchottkyParams& p, const VerificationReport& rep, std::uint64_t probe_seed,
                      std::size_t probe_count) {
    json set = json::array();
    for (const auto& w : p.set) set.push_back(w.str());
    json offenders = json::array();
    for (const auto& o : rep.offenders)
        offenders.push_back({{"probe", o.probe}, {"condition", o.condition}, {"count", o.count}, {"elements", o.elements}});
    json v = {{"pass", rep.pass},
              {"evidence", rep.evidence},
              {"probes", rep.probes},
              {"probe_seed", probe_seed},
              {"probe_count", probe_count},
              {"power_cap", rep.power_cap},
              {"max_count_positive", rep.max_count_positive},
              {"max_count_negative", rep.max_count_negative},
              {"max_single_orbit", rep.max_single_orbit},
              {"single_orbit_ok", rep.single_orbit_ok},
              {"displacement_ok", rep.displacement_ok},
              {"min_displacement", rep.min_displacement},
              {"certificate", rep.certificate},
              {"certificate_detail", rep.certificate_detail},
              {"offenders", offenders}};
    return {{"schema_version", kSchemaVersion},
            {"rank", p.set.empty() ? 2 : p.set.front().rank()},
            {"K", p.K},
            {"Kprime", p.Kprime},
            {"pattern_length", p.pattern_length},
            {"power", p.power},
            {"patterns", p.patterns},
            {"size", p.set.size()},
            {"set", set},
            {"verification", v},
            {"build", build_id()}};
}

SchottkyParams schottky_from_json(const json& j) {
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion) throw ConfigError("schottky artifact: unknown schema_version");
        SchottkyParams p;
        const int rank = j.at("rank").get<int>();
        p.K = j.at("K").get<double>();
        p.Kprime = j.at("Kprime").get<double>();
        p.pattern_length = j.at("pattern_length").get<int>();
        p.power = j.at("power").get<long long>();
        p.patterns = j.at("patterns").get<std::vector<std::uint32_t>>();
        for (const auto& s : j.at("set")) p.set.push_back(Word::parse(rank, s.get<std::string>()));
        return p;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("schottky artifact: ") + e.what());
    }
}

SchottkyParams load_schottky(const std::string& path) { return schottky_from_json(read_json(path)); }

}  // namespace pw
