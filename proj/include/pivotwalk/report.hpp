#pragma once

#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "pivotwalk/config.hpp"
#include "pivotwalk/geometry.hpp"
#include "pivotwalk/schottky.hpp"

namespace pw {

inline constexpr int kSchemaVersion = 1;

// Shortest decimal that parses back to the same double.
std::string format_double(double x);

struct CsvTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    template <class... T>
    void row(const T&... v) {
        rows.push_back({cell(v)...});
    }

    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    template <class T>
    static std::string cell(const T& v) {
        if constexpr (std::is_floating_point_v<T>)
            return format_double(static_cast<double>(v));
        else
            return std::to_string(v);
    }
};

// schema_version is prepended to every row.
std::string to_csv(const CsvTable& t);

struct Assertion {
    std::string name;
    bool pass = false;
    std::string detail;
    bool diagnostic = false;  // reported, not part of the exit status
    std::vector<std::size_t> offending_trials;
};

struct SuiteResult {
    std::string suite;
    std::vector<CsvTable> tables;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<Assertion> assertions;
    bool pass() const;
};

nlohmann::json constants_json(const GromovConstants& c);
// Sidecar with config, its hash, seed, constants and build id. No timestamps.
nlohmann::json report_json(const SuiteResult& r, const ExperimentConfig& cfg);
// Writes <suite>.json and <suite>_<table>.csv; returns the JSON path.
std::string write_report(const std::string& dir, const SuiteResult& r, const ExperimentConfig& cfg);
nlohmann::json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);

std::string build_id();

nlohmann::json schottky_to_json(const SchottkyParams& p, const VerificationReport& rep, std::uint64_t probe_seed,
                                std::size_t probe_count);
SchottkyParams schottky_from_json(const nlohmann::json& j);
SchottkyParams load_schottky(const std::string& path);

}  // namespace pw
