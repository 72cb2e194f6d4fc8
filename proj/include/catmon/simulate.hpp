#pragma once

// Scenario files and the table runner for OC ARL comparison grids.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "catmon/calibration.hpp"
#include "catmon/config.hpp"

namespace catmon {

/// A block of identical streams, e.g. case "a": 400 binary streams.
struct PopulationCase {
    std::string label;
    int count = 0;
    StreamTemplate stream;
};

/// The first `count` streams of case `label` receive `shift`.
struct CaseShift {
    std::string label;
    int count = 0;
    ShiftSpec shift;
};

struct ShiftRow {
    std::string label;
    std::vector<CaseShift> shifts;
};

struct Scenario {
    std::string name;
    std::string description;
    std::vector<PopulationCase> population;
    std::vector<ShiftRow> rows;
    double lambda = 0.1;
    int sample_size = 100;
    std::vector<Statistic> statistics{Statistic::zhang, Statistic::max, Statistic::sum};
    double target_arl0 = 370.0;
    long reps = 2000;
    std::uint64_t master_seed = 1;
    long cap = kDefaultRunLengthCap;
    double tol_rel = 0.02;
    bool include_ic_row = true;
    std::map<std::string, long> presets;  // preset name -> reps
};

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);
/// Sets reps from the named preset. Throws InputError for unknown presets.
void apply_preset(Scenario& scenario, const std::string& preset);

struct Population {
    std::vector<StreamSpec> specs;
    std::vector<ShiftSpec> shifts;
};

/// Expands the cases in order and shifts the first streams of each named case.
/// Throws InputError when a row shifts more streams than its case holds or
/// names an unknown case; ShiftError when a shift does not fit its streams.
Population build_population(const Scenario& scenario, const ShiftRow& row);
Population build_population(const Scenario& scenario);  // in control

struct ResultRow {
    std::string label;
    std::vector<RunLengthSummary> cells;  // one per statistic
};

struct ResultTable {
    std::string name;
    std::vector<Statistic> statistics;
    std::vector<double> limits;  // one per statistic
    std::vector<ResultRow> rows;
    std::vector<CalibrationResult> calibration;  // empty when parsed back from CSV
};

struct RunOptions {
    /// Run rows concurrently (each row then simulates single-threaded).
    bool parallel_cells = false;
    std::function<void(const std::string&)> progress;
};

/// Seed tag of row r for derive_seed.
inline constexpr std::uint64_t row_scenario(std::size_t r) { return 16 + r; }

/// Calibrates every statistic once on the in-control population, then
/// estimates the OC ARL of every row with all statistics on shared
/// replications. The "IC" row is the fresh-seed calibration confirmation.
ResultTable run_table(const Scenario& scenario, const RunOptions& options = {});

/// Rows estimated with limits from an earlier calibration.
ResultTable run_rows(const Scenario& scenario, std::span<const double> limits, const RunOptions& options = {});

/// Delimited rendering: header then one line per (row, statistic) with
/// 17 significant digits.
std::string export_csv(const ResultTable& table);
ResultTable parse_csv(const std::string& text);
/// Human-readable grid, ARLs with standard errors in parentheses.
std::string export_text(const ResultTable& table);
nlohmann::json calibration_to_json(const std::vector<CalibrationResult>& results);

}  // namespace catmon
