#pragma once

// Command implementations behind the catmon executable.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "catmon/config.hpp"
#include "catmon/simulate.hpp"

namespace catmon {

// ----- data files -----

/// Categorical observations: rows[t][i] is the 1-based level of stream i at time t.
struct ObservationTable {
    std::vector<std::string> names;  // may be empty (no header)
    std::vector<std::vector<int>> rows;
};

/// Comma-separated integers, one row per time point. A first line that does
/// not parse as integers is taken as a header of stream names.
ObservationTable read_observations(const std::filesystem::path& path);
void write_observations(const std::filesystem::path& path, const ObservationTable& table);

/// Continuous Phase-I data. Missing cells are NaN.
struct ContinuousTable {
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
};

/// Comma-separated numbers with a header line. Empty cells and NA, NaN, ?
/// are missing.
ContinuousTable read_continuous(const std::filesystem::path& path);
void write_continuous(const std::filesystem::path& path, const ContinuousTable& table);
/// One label per line, matching the data rows.
std::vector<std::string> read_labels(const std::filesystem::path& path);

// ----- discretize -----

struct DiscretizeOptions {
    std::string conforming = "pass";
    double lambda = 0.1;
    int sample_size = 4;
    double target_arl0 = 500.0;
};

struct DiscretizeResult {
    std::vector<std::string> kept;      // feature names, in column order
    std::vector<std::size_t> kept_columns;
    std::vector<std::string> dropped;   // constant in the conforming group
    std::vector<double> thresholds;     // one per kept feature
    std::vector<std::vector<double>> ic_probs;  // [P(level 1), P(level 2)] per kept feature
    /// Dichotomized observations per group label, rows in input order.
    std::vector<std::pair<std::string, ObservationTable>> groups;
    MonitorConfig config;
};

/// Mean imputation per (feature, group), per-feature threshold at the
/// conforming-group mean, level 1 if x <= threshold and level 2 otherwise.
/// Features with zero variance in the conforming group are dropped.
DiscretizeResult discretize(const ContinuousTable& data, const std::vector<std::string>& labels,
                            const DiscretizeOptions& options);

/// Dichotomizes rows with fixed thresholds after imputing their own column means.
ObservationTable apply_thresholds(const ContinuousTable& data, const DiscretizeResult& fitted);

/// Writes thresholds.csv, ic_probabilities.csv, config.json and
/// observations_<label>.csv for every group.
void cmd_discretize(const std::filesystem::path& data, const std::filesystem::path& labels,
                    const DiscretizeOptions& options, const std::filesystem::path& out_dir, std::ostream& log);

// ----- monitor -----

struct MonitorRecord {
    long k = 0;
    double value = 0.0;
    double limit = 0.0;
    bool alarm = false;
    std::vector<double> scores;
};

/// Runs the chart over consecutive groups of N rows. A trailing partial group
/// is dropped. Requires config.chart.limit.
std::vector<MonitorRecord> run_monitor(const MonitorConfig& config, const ObservationTable& observations,
                                       bool keep_scores);

/// Natural log, or the lowest finite double for a zero statistic.
double log_or_sentinel(double x);

std::string monitor_header(const MonitorConfig& config, bool with_scores);
std::string format_monitor_record(const MonitorRecord& record, Statistic statistic);

/// Observation files are concatenated in order; rows before `start_row`
/// (1-based) are skipped. Calibrates first when the config has no limit but a
/// calibration section.
void cmd_monitor(const std::filesystem::path& config, const std::vector<std::filesystem::path>& data,
                 long start_row, const std::filesystem::path& out, bool emit_local_scores, std::ostream& log);

// ----- calibrate -----

struct CalibrateRequest {
    std::optional<double> arl0;
    std::optional<long> reps;
    std::optional<std::uint64_t> seed;
    std::vector<Statistic> statistics;  // empty: the config's statistic
};

std::vector<CalibrationResult> run_calibrate(const MonitorConfig& config, const CalibrateRequest& request);
std::string calibration_csv(const std::vector<CalibrationResult>& results);

void cmd_calibrate(const std::filesystem::path& config, const CalibrateRequest& request,
                   const std::filesystem::path& out, const std::optional<std::filesystem::path>& config_out,
                   std::ostream& log);

// ----- simulate -----

void cmd_simulate(const std::filesystem::path& scenario, const std::string& preset,
                  const std::filesystem::path& out_dir, bool parallel_cells, std::ostream& log);

// ----- scores -----

void cmd_scores(const std::filesystem::path& config, std::ostream& out);
void print_scores(const MonitorConfig& config, std::ostream& out);

// ----- synthetic case-study fixture -----

/// Independent continuous features with a block of constant columns and
/// missing cells. A conforming Phase-I set (label "pass") and a nonconforming
/// set (label "fail") whose first `shifted_features` varying features have a
/// mean shift of `shift_sd` latent standard deviations.
struct FixtureSpec {
    int features = 470;
    int constant_features = 9;
    int phase1_rows = 1463;
    int phase2_conforming = 80;
    int phase2_nonconforming = 104;
    double missing_rate = 0.02;
    int shifted_features = 60;
    double shift_sd = 1.0;
    std::uint64_t seed = 2024;
};

FixtureSpec parse_fixture_spec(const nlohmann::json& j);

struct Fixture {
    /// Conforming rows. The last spec.phase2_conforming of them are the ones
    /// monitored before the change; which rows those are depends on `run`.
    ContinuousTable conforming;
    ContinuousTable nonconforming;
};

/// Conforming values depend on spec.seed only (row order on `run`);
/// nonconforming rows on (spec.seed, run).
Fixture make_fixture(const FixtureSpec& spec, std::uint64_t run);

/// The Phase-II sequence: last phase2_conforming rows of the conforming
/// group, then every nonconforming row.
ObservationTable phase2_sequence(const FixtureSpec& spec, const ObservationTable& conforming,
                                 const ObservationTable& nonconforming);

/// Writes data.csv (conforming then nonconforming rows) and labels.csv
/// ("pass" / "fail").
void cmd_fixture(const std::filesystem::path& spec, std::uint64_t run, const std::filesystem::path& out_dir,
                 std::ostream& log);

}  // namespace catmon
