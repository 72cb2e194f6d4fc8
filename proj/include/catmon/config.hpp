#pragma once

// JSON configuration files: stream definitions, chart settings, shifts.
//
// Every object is read strictly: unknown keys are rejected with InputError.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "catmon/calibration.hpp"
#include "catmon/global_monitor.hpp"
#include "catmon/streams.hpp"

namespace catmon {

inline constexpr int kConfigSchemaVersion = 1;

/// A stream definition as written in a file. Nominal streams give `probs`;
/// ordinal streams give either `probs` or `cutpoints`, plus an optional
/// latent `family` ("normal" by default).
struct StreamTemplate {
    std::string name;
    bool ordinal = false;
    std::vector<double> probs;
    std::vector<double> cutpoints;
    LatentFamily family = LatentFamily::normal;

    StreamModel model() const;
};

struct CalibrationSettings {
    double target_arl0 = 370.0;
    CalibrationOptions options;
};

struct MonitorConfig {
    std::vector<StreamSpec> streams;
    std::vector<std::string> names;  // one per stream
    ChartConfig chart;
    std::optional<CalibrationSettings> calibration;
    std::uint64_t seed = 1;
};

StreamTemplate parse_stream_template(const nlohmann::json& j);
nlohmann::json to_json(const StreamTemplate& t);

/// {"xi": [...]} or {"delta": x}.
ShiftSpec parse_shift(const nlohmann::json& j);

/// Shape:
///   {"schema_version": 1, "lambda": 0.1, "sample_size": 100, "statistic": "zhang",
///    "limit": 12.3 | "log_limit": 2.51, "seed": 1,
///    "calibration": {"target_arl0": 370, "reps": 2000, "tol_rel": 0.02,
///                    "max_iterations": 40, "cap": 20000},
///    "streams": [{"name": "s1", "kind": "nominal", "probs": [0.5, 0.5], "count": 3}, ...]}
/// A stream entry with "count": n expands to n streams named name#1..name#n.
MonitorConfig parse_monitor_config(const nlohmann::json& j);
MonitorConfig load_monitor_config(const std::filesystem::path& path);

/// Serializes streams as explicit probability vectors (one entry per stream).
nlohmann::json monitor_config_to_json(const MonitorConfig& config);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

/// Throws InputError naming the first key of `j` not in `allowed`.
void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                        std::string_view context);

}  // namespace catmon
