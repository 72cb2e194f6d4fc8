#pragma once

// Fusion of the p normalized local scores into one chart statistic, and the
// per-sample chart update.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "catmon/local_monitor.hpp"

namespace catmon {

/// Global statistic: Zhang's likelihood-ratio goodness-of-fit statistic on the
/// ordered scores (T), the maximum score (Q) or the score sum (S).
enum class Statistic { zhang, max, sum };

std::string_view to_string(Statistic s);
/// Accepts "zhang"/"T", "max"/"Q", "sum"/"S". Throws InputError otherwise.
Statistic parse_statistic(std::string_view name);

struct ChartConfig {
    double lambda = 0.1;
    int sample_size = 100;
    Statistic statistic = Statistic::zhang;
    /// Control limit L; absent while calibrating.
    std::optional<double> limit;

    void validate() const;
};

struct ChartPoint {
    long k = 0;
    double value = 0.0;
    bool alarm = false;
    std::vector<Probability> local_scores;  // empty unless retained
};

/// T = sum_i [ln((1/U_(i) - 1) / ((p - 1/2)/(i - 3/4) - 1))]^2 * 1{U_(i) >= (i - 3/4)/p}.
/// Throws DomainError if any score lies outside (0, 1) or the input is empty.
double zhang_gof(std::span<const Probability> scores);
double max_stat(std::span<const Probability> scores);
double sum_stat(std::span<const Probability> scores);
double fuse(Statistic statistic, std::span<const Probability> scores);

/// Zhang statistic with the per-rank constants precomputed for a fixed p.
/// Reuses an internal buffer, so one instance must not be shared across threads.
class ZhangFusion {
public:
    explicit ZhangFusion(std::size_t p);

    std::size_t size() const { return thresholds_.size(); }
    double operator()(std::span<const Probability> scores);

private:
    std::vector<double> thresholds_;   // (i - 3/4) / p
    std::vector<double> log_denoms_;   // ln((p - 1/2)/(i - 3/4) - 1)
    std::vector<double> sorted_;
    std::vector<std::size_t> bucket_start_;
};

/// One chart update: EWMA update, smoothed statistic and normalization per
/// stream (in parallel over streams), then a sequential fusion.
/// `alarm` is value > limit and is false when no limit is configured.
ChartPoint chart_step(std::span<EwmaState> states, std::span<const StreamSpec> specs,
                      std::span<const SampleCounts> counts, const ChartConfig& config,
                      bool retain_scores = false);

/// Single-threaded reference for chart_step, built from the per-stream
/// operations one at a time.
ChartPoint chart_step_serial(std::span<EwmaState> states, std::span<const StreamSpec> specs,
                             std::span<const SampleCounts> counts, const ChartConfig& config,
                             bool retain_scores = false);

}  // namespace catmon
