#pragma once

// Monte Carlo run-length estimation and control-limit search.

#include <cstdint>
#include <functional>
#include <string>
#include <limits>
#include <span>
#include <vector>

#include "catmon/chart_engine.hpp"
#include "catmon/global_monitor.hpp"
#include "catmon/streams.hpp"

namespace catmon {

inline constexpr long kDefaultRunLengthCap = 20000;

// Sub-experiment tags fed to derive_seed.
inline constexpr std::uint64_t kEstimateScenario = 0;
inline constexpr std::uint64_t kSearchScenario = 1;
inline constexpr std::uint64_t kConfirmScenario = 2;

struct RunLengthSummary {
    double arl = 0.0;
    double se = 0.0;  // sample standard deviation / sqrt(reps); 0 when reps == 1
    long reps = 0;
    double capped_fraction = 0.0;
    long cap = kDefaultRunLengthCap;
};

RunLengthSummary summarize_run_lengths(std::span<const long> run_lengths, long cap);

/// One chart sharing a replication with others: which statistic, which limit.
struct ChartLimit {
    Statistic statistic = Statistic::zhang;
    double limit = std::numeric_limits<double>::infinity();
};

/// First sample index k with statistic > limit, or `cap` if no alarm by then.
/// Every stream restarts at w = N pi0 with its shift active from sample 1.
long simulate_run_length(std::span<const StreamSpec> specs, std::span<const ShiftSpec> shifts,
                         const ChartConfig& config, Rng& rng, long cap = kDefaultRunLengthCap);

/// Same replication driven through the per-stream operations and chart_step_serial.
long simulate_run_length_reference(std::span<const StreamSpec> specs, std::span<const ShiftSpec> shifts,
                                   const ChartConfig& config, Rng& rng, long cap = kDefaultRunLengthCap);

/// Run lengths of several charts fed by the same replication. The replication
/// continues until every chart has alarmed or the cap is hit.
std::vector<long> simulate_run_lengths(const ChartEngine& engine, std::span<const ChartLimit> charts, Rng& rng,
                                       ChartWorkspace& ws, std::span<double> state, long cap);

/// ARL over `reps` replications; replication r uses derive_seed(master, scenario, r).
/// Replications run in parallel, results are reduced in replication order.
RunLengthSummary estimate_arl(std::span<const StreamSpec> specs, std::span<const ShiftSpec> shifts,
                              const ChartConfig& config, long reps, std::uint64_t master_seed,
                              long cap = kDefaultRunLengthCap, std::uint64_t scenario = kEstimateScenario);

/// Single-threaded reference for estimate_arl built on simulate_run_length_reference.
RunLengthSummary estimate_arl_serial(std::span<const StreamSpec> specs, std::span<const ShiftSpec> shifts,
                                     const ChartConfig& config, long reps, std::uint64_t master_seed,
                                     long cap = kDefaultRunLengthCap, std::uint64_t scenario = kEstimateScenario);

/// ARLs of several charts estimated on shared replications (one summary per chart).
std::vector<RunLengthSummary> estimate_arl_multi(const ChartEngine& engine, std::span<const ChartLimit> charts,
                                                 long reps, std::uint64_t master_seed,
                                                 long cap = kDefaultRunLengthCap,
                                                 std::uint64_t scenario = kEstimateScenario);

/// Replications kept alive between limit evaluations.
///
/// Each replication records the samples at which each statistic sets a new
/// running maximum. Because the EWMA path does not depend on the limit, the
/// run length at limit L is the first record exceeding L, so the ARL at any
/// limit below the simulated horizon is exact for these random numbers.
/// advance() extends replications as needed; nothing is ever re-simulated.
class RunLengthEnsemble {
public:
    RunLengthEnsemble(const ChartEngine& engine, std::vector<Statistic> channels, long reps,
                      std::uint64_t master_seed, std::uint64_t scenario, long cap);

    std::size_t channels() const { return channels_.size(); }
    long reps() const { return static_cast<long>(reps_.size()); }
    long cap() const { return cap_; }

    /// Extend each replication until it has at least `horizon` samples and,
    /// for every channel c, its running maximum exceeds limits[c]; never past
    /// the cap.
    void advance(std::span<const double> limits, long horizon = 0);

    /// True when every replication's run length at `limit` is known.
    bool covered(std::size_t channel, double limit) const;
    /// Requires covered(channel, limit).
    RunLengthSummary summary(std::size_t channel, double limit) const;
    /// Mean of min(run length at `limit`, horizon); a lower bound on the ARL.
    /// Requires every replication to have min(horizon, cap) samples.
    double censored_arl(std::size_t channel, double limit, long horizon) const;
    /// Sorted distinct running-maximum values recorded so far.
    std::vector<double> record_values(std::size_t channel) const;
    long total_steps() const;

private:
    struct Record {
        long k;
        double value;
    };
    struct Replication {
        explicit Replication(RngSeed seed) : rng(seed) {}
        Rng rng;
        long k = 0;
        std::vector<double> running_max;
        std::vector<std::vector<Record>> records;
    };

    long run_length(const Replication& rep, std::size_t channel, double limit) const;

    const ChartEngine& engine_;
    std::vector<Statistic> channels_;
    long cap_;
    std::vector<Replication> reps_;
    std::vector<double> states_;  // reps x engine.state_size()
};

struct CalibrationOptions {
    long reps = 2000;
    double tol_rel = 0.02;
    int max_iterations = 40;
    long cap = kDefaultRunLengthCap;
    std::uint64_t seed = 1;
    /// Run a fresh-seed confirmation estimate at the selected limit.
    bool confirm = true;
    /// Called with a one-line note once the brackets are known.
    std::function<void(const std::string&)> progress;
};

struct CalibrationResult {
    Statistic statistic = Statistic::zhang;
    double target_arl = 0.0;
    double limit = 0.0;
    /// Fresh-seed confirmation estimate (equal to the search estimate when
    /// confirmation is disabled).
    double achieved_arl = 0.0;
    double achieved_se = 0.0;
    double capped_fraction = 0.0;
    /// ARL at the selected limit on the common random numbers of the search.
    double search_arl = 0.0;
    int iterations = 0;
    double bracket_low = 0.0;
    double bracket_high = 0.0;
    long reps = 0;
};

/// Control limits for several statistics at a common in-control target ARL,
/// searched on one shared set of replications (common random numbers).
/// Replications run to twice the target first; the upper bracket is the
/// smallest limit whose censored ARL already reaches the target. Bisection on
/// [0, upper] then stops when |ARL(L) - target| / target <= tol_rel or after
/// max_iterations.
/// Throws BracketError when the target is not below the cap.
std::vector<CalibrationResult> calibrate_limits(const ChartEngine& engine, std::span<const Statistic> statistics,
                                                double target_arl, const CalibrationOptions& options);

/// Single-statistic convenience wrapper around calibrate_limits for the
/// in-control population `specs`; config.limit is ignored.
CalibrationResult calibrate_limit(std::span<const StreamSpec> specs, const ChartConfig& config, double target_arl,
                                  const CalibrationOptions& options);

}  // namespace catmon
