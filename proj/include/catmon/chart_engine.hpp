#pragma once

// Flattened chart kernel for Monte Carlo replications.
//
// Stream parameters are packed into contiguous arrays and samplers are shared
// between streams with identical sampling probabilities. The arithmetic is the
// same expression sequence as the per-stream operations in local_monitor, so
// a replication driven through ChartEngine is bit-identical to one driven
// through init_state / ewma_update / smoothed_stat / normalize.

#include <span>
#include <vector>

#include "catmon/global_monitor.hpp"
#include "catmon/stat_math.hpp"
#include "catmon/streams.hpp"

namespace catmon {

/// Per-thread scratch for ChartEngine::step and ChartEngine::evaluate.
struct ChartWorkspace {
    explicit ChartWorkspace(std::size_t streams, int max_levels)
        : counts(static_cast<std::size_t>(max_levels)), scores(streams), zhang(streams) {}

    std::vector<int> counts;
    std::vector<Probability> scores;
    ZhangFusion zhang;
};

class ChartEngine {
public:
    /// `shifts` may be empty (all streams in control) or have one entry per stream.
    ChartEngine(std::span<const StreamSpec> specs, std::span<const ShiftSpec> shifts, double lambda,
                int sample_size);

    std::size_t streams() const { return layout_.size(); }
    std::size_t state_size() const { return initial_.size(); }
    int max_levels() const { return max_levels_; }
    std::size_t distinct_samplers() const { return samplers_.size(); }
    double lambda() const { return lambda_; }
    int sample_size() const { return sample_size_; }

    ChartWorkspace make_workspace() const { return ChartWorkspace(streams(), max_levels_); }

    /// Zero-state start: w = N pi0 for every stream.
    void reset(std::span<double> w) const;

    /// Draw one grouped sample per stream (in stream order), update the EWMA
    /// state and write the normalized local scores into ws.scores.
    void step(Rng& rng, std::span<double> w, ChartWorkspace& ws) const;

    /// Fuse ws.scores with the given statistic.
    double evaluate(Statistic statistic, ChartWorkspace& ws) const;

private:
    struct StreamLayout {
        int offset;
        int levels;
        int df;
        int sampler;
        int ordinal;  // index into score_variance_, -1 for nominal streams
    };

    double lambda_;
    int sample_size_;
    int max_levels_ = 0;
    std::vector<StreamLayout> layout_;
    std::vector<double> initial_;   // N pi0, flattened
    std::vector<double> expected_;  // N pi0 used by the nominal statistic
    std::vector<double> alpha_;     // ordinal scores, flattened alongside the state
    std::vector<double> score_variance_;
    std::vector<MultinomialSampler> samplers_;
};

}  // namespace catmon
