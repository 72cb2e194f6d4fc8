#include "catmon/global_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "catmon/errors.hpp"

namespace catmon {

std::string_view to_string(Statistic s) {
    switch (s) {
        case Statistic::zhang:
            return "zhang";
        case Statistic::max:
            return "max";
        case Statistic::sum:
            return "sum";
    }
    return "?";
}

Statistic parse_statistic(std::string_view name) {
    if (name == "zhang" || name == "T") return Statistic::zhang;
    if (name == "max" || name == "Q") return Statistic::max;
    if (name == "sum" || name == "S") return Statistic::sum;
    throw InputError("unknown statistic '" + std::string(name) + "' (expected zhang, max or sum)");
}

void ChartConfig::validate() const {
    validate_lambda(lambda);
    if (sample_size < 1) throw DomainError("sample size must be >= 1");
    if (limit && !(*limit >= 0.0)) throw DomainError("control limit must be nonnegative");
}

namespace {

void check_scores(std::span<const Probability> scores) {
    if (scores.empty()) throw DomainError("fusion needs at least one local score");
}

}  // namespace

namespace {

std::size_t bucket_of(double u, double pd, std::size_t p) {
    const double b = u * pd;
    if (!(b > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(b), p - 1);
}

}  // namespace

ZhangFusion::ZhangFusion(std::size_t p)
    : thresholds_(p), log_denoms_(p), sorted_(p), bucket_start_(p + 1) {
    const double pd = static_cast<double>(p);
    for (std::size_t i = 0; i < p; ++i) {
        const double rank = static_cast<double>(i + 1) - 0.75;
        thresholds_[i] = rank / pd;
        log_denoms_[i] = std::log((pd - 0.5) / rank - 1.0);
    }
}

double ZhangFusion::operator()(std::span<const Probability> scores) {
    if (scores.size() != thresholds_.size()) throw DimensionMismatch("score vector has wrong length");
    // Scores are near uniform: a counting pass by floor(p u) leaves each value in
    // its bucket range, so the insertion sort afterwards does little work.
    const std::size_t p = scores.size();
    const double pd = static_cast<double>(p);
    std::fill(bucket_start_.begin(), bucket_start_.end(), 0);
    for (double u : scores) ++bucket_start_[bucket_of(u, pd, p) + 1];
    std::partial_sum(bucket_start_.begin(), bucket_start_.end(), bucket_start_.begin());
    for (double u : scores) sorted_[bucket_start_[bucket_of(u, pd, p)]++] = u;
    for (std::size_t i = 1; i < p; ++i) {
        const double v = sorted_[i];
        std::size_t j = i;
        while (j > 0 && sorted_[j - 1] > v) {
            sorted_[j] = sorted_[j - 1];
            --j;
        }
        sorted_[j] = v;
    }
    double t = 0.0;
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
        const double u = sorted_[i];
        if (u < thresholds_[i]) continue;
        const double term = std::log((1.0 - u) / u) - log_denoms_[i];
        t += term * term;
    }
    return t;
}

double zhang_gof(std::span<const Probability> scores) {
    check_scores(scores);
    for (double u : scores) {
        if (!(u > 0.0 && u < 1.0)) throw DomainError("zhang_gof: scores must lie in (0, 1)");
    }
    ZhangFusion fusion(scores.size());
    return fusion(scores);
}

double max_stat(std::span<const Probability> scores) {
    check_scores(scores);
    return *std::max_element(scores.begin(), scores.end());
}

double sum_stat(std::span<const Probability> scores) {
    check_scores(scores);
    return std::accumulate(scores.begin(), scores.end(), 0.0);
}

double fuse(Statistic statistic, std::span<const Probability> scores) {
    switch (statistic) {
        case Statistic::zhang:
            return zhang_gof(scores);
        case Statistic::max:
            return max_stat(scores);
        case Statistic::sum:
            return sum_stat(scores);
    }
    return 0.0;
}

namespace {

void check_aligned(std::span<EwmaState> states, std::span<const StreamSpec> specs,
                   std::span<const SampleCounts> counts) {
    if (states.size() != specs.size() || counts.size() != specs.size()) {
        throw DimensionMismatch("chart_step: states, specs and counts must have one entry per stream");
    }
    if (specs.empty()) throw DomainError("chart_step: no streams");
}

ChartPoint finish(std::vector<Probability> scores, long k, const ChartConfig& config, bool retain) {
    ChartPoint point;
    point.k = k;
    point.value = fuse(config.statistic, scores);
    point.alarm = config.limit.has_value() && point.value > *config.limit;
    if (retain) point.local_scores = std::move(scores);
    return point;
}

}  // namespace

ChartPoint chart_step_serial(std::span<EwmaState> states, std::span<const StreamSpec> specs,
                             std::span<const SampleCounts> counts, const ChartConfig& config,
                             bool retain_scores) {
    config.validate();
    check_aligned(states, specs, counts);
    std::vector<Probability> scores(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        states[i] = ewma_update(states[i], counts[i], config.lambda);
        const double a = smoothed_stat(states[i], specs[i], config.sample_size);
        scores[i] = normalize(a, specs[i].degrees_of_freedom(), config.lambda);
    }
    return finish(std::move(scores), states.front().k, config, retain_scores);
}

ChartPoint chart_step(std::span<EwmaState> states, std::span<const StreamSpec> specs,
                      std::span<const SampleCounts> counts, const ChartConfig& config, bool retain_scores) {
    config.validate();
    check_aligned(states, specs, counts);
    const auto p = static_cast<long>(specs.size());
    std::vector<Probability> scores(specs.size());
    // Exceptions may not escape an OpenMP region; validate sizes up front.
    for (long i = 0; i < p; ++i) {
        if (counts[i].size() != states[i].w.size() ||
            states[i].w.size() != static_cast<std::size_t>(specs[i].levels())) {
            throw DimensionMismatch("chart_step: stream " + std::to_string(i) + " has mismatched levels");
        }
        const long total = std::accumulate(counts[i].begin(), counts[i].end(), 0L);
        const bool negative = std::any_of(counts[i].begin(), counts[i].end(), [](int c) { return c < 0; });
        if (negative || total != config.sample_size) {
            throw std::invalid_argument("chart_step: counts of stream " + std::to_string(i) +
                                        " are negative or do not sum to the sample size");
        }
    }
#pragma omp parallel for schedule(static) if (p >= 256)
    for (long i = 0; i < p; ++i) {
        ewma_update_in_place(states[i], counts[i], config.lambda);
        const double a = smoothed_stat(states[i], specs[i], config.sample_size);
        scores[i] = normalize(a, specs[i].degrees_of_freedom(), config.lambda);
    }
    return finish(std::move(scores), states.front().k, config, retain_scores);
}

}  // namespace catmon
