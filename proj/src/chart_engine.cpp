#include "catmon/chart_engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "catmon/errors.hpp"
#include "catmon/local_monitor.hpp"

namespace catmon {

ChartEngine::ChartEngine(std::span<const StreamSpec> specs, std::span<const ShiftSpec> shifts, double lambda,
                         int sample_size)
    : lambda_(lambda), sample_size_(sample_size) {
    validate_lambda(lambda);
    if (sample_size < 1) throw DomainError("sample size must be >= 1");
    if (specs.empty()) throw DomainError("chart needs at least one stream");
    if (!shifts.empty() && shifts.size() != specs.size()) {
        throw DimensionMismatch("shift list must be empty or have one entry per stream");
    }
    std::map<std::vector<Probability>, int> sampler_index;
    layout_.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const StreamSpec& spec = specs[i];
        const ShiftSpec shift = shifts.empty() ? ShiftSpec{NoShift{}} : shifts[i];
        auto probs = sampling_probs(spec, shift);
        auto [it, inserted] = sampler_index.try_emplace(probs, static_cast<int>(samplers_.size()));
        if (inserted) samplers_.emplace_back(sample_size, probs);

        StreamLayout entry{static_cast<int>(initial_.size()), spec.levels(), spec.degrees_of_freedom(), it->second,
                           -1};
        for (double p : spec.pi0()) {
            initial_.push_back(sample_size * p);
            expected_.push_back(sample_size * p);
        }
        if (spec.is_ordinal()) {
            entry.ordinal = static_cast<int>(score_variance_.size());
            score_variance_.push_back(spec.ordinal().score_variance());
            for (double a : spec.ordinal().scores()) alpha_.push_back(a);
        } else {
            alpha_.insert(alpha_.end(), static_cast<std::size_t>(spec.levels()), 0.0);
        }
        max_levels_ = std::max(max_levels_, spec.levels());
        layout_.push_back(entry);
    }
}

void ChartEngine::reset(std::span<double> w) const { std::copy(initial_.begin(), initial_.end(), w.begin()); }

void ChartEngine::step(Rng& rng, std::span<double> w, ChartWorkspace& ws) const {
    const double keep = 1.0 - lambda_;
    int* counts = ws.counts.data();
    for (std::size_t i = 0; i < layout_.size(); ++i) {
        const StreamLayout& s = layout_[i];
        const MultinomialSampler& sampler = samplers_[s.sampler];
        sampler.sample(rng, std::span<int>(counts, static_cast<std::size_t>(s.levels)));
        double* wi = w.data() + s.offset;
        for (int j = 0; j < s.levels; ++j) wi[j] = keep * wi[j] + lambda_ * counts[j];

        double a;
        if (s.ordinal >= 0) {
            const double* alpha = alpha_.data() + s.offset;
            double dot = 0.0;
            for (int j = 0; j < s.levels; ++j) dot += alpha[j] * wi[j];
            a = dot * dot / (sample_size_ * score_variance_[s.ordinal]);
        } else {
            const double* expected = expected_.data() + s.offset;
            double acc = 0.0;
            for (int j = 0; j < s.levels; ++j) acc += wi[j] * std::log(wi[j] / expected[j]);
            a = std::max(0.0, 2.0 * acc);
        }
        ws.scores[i] = normalize(a, s.df, lambda_);
    }
}

double ChartEngine::evaluate(Statistic statistic, ChartWorkspace& ws) const {
    switch (statistic) {
        case Statistic::zhang:
            return ws.zhang(ws.scores);
        case Statistic::max:
            return *std::max_element(ws.scores.begin(), ws.scores.end());
        case Statistic::sum:
            return std::accumulate(ws.scores.begin(), ws.scores.end(), 0.0);
    }
    return 0.0;
}

}  // namespace catmon
