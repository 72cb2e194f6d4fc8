#include "catmon/local_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "catmon/errors.hpp"

namespace catmon {

namespace {

void check_counts(std::span<const int> counts, std::size_t levels, int sample_size) {
    if (counts.size() != levels) {
        throw DimensionMismatch("sample has " + std::to_string(counts.size()) + " levels, stream has " +
                                std::to_string(levels));
    }
    long total = 0;
    for (int c : counts) {
        if (c < 0) throw std::invalid_argument("negative level count");
        total += c;
    }
    if (sample_size >= 0 && total != sample_size) {
        throw std::invalid_argument("level counts sum to " + std::to_string(total) + ", sample size is " +
                                    std::to_string(sample_size));
    }
}

double ordinal_form(std::span<const double> alpha, const auto& values) {
    double dot = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) dot += alpha[j] * values[j];
    return dot;
}

}  // namespace

void validate_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw DomainError("smoothing parameter must lie in (0, 1]");
}

EwmaState init_state(const StreamSpec& spec, int sample_size) {
    if (sample_size < 1) throw DomainError("sample size must be >= 1");
    EwmaState state;
    state.w.reserve(spec.levels());
    for (double p : spec.pi0()) state.w.push_back(sample_size * p);
    return state;
}

void ewma_update_in_place(EwmaState& state, std::span<const int> counts, double lambda) {
    check_counts(counts, state.w.size(), -1);
    const double keep = 1.0 - lambda;
    for (std::size_t j = 0; j < state.w.size(); ++j) state.w[j] = keep * state.w[j] + lambda * counts[j];
    ++state.k;
}

EwmaState ewma_update(const EwmaState& state, std::span<const int> counts, double lambda) {
    validate_lambda(lambda);
    EwmaState next = state;
    ewma_update_in_place(next, counts, lambda);
    return next;
}

double raw_lrt_nominal(std::span<const int> counts, const NominalSpec& spec, int sample_size) {
    check_counts(counts, spec.pi0().size(), sample_size);
    double r = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] == 0) continue;
        r += counts[j] * std::log(counts[j] / (sample_size * spec.pi0()[j]));
    }
    return std::max(0.0, 2.0 * r);
}

double raw_lrt_ordinal(std::span<const int> counts, const OrdinalSpec& spec, int sample_size) {
    check_counts(counts, spec.pi0().size(), sample_size);
    const double dot = ordinal_form(spec.scores(), counts);
    return dot * dot / (sample_size * spec.score_variance());
}

double raw_lrt(std::span<const int> counts, const StreamSpec& spec, int sample_size) {
    if (spec.is_ordinal()) return raw_lrt_ordinal(counts, spec.ordinal(), sample_size);
    return raw_lrt_nominal(counts, spec.nominal(), sample_size);
}

double smoothed_stat(const EwmaState& state, const StreamSpec& spec, int sample_size) {
    if (state.w.size() != static_cast<std::size_t>(spec.levels())) {
        throw DimensionMismatch("EWMA state does not match stream level count");
    }
    if (spec.is_ordinal()) {
        const auto& ord = spec.ordinal();
        const double dot = ordinal_form(ord.scores(), state.w);
        return dot * dot / (sample_size * ord.score_variance());
    }
    const auto pi0 = spec.pi0();
    double a = 0.0;
    for (std::size_t j = 0; j < state.w.size(); ++j) {
        a += state.w[j] * std::log(state.w[j] / (sample_size * pi0[j]));
    }
    return std::max(0.0, 2.0 * a);
}

Probability normalize(double smoothed, int df, double lambda) {
    const double u = chi_square_cdf((2.0 - lambda) / lambda * smoothed, df);
    return std::clamp(u, kScoreClamp, 1.0 - kScoreClamp);
}

}  // namespace catmon
