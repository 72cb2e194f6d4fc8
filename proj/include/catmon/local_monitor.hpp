#pragma once

// Per-stream statistics: raw -2LRT values, the EWMA recursion on grouped
// counts, the smoothed statistic A and its uniform-scale normalization U.

#include <span>
#include <vector>

#include "catmon/streams.hpp"

namespace catmon {

/// Bounds of every normalized local score; keeps ln(1/U - 1) finite.
inline constexpr double kScoreClamp = 1e-12;

/// Grouped counts n_ik of one sample; sums to the sample size N.
using SampleCounts = std::vector<int>;

/// Smoothed count vector w_ik and the number of samples folded into it.
struct EwmaState {
    std::vector<double> w;
    long k = 0;
};

/// w = N pi0, k = 0.
EwmaState init_state(const StreamSpec& spec, int sample_size);

/// w' = (1 - lambda) w + lambda n. Throws DimensionMismatch when the counts
/// have a different number of levels than the state.
EwmaState ewma_update(const EwmaState& state, std::span<const int> counts, double lambda);
void ewma_update_in_place(EwmaState& state, std::span<const int> counts, double lambda);

/// 2 sum_j n_j ln(n_j / (N pi0_j)), with 0 ln 0 = 0.
double raw_lrt_nominal(std::span<const int> counts, const NominalSpec& spec, int sample_size);
/// (alpha' n)^2 / (N alpha' Lambda alpha).
double raw_lrt_ordinal(std::span<const int> counts, const OrdinalSpec& spec, int sample_size);
double raw_lrt(std::span<const int> counts, const StreamSpec& spec, int sample_size);

/// The raw statistic evaluated on the smoothed counts; zero at w = N pi0.
double smoothed_stat(const EwmaState& state, const StreamSpec& spec, int sample_size);

/// chi_square_cdf(((2 - lambda) / lambda) A, df), clamped into
/// [kScoreClamp, 1 - kScoreClamp].
Probability normalize(double smoothed, int df, double lambda);

void validate_lambda(double lambda);

}  // namespace catmon
