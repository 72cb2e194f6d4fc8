#pragma once

// Scalar distribution functions and seedable sampling shared by every module.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace catmon {

/// A probability in [0, 1]. Kept as a plain double: the hot loops pass
/// thousands of these per sample and the range is checked at API boundaries.
using Probability = double;

// ---------------------------------------------------------------------------
// Continuous distributions
// ---------------------------------------------------------------------------

double normal_pdf(double x);
Probability normal_cdf(double x);
/// Inverse of normal_cdf. p = 0 and p = 1 map to -inf/+inf; anything outside
/// [0, 1] (or NaN) throws DomainError.
double normal_quantile(Probability p);

double logistic_pdf(double x);
Probability logistic_cdf(double x);
double logistic_quantile(Probability p);

/// Latent distribution behind an ordinal stream.
enum class LatentFamily { normal, logistic };

double latent_pdf(LatentFamily family, double x);
Probability latent_cdf(LatentFamily family, double x);
double latent_quantile(LatentFamily family, Probability p);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
/// Series for x < a + 1, continued fraction otherwise.
double regularized_gamma_p(double a, double x);

inline constexpr int kChiSquareRecurrenceMaxDf = 12;

/// Chi-square CDF with integer degrees of freedom.
/// Up to kChiSquareRecurrenceMaxDf: erf or expm1 stepped up by the finite
/// recurrence in the shape parameter. Larger df: regularized_gamma_p(df/2, x/2).
Probability chi_square_cdf(double x, int df);

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

struct RngSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream_index = 0;

    friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for replication `replication` of sub-experiment `scenario` under `master`.
/// Depends only on its arguments, never on the executing thread.
RngSeed derive_seed(std::uint64_t master, std::uint64_t scenario, std::uint64_t replication);

/// Single-owner random source. Copying duplicates the stream state.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(RngSeed seed);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    engine_type& engine() { return engine_; }

private:
    engine_type engine_;
};

/// Counts from Multinomial(n, probs) by sequential conditional binomials.
/// probs must sum to 1 within 1e-12 and have at least two entries.
std::vector<int> multinomial_sample(Rng& rng, int n, std::span<const Probability> probs);

/// Precomputed sampler for repeated Multinomial(n, probs) draws.
///
/// Each conditional binomial stage keeps an inverse-CDF table for every
/// possible remaining count, with a guide table for O(1) expected search.
/// A draw consumes one uniform per stage while the remainder is positive.
/// Sample sizes whose tables would exceed kMaxTableEntries fall back to
/// drawing each stage with std::binomial_distribution.
class MultinomialSampler {
public:
    static constexpr std::size_t kMaxTableEntries = std::size_t{1} << 22;

    MultinomialSampler(int n, std::span<const Probability> probs);

    int levels() const { return levels_; }
    int sample_size() const { return n_; }

    void sample(Rng& rng, std::span<int> counts) const;
    std::vector<int> sample(Rng& rng) const;

private:
    int draw_stage(Rng& rng, int stage, int remaining) const;
    std::size_t table_offset(int stage, int remaining) const;

    int n_;
    int levels_;
    bool tabled_ = true;
    std::vector<double> cond_prob_;  // per stage, conditional success probability
    std::vector<double> cdf_;
    std::vector<std::int32_t> guide_;
};

/// Throws InvalidDistribution unless probs is a valid distribution with at
/// least two levels and every entry >= min_prob.
void validate_distribution(std::span<const Probability> probs, double min_prob = 0.0,
                           double sum_tol = 1e-12);

}  // namespace catmon
