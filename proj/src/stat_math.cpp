#include "catmon/stat_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "catmon/errors.hpp"

namespace catmon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_probability_arg(Probability p, const char* fn) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError(std::string(fn) + ": probability outside [0, 1]");
    }
}

// Wichura (1988), algorithm AS 241, PPND16. Relative accuracy about 1e-16.
double ppnd16(double p) {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                     67265.770927008700853) * r + 45921.953931549871457) * r +
                   13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
                     39307.89580009271061) * r + 21213.794301586595867) * r +
                   5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                    0.24178072517745061177) * r + 1.27045825245236838258) * r +
                  3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                    0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                  0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                  0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                    1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                  0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

double gamma_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper tail Q(a, x) by modified Lentz continued fraction.
double gamma_continued_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double normal_pdf(double x) {
    if (std::isinf(x)) return 0.0;
    return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

Probability normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(Probability p) {
    check_probability_arg(p, "normal_quantile");
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    return ppnd16(p);
}

double logistic_pdf(double x) {
    if (std::isinf(x)) return 0.0;
    const double e = std::exp(-std::fabs(x));
    return e / ((1.0 + e) * (1.0 + e));
}

Probability logistic_cdf(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logistic_quantile(Probability p) {
    check_probability_arg(p, "logistic_quantile");
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    return std::log(p) - std::log1p(-p);
}

double latent_pdf(LatentFamily family, double x) {
    return family == LatentFamily::normal ? normal_pdf(x) : logistic_pdf(x);
}

Probability latent_cdf(LatentFamily family, double x) {
    return family == LatentFamily::normal ? normal_cdf(x) : logistic_cdf(x);
}

double latent_quantile(LatentFamily family, Probability p) {
    return family == LatentFamily::normal ? normal_quantile(p) : logistic_quantile(p);
}

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0)) throw DomainError("regularized_gamma_p: shape must be positive");
    if (!(x >= 0.0)) throw DomainError("regularized_gamma_p: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return gamma_series(a, x);
    return 1.0 - gamma_continued_fraction(a, x);
}

Probability chi_square_cdf(double x, int df) {
    if (df < 1) throw DomainError("chi_square_cdf: df must be >= 1");
    if (!(x >= 0.0)) throw DomainError("chi_square_cdf: x must be nonnegative");
    if (df > kChiSquareRecurrenceMaxDf) return regularized_gamma_p(0.5 * df, 0.5 * x);
    if (std::isinf(x)) return 1.0;
    // P(a + 1, y) = P(a, y) - y^a e^-y / Gamma(a + 1), from a = 1/2 or a = 1.
    const double y = 0.5 * x;
    double p;
    double term;
    double a;
    if (df % 2 == 1) {
        p = std::erf(std::sqrt(y));
        term = 2.0 * std::sqrt(y / std::numbers::pi) * std::exp(-y);
        a = 1.5;
    } else {
        p = -std::expm1(-y);
        term = y * std::exp(-y);
        a = 2.0;
    }
    for (int d = (df % 2 == 1) ? 3 : 4; d <= df; d += 2) {
        p -= term;
        term *= y / a;
        a += 1.0;
    }
    return std::max(p, 0.0);
}

// ---------------------------------------------------------------------------

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngSeed derive_seed(std::uint64_t master, std::uint64_t scenario, std::uint64_t replication) {
    return RngSeed{mix64(master ^ mix64(scenario)), replication};
}

Rng::Rng(RngSeed seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed.seed), static_cast<std::uint32_t>(seed.seed >> 32),
                      static_cast<std::uint32_t>(seed.stream_index),
                      static_cast<std::uint32_t>(seed.stream_index >> 32)};
    engine_.seed(seq);
}

void validate_distribution(std::span<const Probability> probs, double min_prob, double sum_tol) {
    if (probs.size() < 2) throw InvalidDistribution("distribution needs at least two levels");
    double sum = 0.0;
    for (double v : probs) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidDistribution("probability outside [0, 1]");
        if (v < min_prob) {
            throw InvalidDistribution("level probability " + std::to_string(v) + " below floor " +
                                      std::to_string(min_prob));
        }
        sum += v;
    }
    if (std::fabs(sum - 1.0) > sum_tol) {
        throw InvalidDistribution("probabilities sum to " + std::to_string(sum) + ", not 1");
    }
}

namespace {

// Tail masses sum_{l >= j} probs[l], accumulated from the back.
std::vector<double> tail_masses(std::span<const Probability> probs) {
    std::vector<double> tail(probs.size() + 1, 0.0);
    for (std::size_t j = probs.size(); j-- > 0;) tail[j] = tail[j + 1] + probs[j];
    return tail;
}

double conditional_probability(double pj, double tail) {
    if (tail <= 0.0) return 1.0;
    return std::clamp(pj / tail, 0.0, 1.0);
}

}  // namespace

std::vector<int> multinomial_sample(Rng& rng, int n, std::span<const Probability> probs) {
    validate_distribution(probs);
    if (n < 0) throw DomainError("multinomial_sample: negative sample size");
    const auto tail = tail_masses(probs);
    std::vector<int> counts(probs.size(), 0);
    int remaining = n;
    for (std::size_t j = 0; j + 1 < probs.size() && remaining > 0; ++j) {
        const double q = conditional_probability(probs[j], tail[j]);
        int draw = remaining;
        if (q < 1.0) draw = std::binomial_distribution<int>(remaining, q)(rng.engine());
        counts[j] = draw;
        remaining -= draw;
    }
    counts.back() += remaining;
    return counts;
}

// ---------------------------------------------------------------------------

MultinomialSampler::MultinomialSampler(int n, std::span<const Probability> probs)
    : n_(n), levels_(static_cast<int>(probs.size())) {
    validate_distribution(probs);
    if (n < 0) throw DomainError("MultinomialSampler: negative sample size");
    const std::size_t stages = probs.size() - 1;
    const std::size_t per_stage = static_cast<std::size_t>(n + 1) * (n + 2) / 2;
    const auto tail = tail_masses(probs);

    cond_prob_.resize(stages);
    for (std::size_t s = 0; s < stages; ++s) cond_prob_[s] = conditional_probability(probs[s], tail[s]);
    if (stages * per_stage > kMaxTableEntries) {
        tabled_ = false;
        return;
    }
    cdf_.resize(stages * per_stage);
    guide_.resize(stages * per_stage);

    std::vector<double> log_factorial(n + 1);
    for (int i = 0; i <= n; ++i) log_factorial[i] = std::lgamma(i + 1.0);
    std::vector<double> pmf;
    for (std::size_t s = 0; s < stages; ++s) {
        const double q = cond_prob_[s];
        for (int m = 0; m <= n; ++m) {
            const std::size_t off = table_offset(static_cast<int>(s), m);
            pmf.assign(m + 1, 0.0);
            if (q <= 0.0) {
                pmf[0] = 1.0;
            } else if (q >= 1.0) {
                pmf[m] = 1.0;
            } else {
                const double lq = std::log(q);
                const double l1q = std::log1p(-q);
                for (int x = 0; x <= m; ++x) {
                    pmf[x] = std::exp(log_factorial[m] - log_factorial[x] - log_factorial[m - x] + x * lq +
                                      (m - x) * l1q);
                }
            }
            const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
            double acc = 0.0;
            for (int x = 0; x <= m; ++x) {
                acc += pmf[x] / total;
                cdf_[off + x] = acc;
            }
            cdf_[off + m] = 1.0;
            // guide[g] = smallest x with cdf[x] > g / (m + 1)
            int x = 0;
            for (int g = 0; g <= m; ++g) {
                const double level = static_cast<double>(g) / (m + 1);
                while (cdf_[off + x] <= level) ++x;
                guide_[off + g] = x;
            }
        }
    }
}

std::size_t MultinomialSampler::table_offset(int stage, int remaining) const {
    const std::size_t per_stage = static_cast<std::size_t>(n_ + 1) * (n_ + 2) / 2;
    return stage * per_stage + static_cast<std::size_t>(remaining) * (remaining + 1) / 2;
}

int MultinomialSampler::draw_stage(Rng& rng, int stage, int remaining) const {
    if (!tabled_) {
        const double q = cond_prob_[stage];
        if (q >= 1.0) return remaining;
        return std::binomial_distribution<int>(remaining, q)(rng.engine());
    }
    const std::size_t off = table_offset(stage, remaining);
    const double u = rng.uniform();
    int x = guide_[off + static_cast<std::size_t>(u * (remaining + 1))];
    while (cdf_[off + x] <= u) ++x;
    return x;
}

void MultinomialSampler::sample(Rng& rng, std::span<int> counts) const {
    if (static_cast<int>(counts.size()) != levels_) {
        throw DimensionMismatch("MultinomialSampler: output span has wrong length");
    }
    int remaining = n_;
    for (int s = 0; s + 1 < levels_; ++s) {
        if (remaining == 0) {
            counts[s] = 0;
            continue;
        }
        const int draw = draw_stage(rng, s, remaining);
        counts[s] = draw;
        remaining -= draw;
    }
    counts[levels_ - 1] = remaining;
}

std::vector<int> MultinomialSampler::sample(Rng& rng) const {
    std::vector<int> counts(levels_);
    sample(rng, counts);
    return counts;
}

}  // namespace catmon
