#include "catmon/streams.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "catmon/errors.hpp"

namespace catmon {

NominalSpec::NominalSpec(std::vector<Probability> pi0) : pi0_(std::move(pi0)) {
    validate_distribution(pi0_, kMinLevelProbability);
}

OrdinalSpec::OrdinalSpec(std::vector<Probability> pi0, std::vector<double> cutpoints, LatentFamily family)
    : pi0_(std::move(pi0)), cutpoints_(std::move(cutpoints)), family_(family) {
    validate_distribution(pi0_, kMinLevelProbability);
    for (std::size_t j = 1; j < cutpoints_.size(); ++j) {
        if (!(cutpoints_[j] > cutpoints_[j - 1])) {
            throw InvalidDistribution("ordinal cut points must be strictly increasing");
        }
    }
    alpha_ = ordinal_scores(pi0_, family_);
    lambda_ = catmon::lambda_matrix(pi0_);
    const std::size_t h = pi0_.size();
    for (std::size_t r = 0; r < h; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < h; ++c) row += lambda_[r * h + c] * alpha_[c];
        quad_form_ += alpha_[r] * row;
    }
    if (!(quad_form_ > 0.0)) throw InvalidDistribution("ordinal score variance is not positive");
}

OrdinalSpec OrdinalSpec::from_probabilities(std::vector<Probability> pi0, LatentFamily family) {
    validate_distribution(pi0, kMinLevelProbability);
    auto cuts = cutpoints_from_probs(pi0, family);
    return OrdinalSpec(std::move(pi0), std::move(cuts), family);
}

OrdinalSpec OrdinalSpec::from_cutpoints(std::vector<double> cutpoints, LatentFamily family) {
    if (cutpoints.empty()) throw InvalidDistribution("ordinal stream needs at least one cut point");
    for (double c : cutpoints) {
        if (!std::isfinite(c)) throw InvalidDistribution("cut points must be finite");
    }
    auto pi0 = probs_from_cutpoints(cutpoints, family);
    return OrdinalSpec(std::move(pi0), std::move(cutpoints), family);
}

int StreamSpec::levels() const {
    return std::visit([](const auto& m) { return m.levels(); }, model_);
}

std::span<const Probability> StreamSpec::pi0() const {
    return std::visit([](const auto& m) { return m.pi0(); }, model_);
}

std::vector<double> ordinal_scores(std::span<const Probability> pi0, LatentFamily family) {
    validate_distribution(pi0);
    const std::size_t h = pi0.size();
    std::vector<double> alpha(h);
    // density at the lower boundary of the current interval; f(F^-1(0)) = 0
    double lower = 0.0;
    double cum = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
        if (!(pi0[j] > 0.0)) throw InvalidDistribution("ordinal scores need positive level probabilities");
        cum += pi0[j];
        double upper = 0.0;
        if (j + 1 < h) upper = latent_pdf(family, latent_quantile(family, std::min(cum, 1.0)));
        alpha[j] = (lower - upper) / pi0[j];
        lower = upper;
    }
    return alpha;
}

std::vector<double> lambda_matrix(std::span<const Probability> pi0) {
    const std::size_t h = pi0.size();
    std::vector<double> lam(h * h);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < h; ++c) lam[r * h + c] = (r == c ? pi0[r] : 0.0) - pi0[r] * pi0[c];
    }
    return lam;
}

std::vector<Probability> probs_from_cutpoints(std::span<const double> cutpoints, LatentFamily family,
                                              double delta) {
    std::vector<Probability> probs(cutpoints.size() + 1);
    double prev = 0.0;
    for (std::size_t j = 0; j < cutpoints.size(); ++j) {
        const double cur = latent_cdf(family, cutpoints[j] - delta);
        probs[j] = cur - prev;
        prev = cur;
    }
    // upper tail from the complement, which keeps relative accuracy for large cut points
    probs.back() = latent_cdf(family, -(cutpoints.back() - delta));
    return probs;
}

std::vector<double> cutpoints_from_probs(std::span<const Probability> pi0, LatentFamily family) {
    std::vector<double> cuts(pi0.size() - 1);
    double cum = 0.0;
    for (std::size_t j = 0; j + 1 < pi0.size(); ++j) {
        cum += pi0[j];
        cuts[j] = latent_quantile(family, std::min(cum, 1.0));
    }
    return cuts;
}

std::vector<Probability> shifted_probs_nominal(std::span<const Probability> pi0, std::span<const double> xi) {
    if (xi.size() != pi0.size()) throw ShiftError("nominal shift length does not match level count");
    const double total = std::accumulate(xi.begin(), xi.end(), 0.0);
    if (std::fabs(total) > 1e-12) throw ShiftError("nominal shift must sum to zero");
    std::vector<Probability> out(pi0.size());
    for (std::size_t j = 0; j < pi0.size(); ++j) {
        out[j] = pi0[j] + xi[j];
        if (!(out[j] > 0.0 && out[j] < 1.0)) {
            throw ShiftError("shifted probability of level " + std::to_string(j + 1) + " leaves (0, 1)");
        }
    }
    return out;
}

std::vector<Probability> shifted_probs_ordinal(const OrdinalSpec& spec, double delta) {
    if (delta == 0.0) return {spec.pi0().begin(), spec.pi0().end()};
    return probs_from_cutpoints(spec.cutpoints(), spec.family(), delta);
}

std::vector<Probability> sampling_probs(const StreamSpec& spec, const ShiftSpec& shift) {
    if (std::holds_alternative<NoShift>(shift)) return {spec.pi0().begin(), spec.pi0().end()};
    if (const auto* nominal = std::get_if<NominalShift>(&shift)) {
        if (spec.is_ordinal()) throw ShiftError("nominal shift applied to an ordinal stream");
        return shifted_probs_nominal(spec.pi0(), nominal->xi);
    }
    const auto& ordinal = std::get<OrdinalShift>(shift);
    if (!spec.is_ordinal()) throw ShiftError("latent location shift applied to a nominal stream");
    if (!std::isfinite(ordinal.delta)) throw ShiftError("latent shift must be finite");
    return shifted_probs_ordinal(spec.ordinal(), ordinal.delta);
}

void validate_shift(const StreamSpec& spec, const ShiftSpec& shift) { (void)sampling_probs(spec, shift); }

}  // namespace catmon
