#pragma once

// Stream models (nominal / ordinal) and the shifts that define out-of-control behavior.

#include <span>
#include <variant>
#include <vector>

#include "catmon/stat_math.hpp"

namespace catmon {

/// Smallest level probability accepted when constructing a stream model.
inline constexpr double kMinLevelProbability = 1e-9;

/// Nominal stream: h unordered levels with in-control probabilities pi0.
class NominalSpec {
public:
    explicit NominalSpec(std::vector<Probability> pi0);

    int levels() const { return static_cast<int>(pi0_.size()); }
    std::span<const Probability> pi0() const { return pi0_; }

private:
    std::vector<Probability> pi0_;
};

/// Ordinal stream: levels obtained by cutting a latent variable at strictly
/// increasing cut points. Stores both representations plus the scores alpha,
/// the multinomial covariance Lambda and the quadratic form alpha' Lambda alpha.
class OrdinalSpec {
public:
    static OrdinalSpec from_probabilities(std::vector<Probability> pi0,
                                          LatentFamily family = LatentFamily::normal);
    static OrdinalSpec from_cutpoints(std::vector<double> cutpoints,
                                      LatentFamily family = LatentFamily::normal);

    int levels() const { return static_cast<int>(pi0_.size()); }
    LatentFamily family() const { return family_; }
    std::span<const Probability> pi0() const { return pi0_; }
    std::span<const double> cutpoints() const { return cutpoints_; }
    std::span<const double> scores() const { return alpha_; }
    /// Row-major h x h.
    std::span<const double> lambda_matrix() const { return lambda_; }
    double score_variance() const { return quad_form_; }

private:
    OrdinalSpec(std::vector<Probability> pi0, std::vector<double> cutpoints, LatentFamily family);

    std::vector<Probability> pi0_;
    std::vector<double> cutpoints_;
    LatentFamily family_;
    std::vector<double> alpha_;
    std::vector<double> lambda_;
    double quad_form_ = 0.0;
};

using StreamModel = std::variant<NominalSpec, OrdinalSpec>;

class StreamSpec {
public:
    StreamSpec(int id, StreamModel model) : id_(id), model_(std::move(model)) {}

    int id() const { return id_; }
    const StreamModel& model() const { return model_; }
    bool is_ordinal() const { return std::holds_alternative<OrdinalSpec>(model_); }
    const OrdinalSpec& ordinal() const { return std::get<OrdinalSpec>(model_); }
    const NominalSpec& nominal() const { return std::get<NominalSpec>(model_); }

    int levels() const;
    std::span<const Probability> pi0() const;
    /// Degrees of freedom of the asymptotic chi-square law of the local statistic:
    /// h - 1 for nominal streams, 1 for ordinal streams.
    int degrees_of_freedom() const { return is_ordinal() ? 1 : levels() - 1; }

private:
    int id_;
    StreamModel model_;
};

struct NoShift {
    friend bool operator==(const NoShift&, const NoShift&) = default;
};
/// Additive change xi of a nominal probability vector; sums to zero.
struct NominalShift {
    std::vector<double> xi;
    friend bool operator==(const NominalShift&, const NominalShift&) = default;
};
/// Location shift delta of an ordinal stream's latent variable.
struct OrdinalShift {
    double delta = 0.0;
    friend bool operator==(const OrdinalShift&, const OrdinalShift&) = default;
};
using ShiftSpec = std::variant<NoShift, NominalShift, OrdinalShift>;

/// alpha_j = [f(F^-1(c_{j-1})) - f(F^-1(c_j))] / pi0_j with c the cumulative pi0.
std::vector<double> ordinal_scores(std::span<const Probability> pi0,
                                   LatentFamily family = LatentFamily::normal);

/// diag(pi0) - pi0 pi0', row-major.
std::vector<double> lambda_matrix(std::span<const Probability> pi0);

std::vector<Probability> probs_from_cutpoints(std::span<const double> cutpoints,
                                              LatentFamily family = LatentFamily::normal,
                                              double delta = 0.0);
std::vector<double> cutpoints_from_probs(std::span<const Probability> pi0,
                                         LatentFamily family = LatentFamily::normal);

/// pi0 + xi. Throws ShiftError when xi has the wrong length, does not sum to
/// zero, or pushes a component out of (0, 1).
std::vector<Probability> shifted_probs_nominal(std::span<const Probability> pi0,
                                               std::span<const double> xi);

/// Level probabilities after shifting the latent variable by delta.
std::vector<Probability> shifted_probs_ordinal(const OrdinalSpec& spec, double delta);

/// Level probabilities a stream actually samples from under `shift`.
/// Throws ShiftError when the shift kind does not match the stream kind.
std::vector<Probability> sampling_probs(const StreamSpec& spec, const ShiftSpec& shift);

void validate_shift(const StreamSpec& spec, const ShiftSpec& shift);

}  // namespace catmon
