#include "catmon/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "catmon/errors.hpp"
#include "catmon/local_monitor.hpp"

namespace catmon {

RunLengthSummary summarize_run_lengths(std::span<const long> run_lengths, long cap) {
    RunLengthSummary out;
    out.reps = static_cast<long>(run_lengths.size());
    out.cap = cap;
    if (run_lengths.empty()) return out;
    double sum = 0.0;
    long capped = 0;
    for (long rl : run_lengths) {
        sum += static_cast<double>(rl);
        if (rl >= cap) ++capped;
    }
    const double n = static_cast<double>(run_lengths.size());
    out.arl = sum / n;
    if (run_lengths.size() > 1) {
        double ss = 0.0;
        for (long rl : run_lengths) {
            const double d = static_cast<double>(rl) - out.arl;
            ss += d * d;
        }
        out.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    out.capped_fraction = static_cast<double>(capped) / n;
    return out;
}

namespace {

void check_cap(long cap) {
    if (cap < 1) throw DomainError("run-length cap must be >= 1");
}

double limit_or_infinity(const ChartConfig& config) {
    return config.limit.value_or(std::numeric_limits<double>::infinity());
}

}  // namespace

std::vector<long> simulate_run_lengths(const ChartEngine& engine, std::span<const ChartLimit> charts, Rng& rng,
                                       ChartWorkspace& ws, std::span<double> state, long cap) {
    std::vector<long> run_lengths(charts.size(), 0);
    std::size_t pending = charts.size();
    engine.reset(state);
    for (long k = 1; k <= cap && pending > 0; ++k) {
        engine.step(rng, state, ws);
        std::array<double, 3> value{};
        std::array<bool, 3> computed{};
        for (std::size_t c = 0; c < charts.size(); ++c) {
            if (run_lengths[c] != 0) continue;
            const auto s = static_cast<std::size_t>(charts[c].statistic);
            if (!computed[s]) {
                value[s] = engine.evaluate(charts[c].statistic, ws);
                computed[s] = true;
            }
            if (value[s] > charts[c].limit) {
                run_lengths[c] = k;
                --pending;
            }
        }
    }
    for (long& rl : run_lengths) {
        if (rl == 0) rl = cap;
    }
    return run_lengths;
}

long simulate_run_length(std::span<const StreamSpec> specs, std::span<const ShiftSpec> shifts,
                         const ChartConfig& config, Rng& rng, long cap) {
    config.validate();
    check_cap(cap);
    const ChartEngine engine(specs, shifts, config.lambda, config.sample_size);
    auto ws = engine.make_workspace();
    std::vector<double> state(engine.state_size());
    const ChartLimit chart{config.statistic, limit_or_infinity(config)};
    return simulate_run_lengths(engine, std::span(&chart, 1), rng, ws, state, cap).front();
}

long simulate_run_length_reference(std::span<const StreamSpec> specs, std::span<const ShiftSpec> shifts,
                                   const ChartConfig& config, Rng& rng, long cap) {
    config.validate();
    check_cap(cap);
    if (!shifts.empty() && shifts.size() != specs.size()) {
        throw DimensionMismatch("shift list must be empty or have one entry per stream");
    }
    std::vector<MultinomialSampler> samplers;
    std::vector<EwmaState> states;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const ShiftSpec shift = shifts.empty() ? ShiftSpec{NoShift{}} : shifts[i];
        samplers.emplace_back(config.sample_size, sampling_probs(specs[i], shift));
        states.push_back(init_state(specs[i], config.sample_size));
    }
    ChartConfig monitored = config;
    monitored.limit = limit_or_infinity(config);
    std::vector<SampleCounts> counts(specs.size());
    for (long k = 1; k <= cap; ++k) {
        for (std::size_t i = 0; i < specs.size(); ++i) counts[i] = samplers[i].sample(rng);
        if (chart_step_serial(states, specs, counts, monitored).alarm) return k;
    }
    return cap;
}

std::vector<RunLengthSummary> estimate_arl_multi(const ChartEngine& engine, std::span<const ChartLimit> charts,
                                                 long reps, std::uint64_t master_seed, long cap,
                                                 std::uint64_t scenario) {
    if (reps < 1) throw DomainError("need at least one replication");
    check_cap(cap);
    const std::size_t nc = charts.size();
    std::vector<long> run_lengths(static_cast<std::size_t>(reps) * nc);
#pragma omp parallel
    {
        auto ws = engine.make_workspace();
        std::vector<double> state(engine.state_size());
#pragma omp for schedule(dynamic, 4)
        for (long r = 0; r < reps; ++r) {
            Rng rng(derive_seed(master_seed, scenario, static_cast<std::uint64_t>(r)));
            const auto rl = simulate_run_lengths(engine, charts, rng, ws, state, cap);
            std::copy(rl.begin(), rl.end(), run_lengths.begin() + r * static_cast<long>(nc));
        }
    }
    std::vector<RunLengthSummary> out;
    std::vector<long> column(static_cast<std::size_t>(reps));
    for (std::size_t c = 0; c < nc; ++c) {
        for (long r = 0; r < reps; ++r) column[r] = run_lengths[r * nc + c];
        out.push_back(summarize_run_lengths(column, cap));
    }
    return out;
}

RunLengthSummary estimate_arl(std::span<const StreamSpec> specs, std::span<const ShiftSpec> shifts,
                              const ChartConfig& config, long reps, std::uint64_t master_seed, long cap,
                              std::uint64_t scenario) {
    config.validate();
    const ChartEngine engine(specs, shifts, config.lambda, config.sample_size);
    const ChartLimit chart{config.statistic, limit_or_infinity(config)};
    return estimate_arl_multi(engine, std::span(&chart, 1), reps, master_seed, cap, scenario).front();
}

RunLengthSummary estimate_arl_serial(std::span<const StreamSpec> specs, std::span<const ShiftSpec> shifts,
                                     const ChartConfig& config, long reps, std::uint64_t master_seed, long cap,
                                     std::uint64_t scenario) {
    if (reps < 1) throw DomainError("need at least one replication");
    std::vector<long> run_lengths;
    run_lengths.reserve(static_cast<std::size_t>(reps));
    for (long r = 0; r < reps; ++r) {
        Rng rng(derive_seed(master_seed, scenario, static_cast<std::uint64_t>(r)));
        run_lengths.push_back(simulate_run_length_reference(specs, shifts, config, rng, cap));
    }
    return summarize_run_lengths(run_lengths, cap);
}

// ---------------------------------------------------------------------------

RunLengthEnsemble::RunLengthEnsemble(const ChartEngine& engine, std::vector<Statistic> channels, long reps,
                                     std::uint64_t master_seed, std::uint64_t scenario, long cap)
    : engine_(engine), channels_(std::move(channels)), cap_(cap) {
    if (reps < 1) throw DomainError("need at least one replication");
    if (channels_.empty()) throw DomainError("ensemble needs at least one statistic");
    check_cap(cap);
    reps_.reserve(static_cast<std::size_t>(reps));
    for (long r = 0; r < reps; ++r) {
        auto& rep = reps_.emplace_back(derive_seed(master_seed, scenario, static_cast<std::uint64_t>(r)));
        rep.running_max.assign(channels_.size(), -std::numeric_limits<double>::infinity());
        rep.records.resize(channels_.size());
    }
    states_.resize(static_cast<std::size_t>(reps) * engine_.state_size());
    for (long r = 0; r < reps; ++r) {
        engine_.reset(std::span(states_).subspan(r * engine_.state_size(), engine_.state_size()));
    }
}

void RunLengthEnsemble::advance(std::span<const double> limits, long horizon) {
    if (limits.size() != channels_.size()) throw DimensionMismatch("one limit per channel required");
    const long n = reps();
    const std::size_t width = engine_.state_size();
    const std::size_t nc = channels_.size();
#pragma omp parallel
    {
        auto ws = engine_.make_workspace();
#pragma omp for schedule(dynamic, 4)
        for (long r = 0; r < n; ++r) {
            Replication& rep = reps_[r];
            const auto state = std::span(states_).subspan(r * width, width);
            auto needs_more = [&] {
                if (rep.k >= cap_) return false;
                if (rep.k < horizon) return true;
                for (std::size_t c = 0; c < nc; ++c) {
                    if (rep.running_max[c] <= limits[c]) return true;
                }
                return false;
            };
            while (needs_more()) {
                engine_.step(rep.rng, state, ws);
                ++rep.k;
                for (std::size_t c = 0; c < nc; ++c) {
                    const double value = engine_.evaluate(channels_[c], ws);
                    if (value > rep.running_max[c]) {
                        rep.running_max[c] = value;
                        rep.records[c].push_back({rep.k, value});
                    }
                }
            }
        }
    }
}

long RunLengthEnsemble::run_length(const Replication& rep, std::size_t channel, double limit) const {
    const auto& records = rep.records[channel];
    auto it = std::upper_bound(records.begin(), records.end(), limit,
                               [](double l, const Record& rec) { return l < rec.value; });
    if (it != records.end()) return it->k;
    return rep.k >= cap_ ? cap_ : -1;
}

bool RunLengthEnsemble::covered(std::size_t channel, double limit) const {
    return std::all_of(reps_.begin(), reps_.end(),
                       [&](const Replication& rep) { return run_length(rep, channel, limit) > 0; });
}

RunLengthSummary RunLengthEnsemble::summary(std::size_t channel, double limit) const {
    std::vector<long> rls;
    rls.reserve(reps_.size());
    for (const auto& rep : reps_) {
        const long rl = run_length(rep, channel, limit);
        if (rl < 0) throw std::logic_error("RunLengthEnsemble::summary: limit beyond simulated horizon");
        rls.push_back(rl);
    }
    return summarize_run_lengths(rls, cap_);
}

double RunLengthEnsemble::censored_arl(std::size_t channel, double limit, long horizon) const {
    const long h = std::min(horizon, cap_);
    double total = 0.0;
    for (const auto& rep : reps_) {
        if (rep.k < h) throw std::logic_error("RunLengthEnsemble::censored_arl: horizon not simulated");
        const auto& records = rep.records[channel];
        auto it = std::upper_bound(records.begin(), records.end(), limit,
                                   [](double l, const Record& rec) { return l < rec.value; });
        total += static_cast<double>(it != records.end() ? std::min(it->k, h) : h);
    }
    return total / static_cast<double>(reps_.size());
}

std::vector<double> RunLengthEnsemble::record_values(std::size_t channel) const {
    std::vector<double> values;
    for (const auto& rep : reps_) {
        for (const auto& rec : rep.records[channel]) values.push_back(rec.value);
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

long RunLengthEnsemble::total_steps() const {
    long total = 0;
    for (const auto& rep : reps_) total += rep.k;
    return total;
}

// ---------------------------------------------------------------------------

namespace {

// Replications are first run to this multiple of the target.
constexpr double kHorizonFactor = 2.0;

// Smallest candidate limit whose censored ARL reaches the target. Censoring
// only shortens run lengths, so the true ARL there is at least the target.
double upper_bracket(const RunLengthEnsemble& ensemble, std::size_t channel, double target, long horizon) {
    if (ensemble.censored_arl(channel, 0.0, horizon) >= target) return 0.0;
    const auto values = ensemble.record_values(channel);
    // the largest record value leaves every replication censored
    auto it = std::partition_point(values.begin(), values.end(), [&](double v) {
        return ensemble.censored_arl(channel, v, horizon) < target;
    });
    if (it == values.end()) throw std::logic_error("upper_bracket: censored ARL never reaches the target");
    return *it;
}

}  // namespace

std::vector<CalibrationResult> calibrate_limits(const ChartEngine& engine, std::span<const Statistic> statistics,
                                                double target_arl, const CalibrationOptions& options) {
    if (!(target_arl > 1.0)) throw DomainError("target ARL must exceed 1");
    if (!(options.tol_rel > 0.0)) throw DomainError("relative tolerance must be positive");
    if (target_arl >= static_cast<double>(options.cap)) {
        throw BracketError("target ARL " + std::to_string(target_arl) + " is not below the run-length cap");
    }
    const std::size_t nc = statistics.size();
    RunLengthEnsemble ensemble(engine, {statistics.begin(), statistics.end()}, options.reps, options.seed,
                               kSearchScenario, options.cap);

    const long horizon =
        std::min(options.cap, static_cast<long>(std::ceil(kHorizonFactor * target_arl)));
    const std::vector<double> none(nc, -std::numeric_limits<double>::infinity());
    ensemble.advance(none, horizon);

    std::vector<double> hi(nc);
    for (std::size_t c = 0; c < nc; ++c) hi[c] = upper_bracket(ensemble, c, target_arl, horizon);
    ensemble.advance(hi);

    std::vector<CalibrationResult> results(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        CalibrationResult& res = results[c];
        res.statistic = statistics[c];
        res.target_arl = target_arl;
        res.reps = options.reps;
        res.bracket_low = 0.0;
        res.bracket_high = hi[c];
        if (options.progress) {
            options.progress("bracket " + std::string(to_string(statistics[c])) + " [0, " + std::to_string(hi[c]) +
                             "] ARL " + std::to_string(ensemble.summary(c, 0.0).arl) + " to " +
                             std::to_string(ensemble.summary(c, hi[c]).arl) + ", " +
                             std::to_string(ensemble.total_steps()) + " steps");
        }
        double lo = 0.0;
        double up = hi[c];
        double mid = up;
        RunLengthSummary at_mid = ensemble.summary(c, up);
        if (ensemble.summary(c, 0.0).arl < target_arl) {
            for (int it = 0; it < options.max_iterations; ++it) {
                mid = 0.5 * (lo + up);
                at_mid = ensemble.summary(c, mid);
                res.iterations = it + 1;
                if (std::fabs(at_mid.arl - target_arl) / target_arl <= options.tol_rel) break;
                if (at_mid.arl < target_arl) {
                    lo = mid;
                } else {
                    up = mid;
                }
            }
        } else {
            mid = 0.0;
            at_mid = ensemble.summary(c, 0.0);
        }
        res.limit = mid;
        res.search_arl = at_mid.arl;
        res.achieved_arl = at_mid.arl;
        res.achieved_se = at_mid.se;
        res.capped_fraction = at_mid.capped_fraction;
    }

    if (options.confirm) {
        std::vector<ChartLimit> charts;
        for (const auto& res : results) charts.push_back({res.statistic, res.limit});
        const auto confirmed =
            estimate_arl_multi(engine, charts, options.reps, options.seed, options.cap, kConfirmScenario);
        for (std::size_t c = 0; c < nc; ++c) {
            results[c].achieved_arl = confirmed[c].arl;
            results[c].achieved_se = confirmed[c].se;
            results[c].capped_fraction = confirmed[c].capped_fraction;
        }
    }
    return results;
}

CalibrationResult calibrate_limit(std::span<const StreamSpec> specs, const ChartConfig& config, double target_arl,
                                  const CalibrationOptions& options) {
    config.validate();
    const ChartEngine engine(specs, {}, config.lambda, config.sample_size);
    const Statistic statistic = config.statistic;
    return calibrate_limits(engine, std::span(&statistic, 1), target_arl, options).front();
}

}  // namespace catmon
