#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <fstream>
#include <ostream>
#include <random>

#include "catmon/cli.hpp"
#include "catmon/errors.hpp"

namespace catmon {

namespace fs = std::filesystem;

FixtureSpec parse_fixture_spec(const nlohmann::json& j) {
    require_known_keys(j, {"schema_version", "features", "constant_features", "phase1_rows", "phase2_conforming",
                           "phase2_nonconforming", "missing_rate", "shifted_features", "shift_sd", "seed"},
                       "fixture");
    FixtureSpec s;
    try {
        s.features = j.value("features", s.features);
        s.constant_features = j.value("constant_features", s.constant_features);
        s.phase1_rows = j.value("phase1_rows", s.phase1_rows);
        s.phase2_conforming = j.value("phase2_conforming", s.phase2_conforming);
        s.phase2_nonconforming = j.value("phase2_nonconforming", s.phase2_nonconforming);
        s.missing_rate = j.value("missing_rate", s.missing_rate);
        s.shifted_features = j.value("shifted_features", s.shifted_features);
        s.shift_sd = j.value("shift_sd", s.shift_sd);
        s.seed = j.value("seed", s.seed);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("fixture: ") + e.what());
    }
    if (s.constant_features < 0 || s.constant_features >= s.features) throw InputError("fixture: bad feature counts");
    if (s.shifted_features < 0 || s.shifted_features > s.features - s.constant_features) {
        throw InputError("fixture: more shifted features than varying ones");
    }
    if (!(s.missing_rate >= 0.0 && s.missing_rate < 0.5)) throw InputError("fixture: missing_rate outside [0, 0.5)");
    return s;
}

namespace {

struct Feature {
    bool constant;
    double location;
    double scale;
    int shape;  // 0 normal, 1 lognormal, 2 exponential-like (skewed right)
};

double transform(const Feature& f, double z) {
    switch (f.shape) {
        case 1:
            return f.location + f.scale * std::exp(0.5 * z);
        case 2:
            return f.location + f.scale * std::exp(z);
        default:
            return f.location + f.scale * z;
    }
}

std::vector<Feature> make_features(const FixtureSpec& spec) {
    std::mt19937_64 gen(spec.seed);
    std::uniform_real_distribution<double> loc(-50.0, 50.0);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    std::vector<Feature> features(static_cast<std::size_t>(spec.features));
    // constant columns are spread through the feature list
    const int stride = spec.constant_features > 0 ? spec.features / spec.constant_features : 0;
    int constants = 0;
    for (int i = 0; i < spec.features; ++i) {
        Feature& f = features[i];
        f.constant = stride > 0 && constants < spec.constant_features && i % stride == stride - 1;
        if (f.constant) ++constants;
        f.location = loc(gen);
        f.scale = scale(gen);
        f.shape = static_cast<int>(gen() % 3);
    }
    return features;
}

ContinuousTable draw_rows(const FixtureSpec& spec, const std::vector<Feature>& features, int rows, bool shifted,
                          std::mt19937_64& gen) {
    ContinuousTable t;
    for (int i = 0; i < spec.features; ++i) t.names.push_back("f" + std::to_string(i + 1));
    std::normal_distribution<double> z;
    std::bernoulli_distribution missing(spec.missing_rate);
    for (int r = 0; r < rows; ++r) {
        std::vector<double> row(features.size());
        int varying = 0;
        for (std::size_t i = 0; i < features.size(); ++i) {
            const Feature& f = features[i];
            const double zi = z(gen);
            const bool miss = missing(gen);
            if (f.constant) {
                row[i] = f.location;
                continue;
            }
            const double delta = shifted && varying < spec.shifted_features ? spec.shift_sd : 0.0;
            ++varying;
            row[i] = miss ? std::numeric_limits<double>::quiet_NaN() : transform(f, zi + delta);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace

Fixture make_fixture(const FixtureSpec& spec, std::uint64_t run) {
    if (spec.phase2_conforming > spec.phase1_rows) throw InputError("fixture: more monitored than conforming rows");
    const auto features = make_features(spec);
    Fixture fx;
    std::mt19937_64 phase1(spec.seed ^ 0x5eed0001ULL);
    const auto base = draw_rows(spec, features, spec.phase1_rows, false, phase1);

    std::seed_seq seq{spec.seed, run, std::uint64_t{2}};
    std::mt19937_64 gen(seq);
    // move a random subset of conforming rows to the end, keeping the rest in order
    std::vector<std::size_t> order(base.rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> picked;
    std::sample(order.begin(), order.end(), std::back_inserter(picked),
                static_cast<std::size_t>(spec.phase2_conforming), gen);
    std::shuffle(picked.begin(), picked.end(), gen);
    std::vector<bool> is_picked(base.rows.size(), false);
    for (std::size_t r : picked) is_picked[r] = true;
    fx.conforming.names = base.names;
    for (std::size_t r = 0; r < base.rows.size(); ++r) {
        if (!is_picked[r]) fx.conforming.rows.push_back(base.rows[r]);
    }
    for (std::size_t r : picked) fx.conforming.rows.push_back(base.rows[r]);
    fx.nonconforming = draw_rows(spec, features, spec.phase2_nonconforming, true, gen);
    return fx;
}

ObservationTable phase2_sequence(const FixtureSpec& spec, const ObservationTable& conforming,
                                 const ObservationTable& nonconforming) {
    const auto tail = static_cast<std::size_t>(spec.phase2_conforming);
    if (conforming.rows.size() < tail) throw InputError("fixture: too few conforming rows");
    ObservationTable seq;
    seq.names = conforming.names;
    seq.rows.assign(conforming.rows.end() - static_cast<std::ptrdiff_t>(tail), conforming.rows.end());
    seq.rows.insert(seq.rows.end(), nonconforming.rows.begin(), nonconforming.rows.end());
    return seq;
}

void cmd_fixture(const fs::path& spec_path, std::uint64_t run, const fs::path& out_dir, std::ostream& log) {
    const auto spec = parse_fixture_spec(read_json_file(spec_path));
    const auto fx = make_fixture(spec, run);
    ContinuousTable all = fx.conforming;
    all.rows.insert(all.rows.end(), fx.nonconforming.rows.begin(), fx.nonconforming.rows.end());
    fs::create_directories(out_dir);
    write_continuous(out_dir / "data.csv", all);
    std::ofstream labels(out_dir / "labels.csv");
    if (!labels) throw InputError("cannot write " + (out_dir / "labels.csv").string());
    for (std::size_t r = 0; r < fx.conforming.rows.size(); ++r) labels << "pass\n";
    for (std::size_t r = 0; r < fx.nonconforming.rows.size(); ++r) labels << "fail\n";
    log << "fixture: " << fx.conforming.rows.size() << " conforming rows (the last " << spec.phase2_conforming
        << " are monitored), " << fx.nonconforming.rows.size() << " nonconforming rows, " << spec.features
        << " features\n";
}

}  // namespace catmon
