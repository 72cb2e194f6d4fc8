#include "catmon/config.hpp"

#include <cmath>
#include <fstream>

#include "catmon/errors.hpp"

namespace catmon {

using nlohmann::json;

void require_known_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view context) {
    if (!j.is_object()) throw InputError(std::string(context) + ": expected a JSON object");
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw InputError(std::string(context) + ": unknown key '" + item.key() + "'");
        }
    }
}

namespace {

template <class T>
T get_field(const json& j, const char* key, std::string_view context) {
    if (!j.contains(key)) throw InputError(std::string(context) + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(std::string(context) + ": bad value for '" + key + "': " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, std::string_view context) {
    return j.contains(key) ? get_field<T>(j, key, context) : fallback;
}

LatentFamily parse_family(const std::string& s) {
    if (s == "normal") return LatentFamily::normal;
    if (s == "logistic") return LatentFamily::logistic;
    throw InputError("unknown latent family '" + s + "' (expected normal or logistic)");
}

std::string family_name(LatentFamily f) { return f == LatentFamily::normal ? "normal" : "logistic"; }

}  // namespace

StreamModel StreamTemplate::model() const {
    if (!ordinal) return NominalSpec(probs);
    if (!cutpoints.empty()) return OrdinalSpec::from_cutpoints(cutpoints, family);
    return OrdinalSpec::from_probabilities(probs, family);
}

StreamTemplate parse_stream_template(const json& j) {
    constexpr std::string_view ctx = "stream";
    require_known_keys(j, {"name", "kind", "probs", "cutpoints", "family", "count", "case"}, ctx);
    StreamTemplate t;
    t.name = get_or<std::string>(j, "name", "", ctx);
    const auto kind = get_field<std::string>(j, "kind", ctx);
    if (kind == "ordinal") {
        t.ordinal = true;
    } else if (kind != "nominal") {
        throw InputError("stream: kind must be 'nominal' or 'ordinal', got '" + kind + "'");
    }
    t.probs = get_or<std::vector<double>>(j, "probs", {}, ctx);
    t.cutpoints = get_or<std::vector<double>>(j, "cutpoints", {}, ctx);
    if (j.contains("family")) {
        if (!t.ordinal) throw InputError("stream: 'family' applies to ordinal streams only");
        t.family = parse_family(get_field<std::string>(j, "family", ctx));
    }
    if (t.ordinal) {
        if (t.probs.empty() == t.cutpoints.empty()) {
            throw InputError("stream: ordinal streams need exactly one of 'probs' or 'cutpoints'");
        }
    } else {
        if (t.probs.empty()) throw InputError("stream: nominal streams need 'probs'");
        if (!t.cutpoints.empty()) throw InputError("stream: 'cutpoints' applies to ordinal streams only");
    }
    t.model();  // validates
    return t;
}

json to_json(const StreamTemplate& t) {
    json j;
    if (!t.name.empty()) j["name"] = t.name;
    j["kind"] = t.ordinal ? "ordinal" : "nominal";
    if (!t.cutpoints.empty()) {
        j["cutpoints"] = t.cutpoints;
    } else {
        j["probs"] = t.probs;
    }
    if (t.ordinal) j["family"] = family_name(t.family);
    return j;
}

ShiftSpec parse_shift(const json& j) {
    require_known_keys(j, {"xi", "delta"}, "shift");
    if (j.contains("xi") == j.contains("delta")) throw InputError("shift: give exactly one of 'xi' or 'delta'");
    if (j.contains("xi")) return NominalShift{get_field<std::vector<double>>(j, "xi", "shift")};
    return OrdinalShift{get_field<double>(j, "delta", "shift")};
}

MonitorConfig parse_monitor_config(const json& j) {
    constexpr std::string_view ctx = "config";
    require_known_keys(j, {"schema_version", "lambda", "sample_size", "statistic", "limit", "log_limit", "seed",
                           "calibration", "streams"},
                       ctx);
    const int version = get_field<int>(j, "schema_version", ctx);
    if (version != kConfigSchemaVersion) {
        throw InputError("config: unsupported schema_version " + std::to_string(version));
    }
    MonitorConfig cfg;
    cfg.chart.lambda = get_or<double>(j, "lambda", cfg.chart.lambda, ctx);
    cfg.chart.sample_size = get_or<int>(j, "sample_size", cfg.chart.sample_size, ctx);
    cfg.chart.statistic = parse_statistic(get_or<std::string>(j, "statistic", "zhang", ctx));
    if (j.contains("limit") && j.contains("log_limit")) {
        throw InputError("config: give at most one of 'limit' and 'log_limit'");
    }
    if (j.contains("limit")) cfg.chart.limit = get_field<double>(j, "limit", ctx);
    if (j.contains("log_limit")) cfg.chart.limit = std::exp(get_field<double>(j, "log_limit", ctx));
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed, ctx);
    cfg.chart.validate();

    if (j.contains("calibration")) {
        const json& c = j.at("calibration");
        constexpr std::string_view cctx = "config.calibration";
        require_known_keys(c, {"target_arl0", "reps", "tol_rel", "max_iterations", "cap", "seed"},
                           cctx);
        CalibrationSettings s;
        s.target_arl0 = get_or<double>(c, "target_arl0", s.target_arl0, cctx);
        s.options.reps = get_or<long>(c, "reps", s.options.reps, cctx);
        s.options.tol_rel = get_or<double>(c, "tol_rel", s.options.tol_rel, cctx);
        s.options.max_iterations = get_or<int>(c, "max_iterations", s.options.max_iterations, cctx);
        s.options.cap = get_or<long>(c, "cap", s.options.cap, cctx);
        s.options.seed = get_or<std::uint64_t>(c, "seed", cfg.seed, cctx);
        cfg.calibration = s;
    }

    if (!j.contains("streams") || !j.at("streams").is_array() || j.at("streams").empty()) {
        throw InputError("config: 'streams' must be a non-empty array");
    }
    for (const auto& entry : j.at("streams")) {
        const auto t = parse_stream_template(entry);
        const int count = get_or<int>(entry, "count", 1, "stream");
        if (count < 1) throw InputError("stream: count must be >= 1");
        const auto model = t.model();
        for (int r = 0; r < count; ++r) {
            const int id = static_cast<int>(cfg.streams.size());
            cfg.streams.emplace_back(id, model);
            std::string name = t.name.empty() ? "s" + std::to_string(id + 1) : t.name;
            if (count > 1) name += "#" + std::to_string(r + 1);
            cfg.names.push_back(std::move(name));
        }
    }
    return cfg;
}

MonitorConfig load_monitor_config(const std::filesystem::path& path) {
    return parse_monitor_config(read_json_file(path));
}

json monitor_config_to_json(const MonitorConfig& config) {
    json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["lambda"] = config.chart.lambda;
    j["sample_size"] = config.chart.sample_size;
    j["statistic"] = std::string(to_string(config.chart.statistic));
    if (config.chart.limit) j["limit"] = *config.chart.limit;
    j["seed"] = config.seed;
    if (config.calibration) {
        const auto& c = *config.calibration;
        j["calibration"] = {{"target_arl0", c.target_arl0},
                            {"reps", c.options.reps},
                            {"tol_rel", c.options.tol_rel},
                            {"max_iterations", c.options.max_iterations},
                            {"cap", c.options.cap},
                            {"seed", c.options.seed}};
    }
    json streams = json::array();
    for (std::size_t i = 0; i < config.streams.size(); ++i) {
        const StreamSpec& s = config.streams[i];
        StreamTemplate t;
        t.name = i < config.names.size() ? config.names[i] : "";
        t.ordinal = s.is_ordinal();
        if (t.ordinal) {
            t.cutpoints.assign(s.ordinal().cutpoints().begin(), s.ordinal().cutpoints().end());
            t.family = s.ordinal().family();
        } else {
            t.probs.assign(s.pi0().begin(), s.pi0().end());
        }
        streams.push_back(to_json(t));
    }
    j["streams"] = std::move(streams);
    return j;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace catmon
