#include "catmon/simulate.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "catmon/errors.hpp"

namespace catmon {

using nlohmann::json;

namespace {

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        if (s == "inf") return std::numeric_limits<double>::infinity();
        throw InputError("bad number '" + s + "'");
    }
    return v;
}

}  // namespace

Scenario parse_scenario(const json& j) {
    constexpr std::string_view ctx = "scenario";
    require_known_keys(j, {"schema_version", "name", "description", "population", "rows", "lambda", "sample_size",
                           "statistics", "target_arl0", "reps", "master_seed", "cap", "tol_rel", "include_ic_row",
                           "presets"},
                       ctx);
    if (j.value("schema_version", 0) != kConfigSchemaVersion) throw InputError("scenario: unsupported schema_version");
    Scenario s;
    try {
        s.name = j.value("name", "");
        s.description = j.value("description", "");
        s.lambda = j.value("lambda", s.lambda);
        s.sample_size = j.value("sample_size", s.sample_size);
        s.target_arl0 = j.value("target_arl0", s.target_arl0);
        s.reps = j.value("reps", s.reps);
        s.master_seed = j.value("master_seed", s.master_seed);
        s.cap = j.value("cap", s.cap);
        s.tol_rel = j.value("tol_rel", s.tol_rel);
        s.include_ic_row = j.value("include_ic_row", s.include_ic_row);
        if (j.contains("statistics")) {
            s.statistics.clear();
            for (const auto& name : j.at("statistics")) s.statistics.push_back(parse_statistic(name.get<std::string>()));
        }
        if (j.contains("presets")) {
            for (const auto& [name, p] : j.at("presets").items()) {
                require_known_keys(p, {"reps"}, "scenario.presets");
                s.presets[name] = p.at("reps").get<long>();
            }
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("scenario: ") + e.what());
    }
    if (s.statistics.empty()) throw InputError("scenario: no statistics");
    if (!j.contains("population") || !j.at("population").is_array()) {
        throw InputError("scenario: 'population' must be an array");
    }
    for (const auto& entry : j.at("population")) {
        PopulationCase c;
        c.stream = parse_stream_template(entry);
        if (!entry.contains("case") || !entry.contains("count")) {
            throw InputError("scenario: population entries need 'case' and 'count'");
        }
        c.label = entry.at("case").get<std::string>();
        c.count = entry.at("count").get<int>();
        if (c.count < 1) throw InputError("scenario: case '" + c.label + "' has count < 1");
        for (const auto& other : s.population) {
            if (other.label == c.label) throw InputError("scenario: duplicate case '" + c.label + "'");
        }
        s.population.push_back(std::move(c));
    }
    if (s.population.empty()) throw InputError("scenario: empty population");
    for (const auto& entry : j.value("rows", json::array())) {
        require_known_keys(entry, {"label", "shifts"}, "scenario.rows");
        ShiftRow row;
        row.label = entry.at("label").get<std::string>();
        for (const auto& sh : entry.value("shifts", json::array())) {
            require_known_keys(sh, {"case", "count", "xi", "delta"}, "scenario.rows.shifts");
            json shift_only = json::object();
            if (sh.contains("xi")) shift_only["xi"] = sh.at("xi");
            if (sh.contains("delta")) shift_only["delta"] = sh.at("delta");
            row.shifts.push_back({sh.at("case").get<std::string>(), sh.at("count").get<int>(), parse_shift(shift_only)});
        }
        s.rows.push_back(std::move(row));
    }
    // Validate every row up front so a long run cannot fail halfway.
    for (const auto& row : s.rows) build_population(s, row);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_json_file(path)); }

void apply_preset(Scenario& scenario, const std::string& preset) {
    const auto it = scenario.presets.find(preset);
    if (it != scenario.presets.end()) {
        scenario.reps = it->second;
        return;
    }
    if (preset == "desk") {
        scenario.reps = 2000;
    } else if (preset == "full") {
        scenario.reps = 10000;
    } else {
        throw InputError("unknown preset '" + preset + "'");
    }
}

Population build_population(const Scenario& scenario, const ShiftRow& row) {
    Population pop;
    for (const auto& c : scenario.population) {
        int shifted = 0;
        ShiftSpec shift = NoShift{};
        for (const auto& cs : row.shifts) {
            if (cs.label != c.label) continue;
            if (shifted != 0) throw InputError("row '" + row.label + "' shifts case '" + c.label + "' twice");
            if (cs.count < 0 || cs.count > c.count) {
                throw InputError("row '" + row.label + "' shifts " + std::to_string(cs.count) + " streams of case '" +
                                 c.label + "' which has " + std::to_string(c.count));
            }
            shifted = cs.count;
            shift = cs.shift;
        }
        const StreamModel model = c.stream.model();
        for (int i = 0; i < c.count; ++i) {
            pop.specs.emplace_back(static_cast<int>(pop.specs.size()), model);
            pop.shifts.push_back(i < shifted ? shift : ShiftSpec{NoShift{}});
        }
        if (shifted > 0) validate_shift(pop.specs.back(), shift);
    }
    for (const auto& cs : row.shifts) {
        const bool known = std::any_of(scenario.population.begin(), scenario.population.end(),
                                       [&](const PopulationCase& c) { return c.label == cs.label; });
        if (!known) throw InputError("row '" + row.label + "' names unknown case '" + cs.label + "'");
    }
    return pop;
}

Population build_population(const Scenario& scenario) { return build_population(scenario, ShiftRow{"IC", {}}); }

ResultTable run_rows(const Scenario& scenario, std::span<const double> limits, const RunOptions& options) {
    if (limits.size() != scenario.statistics.size()) throw DimensionMismatch("one limit per statistic required");
    ResultTable table;
    table.name = scenario.name;
    table.statistics = scenario.statistics;
    table.limits.assign(limits.begin(), limits.end());
    std::vector<ChartLimit> charts;
    for (std::size_t c = 0; c < limits.size(); ++c) charts.push_back({scenario.statistics[c], limits[c]});

    std::vector<ChartEngine> engines;
    engines.reserve(scenario.rows.size());
    for (const auto& row : scenario.rows) {
        const auto pop = build_population(scenario, row);
        engines.emplace_back(pop.specs, pop.shifts, scenario.lambda, scenario.sample_size);
    }
    table.rows.resize(scenario.rows.size());
    const long n = static_cast<long>(scenario.rows.size());
#pragma omp parallel for schedule(dynamic, 1) if (options.parallel_cells)
    for (long r = 0; r < n; ++r) {
        table.rows[r].label = scenario.rows[r].label;
        table.rows[r].cells = estimate_arl_multi(engines[r], charts, scenario.reps, scenario.master_seed, scenario.cap,
                                                 row_scenario(static_cast<std::size_t>(r)));
        if (options.progress && !options.parallel_cells) options.progress("row " + scenario.rows[r].label + " done");
    }
    return table;
}

ResultTable run_table(const Scenario& scenario, const RunOptions& options) {
    const auto ic = build_population(scenario);
    const ChartEngine engine(ic.specs, {}, scenario.lambda, scenario.sample_size);
    CalibrationOptions copt;
    copt.reps = scenario.reps;
    copt.tol_rel = scenario.tol_rel;
    copt.cap = scenario.cap;
    copt.seed = scenario.master_seed;
    copt.confirm = true;
    copt.progress = options.progress;
    auto calibration = calibrate_limits(engine, scenario.statistics, scenario.target_arl0, copt);
    if (options.progress) options.progress("calibration done");
    std::vector<double> limits;
    for (const auto& c : calibration) limits.push_back(c.limit);

    ResultTable table = run_rows(scenario, limits, options);
    if (scenario.include_ic_row) {
        ResultRow row{"IC", {}};
        for (const auto& c : calibration) {
            row.cells.push_back({c.achieved_arl, c.achieved_se, c.reps, c.capped_fraction, scenario.cap});
        }
        table.rows.insert(table.rows.begin(), std::move(row));
    }
    table.calibration = std::move(calibration);
    return table;
}

std::string export_csv(const ResultTable& table) {
    std::ostringstream out;
    out << "row,statistic,limit,arl,se,reps,capped_fraction,cap\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < table.statistics.size(); ++c) {
            const auto& cell = row.cells[c];
            out << row.label << ',' << to_string(table.statistics[c]) << ',' << format_g17(table.limits[c]) << ','
                << format_g17(cell.arl) << ',' << format_g17(cell.se) << ',' << cell.reps << ','
                << format_g17(cell.capped_fraction) << ',' << cell.cap << '\n';
        }
    }
    return out.str();
}

ResultTable parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "row,statistic,limit,arl,se,reps,capped_fraction,cap") {
        throw InputError("results file: unexpected header");
    }
    ResultTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) f.push_back(field);
        if (f.size() != 8) throw InputError("results file: expected 8 fields in '" + line + "'");
        const Statistic stat = parse_statistic(f[1]);
        auto it = std::find(table.statistics.begin(), table.statistics.end(), stat);
        std::size_t c = static_cast<std::size_t>(it - table.statistics.begin());
        if (it == table.statistics.end()) {
            table.statistics.push_back(stat);
            table.limits.push_back(parse_double(f[2]));
        }
        if (table.rows.empty() || table.rows.back().label != f[0]) table.rows.push_back({f[0], {}});
        auto& cells = table.rows.back().cells;
        if (cells.size() != c) throw InputError("results file: statistics out of order in row '" + f[0] + "'");
        cells.push_back({parse_double(f[3]), parse_double(f[4]), std::stol(f[5]), parse_double(f[6]), std::stol(f[7])});
    }
    return table;
}

namespace {

std::string format_arl(double v) {
    char buf[32];
    if (v >= 100.0) {
        std::snprintf(buf, sizeof buf, "%.0f", v);
    } else if (v >= 10.0) {
        std::snprintf(buf, sizeof buf, "%.1f", v);
    } else {
        std::snprintf(buf, sizeof buf, "%.2f", v);
    }
    return buf;
}

std::string symbol(Statistic s) {
    switch (s) {
        case Statistic::zhang:
            return "T";
        case Statistic::max:
            return "Q";
        case Statistic::sum:
            return "S";
    }
    return "?";
}

}  // namespace

std::string export_text(const ResultTable& table) {
    std::size_t label_width = 3;
    for (const auto& row : table.rows) label_width = std::max(label_width, row.label.size());
    constexpr int cell_width = 16;
    std::ostringstream out;
    if (!table.name.empty()) out << table.name << "\n";
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(label_width), "row");
    out << buf;
    for (auto s : table.statistics) {
        std::snprintf(buf, sizeof buf, " | %*s", cell_width, symbol(s).c_str());
        out << buf;
    }
    out << "\n" << std::string(label_width + table.statistics.size() * (cell_width + 3), '-') << "\n";
    for (const auto& row : table.rows) {
        std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(label_width), row.label.c_str());
        out << buf;
        for (const auto& cell : row.cells) {
            char se[32];
            std::snprintf(se, sizeof se, "%.2f", cell.se);
            const std::string text = format_arl(cell.arl) + " (" + se + ")";
            std::snprintf(buf, sizeof buf, " | %*s", cell_width, text.c_str());
            out << buf;
        }
        out << "\n";
    }
    out << "limits:";
    for (std::size_t c = 0; c < table.statistics.size(); ++c) {
        std::snprintf(buf, sizeof buf, " %s=%.6g", symbol(table.statistics[c]).c_str(), table.limits[c]);
        out << buf;
    }
    out << "\nStandard errors in parentheses.\n";
    return out.str();
}

json calibration_to_json(const std::vector<CalibrationResult>& results) {
    json arr = json::array();
    for (const auto& r : results) {
        arr.push_back({{"statistic", std::string(to_string(r.statistic))},
                       {"target_arl", r.target_arl},
                       {"limit", r.limit},
                       {"log_limit", r.limit > 0.0 ? std::log(r.limit) : std::numeric_limits<double>::lowest()},
                       {"achieved_arl", r.achieved_arl},
                       {"achieved_se", r.achieved_se},
                       {"capped_fraction", r.capped_fraction},
                       {"search_arl", r.search_arl},
                       {"iterations", r.iterations},
                       {"bracket", {r.bracket_low, r.bracket_high}},
                       {"reps", r.reps}});
    }
    return arr;
}

}  // namespace catmon
