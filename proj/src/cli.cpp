#include "catmon/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "catmon/errors.hpp"

namespace catmon {

namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool parse_int(const std::string& s, int& v) {
    const std::string t = trim(s);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    return res.ec == std::errc() && res.ptr == t.data() + t.size() && !t.empty();
}

bool is_missing(const std::string& t) { return t.empty() || t == "NA" || t == "NaN" || t == "nan" || t == "?"; }

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ObservationTable read_observations(const fs::path& path) {
    auto in = open_in(path);
    ObservationTable table;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        std::vector<int> row(fields.size());
        bool numeric = true;
        for (std::size_t i = 0; i < fields.size() && numeric; ++i) numeric = parse_int(fields[i], row[i]);
        if (!numeric) {
            if (table.rows.empty() && table.names.empty()) {
                for (const auto& f : fields) table.names.push_back(trim(f));
                width = fields.size();
                continue;
            }
            throw InputError(path.string() + ":" + std::to_string(line_no) + ": non-integer level");
        }
        if (width == 0) width = row.size();
        if (row.size() != width) {
            throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                             " columns, found " + std::to_string(row.size()));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_observations(const fs::path& path, const ObservationTable& table) {
    auto out = open_out(path);
    if (!table.names.empty()) {
        for (std::size_t i = 0; i < table.names.size(); ++i) out << (i ? "," : "") << table.names[i];
        out << '\n';
    }
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
}

ContinuousTable read_continuous(const fs::path& path) {
    auto in = open_in(path);
    ContinuousTable table;
    std::string line;
    if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
    for (const auto& f : split_csv(line)) table.names.push_back(trim(f));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != table.names.size()) {
            throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(table.names.size()) + " columns");
        }
        std::vector<double> row(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const std::string t = trim(fields[i]);
            if (is_missing(t)) {
                row[i] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            const auto res = std::from_chars(t.data(), t.data() + t.size(), row[i]);
            if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
                throw InputError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + t + "'");
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_continuous(const fs::path& path, const ContinuousTable& table) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < table.names.size(); ++i) out << (i ? "," : "") << table.names[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            if (!std::isnan(row[i])) out << g17(row[i]);
        }
        out << '\n';
    }
}

std::vector<std::string> read_labels(const fs::path& path) {
    auto in = open_in(path);
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line.substr(0, line.find('\r')));
        if (!t.empty()) labels.push_back(t);
    }
    return labels;
}

// ---------------------------------------------------------------------------

namespace {

/// Column means over the rows selected by `rows`, ignoring missing cells.
std::vector<double> column_means(const ContinuousTable& data, const std::vector<std::size_t>& rows,
                                 std::vector<long>* observed = nullptr) {
    const std::size_t p = data.names.size();
    std::vector<double> sum(p, 0.0);
    std::vector<long> n(p, 0);
    for (std::size_t r : rows) {
        for (std::size_t i = 0; i < p; ++i) {
            const double x = data.rows[r][i];
            if (std::isnan(x)) continue;
            sum[i] += x;
            ++n[i];
        }
    }
    std::vector<double> mean(p, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < p; ++i) {
        if (n[i] > 0) mean[i] = sum[i] / static_cast<double>(n[i]);
    }
    if (observed) *observed = std::move(n);
    return mean;
}

ObservationTable dichotomize(const ContinuousTable& data, const std::vector<std::size_t>& rows,
                             const std::vector<double>& impute, const DiscretizeResult& fit) {
    ObservationTable out;
    out.names = fit.kept;
    for (std::size_t r : rows) {
        std::vector<int> levels(fit.kept_columns.size());
        for (std::size_t k = 0; k < fit.kept_columns.size(); ++k) {
            const std::size_t col = fit.kept_columns[k];
            double x = data.rows[r][col];
            if (std::isnan(x)) x = impute[col];
            levels[k] = x <= fit.thresholds[k] ? 1 : 2;
        }
        out.rows.push_back(std::move(levels));
    }
    return out;
}

}  // namespace

DiscretizeResult discretize(const ContinuousTable& data, const std::vector<std::string>& labels,
                            const DiscretizeOptions& options) {
    if (labels.size() != data.rows.size()) {
        throw DimensionMismatch("labels file has " + std::to_string(labels.size()) + " rows, data has " +
                                std::to_string(data.rows.size()));
    }
    std::vector<std::string> group_names;
    std::vector<std::vector<std::size_t>> group_rows;
    for (std::size_t r = 0; r < labels.size(); ++r) {
        auto it = std::find(group_names.begin(), group_names.end(), labels[r]);
        if (it == group_names.end()) {
            group_names.push_back(labels[r]);
            group_rows.emplace_back();
            it = group_names.end() - 1;
        }
        group_rows[static_cast<std::size_t>(it - group_names.begin())].push_back(r);
    }
    const auto conf = std::find(group_names.begin(), group_names.end(), options.conforming);
    if (conf == group_names.end()) throw InputError("conforming group '" + options.conforming + "' is empty");
    const std::size_t conf_index = static_cast<std::size_t>(conf - group_names.begin());

    const std::size_t p = data.names.size();
    std::vector<std::vector<double>> group_means;
    for (std::size_t g = 0; g < group_names.size(); ++g) {
        std::vector<long> observed;
        group_means.push_back(column_means(data, group_rows[g], &observed));
        for (std::size_t i = 0; i < p; ++i) {
            if (observed[i] == 0) {
                throw InputError("feature '" + data.names[i] + "' has no observed values in group '" + group_names[g] +
                                 "'");
            }
        }
    }

    DiscretizeResult fit;
    const auto& conf_rows = group_rows[conf_index];
    const auto& conf_mean = group_means[conf_index];
    for (std::size_t i = 0; i < p; ++i) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t r : conf_rows) {
            double x = data.rows[r][i];
            if (std::isnan(x)) x = conf_mean[i];
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        if (lo == hi) {
            fit.dropped.push_back(data.names[i]);
            continue;
        }
        fit.kept.push_back(data.names[i]);
        fit.kept_columns.push_back(i);
        // the mean of the imputed column equals the mean of the observed values
        fit.thresholds.push_back(conf_mean[i]);
    }
    if (fit.kept.empty()) throw InputError("every feature is constant in the conforming group");

    for (std::size_t g = 0; g < group_names.size(); ++g) {
        fit.groups.emplace_back(group_names[g], dichotomize(data, group_rows[g], group_means[g], fit));
    }
    const ObservationTable& conf_obs = fit.groups[conf_index].second;
    fit.config.chart.lambda = options.lambda;
    fit.config.chart.sample_size = options.sample_size;
    fit.config.chart.statistic = Statistic::zhang;
    CalibrationSettings cal;
    cal.target_arl0 = options.target_arl0;
    fit.config.calibration = cal;
    for (std::size_t k = 0; k < fit.kept.size(); ++k) {
        long ones = 0;
        for (const auto& row : conf_obs.rows) ones += row[k] == 1;
        const double p1 = static_cast<double>(ones) / static_cast<double>(conf_obs.rows.size());
        fit.ic_probs.push_back({p1, 1.0 - p1});
        fit.config.streams.emplace_back(static_cast<int>(k), NominalSpec({p1, 1.0 - p1}));
        fit.config.names.push_back(fit.kept[k]);
    }
    return fit;
}

ObservationTable apply_thresholds(const ContinuousTable& data, const DiscretizeResult& fitted) {
    std::vector<std::size_t> rows(data.rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    std::vector<long> observed;
    const auto means = column_means(data, rows, &observed);
    for (std::size_t col : fitted.kept_columns) {
        if (observed[col] == 0) throw InputError("feature '" + data.names[col] + "' has no observed values");
    }
    return dichotomize(data, rows, means, fitted);
}

void cmd_discretize(const fs::path& data_path, const fs::path& labels_path, const DiscretizeOptions& options,
                    const fs::path& out_dir, std::ostream& log) {
    const auto data = read_continuous(data_path);
    const auto labels = read_labels(labels_path);
    const auto fit = discretize(data, labels, options);
    fs::create_directories(out_dir);
    {
        auto out = open_out(out_dir / "thresholds.csv");
        out << "feature,threshold,status\n";
        std::size_t k = 0;
        for (std::size_t i = 0; i < data.names.size(); ++i) {
            if (k < fit.kept_columns.size() && fit.kept_columns[k] == i) {
                out << data.names[i] << ',' << g17(fit.thresholds[k]) << ",kept\n";
                ++k;
            } else {
                out << data.names[i] << ",,dropped_constant\n";
            }
        }
    }
    {
        auto out = open_out(out_dir / "ic_probabilities.csv");
        out << "feature,p_level1,p_level2\n";
        for (std::size_t k = 0; k < fit.kept.size(); ++k) {
            out << fit.kept[k] << ',' << g17(fit.ic_probs[k][0]) << ',' << g17(fit.ic_probs[k][1]) << '\n';
        }
    }
    write_json_file(out_dir / "config.json", monitor_config_to_json(fit.config));
    for (const auto& [label, table] : fit.groups) write_observations(out_dir / ("observations_" + label + ".csv"), table);
    log << "discretize: kept " << fit.kept.size() << " features, dropped " << fit.dropped.size()
        << " constant features\n";
}

// ---------------------------------------------------------------------------

double log_or_sentinel(double x) { return x > 0.0 ? std::log(x) : std::numeric_limits<double>::lowest(); }

std::vector<MonitorRecord> run_monitor(const MonitorConfig& config, const ObservationTable& observations,
                                       bool keep_scores) {
    if (!config.chart.limit) throw InputError("monitor: config has no control limit");
    const std::size_t p = config.streams.size();
    const int n = config.chart.sample_size;
    if (static_cast<long>(observations.rows.size()) < n) {
        throw InputError("monitor: " + std::to_string(observations.rows.size()) + " rows is fewer than N = " +
                         std::to_string(n));
    }
    if (!observations.rows.empty() && observations.rows.front().size() != p) {
        throw DimensionMismatch("monitor: observations have " + std::to_string(observations.rows.front().size()) +
                                " columns, config has " + std::to_string(p) + " streams");
    }
    std::vector<EwmaState> states;
    for (const auto& s : config.streams) states.push_back(init_state(s, n));
    std::vector<SampleCounts> counts(p);
    std::vector<MonitorRecord> records;
    const std::size_t samples = observations.rows.size() / static_cast<std::size_t>(n);
    for (std::size_t k = 0; k < samples; ++k) {
        for (std::size_t i = 0; i < p; ++i) counts[i].assign(static_cast<std::size_t>(config.streams[i].levels()), 0);
        for (int t = 0; t < n; ++t) {
            const auto& row = observations.rows[k * n + t];
            for (std::size_t i = 0; i < p; ++i) {
                const int level = row[i];
                if (level < 1 || level > config.streams[i].levels()) {
                    throw InputError("monitor: row " + std::to_string(k * n + t + 1) + ", stream " +
                                     std::to_string(i + 1) + ": level " + std::to_string(level) + " outside 1.." +
                                     std::to_string(config.streams[i].levels()));
                }
                ++counts[i][level - 1];
            }
        }
        const auto point = chart_step(states, config.streams, counts, config.chart, keep_scores);
        records.push_back({static_cast<long>(k + 1), point.value, *config.chart.limit, point.alarm, point.local_scores});
    }
    return records;
}

std::string monitor_header(const MonitorConfig& config, bool with_scores) {
    std::string h = "k,statistic,value,log_value,limit,log_limit,alarm";
    if (with_scores) {
        for (const auto& name : config.names) h += ",u_" + name;
    }
    return h;
}

std::string format_monitor_record(const MonitorRecord& r, Statistic statistic) {
    std::string line = std::to_string(r.k) + "," + std::string(to_string(statistic)) + "," + g17(r.value) + "," +
                       g17(log_or_sentinel(r.value)) + "," + g17(r.limit) + "," + g17(log_or_sentinel(r.limit)) + "," +
                       (r.alarm ? "1" : "0");
    for (double u : r.scores) line += "," + g17(u);
    return line;
}

void cmd_monitor(const fs::path& config_path, const std::vector<fs::path>& data, long start_row, const fs::path& out_path,
                 bool emit_local_scores, std::ostream& log) {
    auto config = load_monitor_config(config_path);
    if (!config.chart.limit) {
        if (!config.calibration) throw InputError("monitor: config needs 'limit', 'log_limit' or 'calibration'");
        const auto results = run_calibrate(config, {});
        config.chart.limit = results.front().limit;
        log << "monitor: calibrated limit " << g17(*config.chart.limit) << " (ARL0 " << results.front().achieved_arl
            << ")\n";
    }
    if (data.empty()) throw InputError("monitor: no observation file");
    if (start_row < 1) throw InputError("monitor: start row must be >= 1");
    ObservationTable obs;
    for (const auto& path : data) {
        auto part = read_observations(path);
        if (obs.names.empty()) obs.names = part.names;
        obs.rows.insert(obs.rows.end(), std::make_move_iterator(part.rows.begin()),
                        std::make_move_iterator(part.rows.end()));
    }
    if (static_cast<std::size_t>(start_row - 1) > obs.rows.size()) {
        throw InputError("monitor: start row beyond the end of the data");
    }
    obs.rows.erase(obs.rows.begin(), obs.rows.begin() + (start_row - 1));
    if (!obs.names.empty() && obs.names.size() != config.streams.size()) {
        throw DimensionMismatch("monitor: observation header has " + std::to_string(obs.names.size()) +
                                " columns, config has " + std::to_string(config.streams.size()) + " streams");
    }
    const auto n = static_cast<std::size_t>(config.chart.sample_size);
    if (obs.rows.size() % n != 0) {
        log << "warning: dropping trailing partial sample of " << obs.rows.size() % n << " rows\n";
    }
    const auto records = run_monitor(config, obs, emit_local_scores);
    auto out = open_out(out_path);
    out << monitor_header(config, emit_local_scores) << '\n';
    long first_alarm = 0;
    for (const auto& r : records) {
        out << format_monitor_record(r, config.chart.statistic) << '\n';
        if (r.alarm && first_alarm == 0) first_alarm = r.k;
    }
    log << "monitor: " << records.size() << " samples";
    if (first_alarm) {
        log << ", first alarm at sample " << first_alarm << "\n";
    } else {
        log << ", no alarm\n";
    }
}

// ---------------------------------------------------------------------------

std::vector<CalibrationResult> run_calibrate(const MonitorConfig& config, const CalibrateRequest& request) {
    CalibrationSettings settings = config.calibration.value_or(CalibrationSettings{});
    if (!config.calibration) settings.options.seed = config.seed;
    if (request.arl0) settings.target_arl0 = *request.arl0;
    if (request.reps) settings.options.reps = *request.reps;
    if (request.seed) settings.options.seed = *request.seed;
    std::vector<Statistic> stats = request.statistics;
    if (stats.empty()) stats.push_back(config.chart.statistic);
    const ChartEngine engine(config.streams, {}, config.chart.lambda, config.chart.sample_size);
    return calibrate_limits(engine, stats, settings.target_arl0, settings.options);
}

std::string calibration_csv(const std::vector<CalibrationResult>& results) {
    std::string s =
        "statistic,target_arl,limit,log_limit,achieved_arl,achieved_se,capped_fraction,search_arl,iterations,"
        "bracket_low,bracket_high,reps\n";
    for (const auto& r : results) {
        s += std::string(to_string(r.statistic)) + "," + g17(r.target_arl) + "," + g17(r.limit) + "," +
             g17(log_or_sentinel(r.limit)) + "," + g17(r.achieved_arl) + "," + g17(r.achieved_se) + "," +
             g17(r.capped_fraction) + "," + g17(r.search_arl) + "," + std::to_string(r.iterations) + "," +
             g17(r.bracket_low) + "," + g17(r.bracket_high) + "," + std::to_string(r.reps) + "\n";
    }
    return s;
}

void cmd_calibrate(const fs::path& config_path, const CalibrateRequest& request, const fs::path& out,
                   const std::optional<fs::path>& config_out, std::ostream& log) {
    auto config = load_monitor_config(config_path);
    const auto results = run_calibrate(config, request);
    open_out(out) << calibration_csv(results);
    for (const auto& r : results) {
        log << "calibrate: " << to_string(r.statistic) << " limit " << g17(r.limit) << " (ln " << log_or_sentinel(r.limit)
            << "), ARL0 " << r.achieved_arl << " +- " << r.achieved_se << "\n";
    }
    if (config_out) {
        config.chart.statistic = results.front().statistic;
        config.chart.limit = results.front().limit;
        write_json_file(*config_out, monitor_config_to_json(config));
    }
}

// ---------------------------------------------------------------------------

void cmd_simulate(const fs::path& scenario_path, const std::string& preset, const fs::path& out_dir,
                  bool parallel_cells, std::ostream& log) {
    auto scenario = load_scenario(scenario_path);
    apply_preset(scenario, preset);
    if (scenario.name.empty()) scenario.name = scenario_path.stem().string();
    RunOptions options;
    options.parallel_cells = parallel_cells;
    options.progress = [&](const std::string& msg) { log << scenario.name << ": " << msg << std::endl; };
    const auto table = run_table(scenario, options);
    fs::create_directories(out_dir);
    open_out(out_dir / (scenario.name + ".csv")) << export_csv(table);
    open_out(out_dir / (scenario.name + ".txt")) << export_text(table);
    open_out(out_dir / (scenario.name + "_calibration.csv")) << calibration_csv(table.calibration);
    log << export_text(table);
}

// ---------------------------------------------------------------------------

void print_scores(const MonitorConfig& config, std::ostream& out) {
    auto join = [](std::span<const double> v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + g17(v[i]);
        return s + "]";
    };
    std::size_t shown = 0;
    for (std::size_t i = 0; i < config.streams.size(); ++i) {
        const auto& s = config.streams[i];
        if (!s.is_ordinal()) continue;
        const auto& o = s.ordinal();
        double centered = 0.0;
        for (int j = 0; j < o.levels(); ++j) centered += o.pi0()[j] * o.scores()[j];
        out << "stream " << config.names[i] << " (" << (o.family() == LatentFamily::normal ? "normal" : "logistic")
            << ")\n"
            << "  pi0        " << join(o.pi0()) << "\n"
            << "  cutpoints  " << join(o.cutpoints()) << "\n"
            << "  alpha      " << join(o.scores()) << "\n"
            << "  alpha'Lambda alpha " << g17(o.score_variance()) << "\n"
            << "  sum pi alpha       " << g17(centered) << "\n";
        ++shown;
    }
    if (shown == 0) out << "no ordinal streams\n";
}

void cmd_scores(const fs::path& config, std::ostream& out) { print_scores(load_monitor_config(config), out); }

}  // namespace catmon
