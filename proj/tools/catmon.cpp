// catmon: Phase-I discretization, Phase-II monitoring, limit calibration and
// OC ARL simulation for multivariate categorical data streams.

#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "catmon/cli.hpp"

int main(int argc, char** argv) {
    namespace fs = std::filesystem;
    CLI::App app{"Monitoring of multivariate categorical data streams"};
    app.require_subcommand(1);

    auto* calibrate = app.add_subcommand("calibrate", "search the control limit for a target in-control ARL");
    std::string cal_config, cal_out, cal_config_out;
    double cal_arl0 = 0.0;
    long cal_reps = 0;
    std::uint64_t cal_seed = 0;
    std::vector<std::string> cal_stats;
    calibrate->add_option("--config", cal_config, "monitor config (limit ignored)")->required()->check(CLI::ExistingFile);
    calibrate->add_option("--arl0", cal_arl0, "target in-control ARL");
    calibrate->add_option("--reps", cal_reps, "Monte Carlo replications");
    calibrate->add_option("--seed", cal_seed, "master seed");
    calibrate->add_option("--statistic", cal_stats, "zhang, max or sum (repeatable; default from config)");
    calibrate->add_option("--out", cal_out, "result file")->required();
    calibrate->add_option("--config-out", cal_config_out, "write the config with the calibrated limit");

    auto* simulate = app.add_subcommand("simulate", "reproduce an OC ARL table from a scenario file");
    std::string sim_scenario, sim_preset = "desk", sim_out;
    bool sim_parallel_cells = false;
    simulate->add_option("--scenario", sim_scenario, "scenario file")->required()->check(CLI::ExistingFile);
    simulate->add_option("--preset", sim_preset, "replication preset")->check(CLI::IsMember({"desk", "full"}));
    simulate->add_option("--out-dir", sim_out, "output directory")->required();
    simulate->add_flag("--parallel-cells", sim_parallel_cells, "run table rows concurrently");

    auto* monitor = app.add_subcommand("monitor", "run the chart over categorical observations");
    std::string mon_config, mon_out;
    std::vector<std::string> mon_data;
    long mon_start = 1;
    bool mon_scores = false;
    monitor->add_option("--config", mon_config, "monitor config")->required()->check(CLI::ExistingFile);
    monitor->add_option("--data", mon_data, "observation file (levels 1..h); repeat to concatenate")
        ->required()
        ->check(CLI::ExistingFile);
    monitor->add_option("--start-row", mon_start, "first data row to monitor (1-based)")->capture_default_str();
    monitor->add_option("--out", mon_out, "chart data file")->required();
    monitor->add_flag("--emit-local-scores", mon_scores, "append the per-stream scores U to each record");

    auto* discretize = app.add_subcommand("discretize", "dichotomize continuous Phase-I data at conforming means");
    std::string dis_data, dis_labels, dis_out;
    catmon::DiscretizeOptions dis_opts;
    discretize->add_option("--data", dis_data, "continuous data with header")->required()->check(CLI::ExistingFile);
    discretize->add_option("--labels", dis_labels, "group label per row")->required()->check(CLI::ExistingFile);
    discretize->add_option("--conforming", dis_opts.conforming, "label of the in-control group")->required();
    discretize->add_option("--out-dir", dis_out, "output directory")->required();
    discretize->add_option("--sample-size", dis_opts.sample_size, "N written to config.json")->capture_default_str();
    discretize->add_option("--lambda", dis_opts.lambda, "smoothing written to config.json")->capture_default_str();
    discretize->add_option("--arl0", dis_opts.target_arl0, "target ARL written to config.json")->capture_default_str();

    auto* scores = app.add_subcommand("scores", "print ordinal scores for the streams of a config");
    std::string sc_config;
    scores->add_option("--config", sc_config, "monitor config")->required()->check(CLI::ExistingFile);

    auto* fixture = app.add_subcommand("fixture", "generate the synthetic case-study data");
    std::string fx_spec, fx_out;
    std::uint64_t fx_run = 1;
    fixture->add_option("--spec", fx_spec, "fixture definition")->required()->check(CLI::ExistingFile);
    fixture->add_option("--run", fx_run, "Phase-II replicate index")->capture_default_str();
    fixture->add_option("--out-dir", fx_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*calibrate) {
            catmon::CalibrateRequest req;
            if (calibrate->count("--arl0")) req.arl0 = cal_arl0;
            if (calibrate->count("--reps")) req.reps = cal_reps;
            if (calibrate->count("--seed")) req.seed = cal_seed;
            for (const auto& s : cal_stats) req.statistics.push_back(catmon::parse_statistic(s));
            std::optional<fs::path> config_out;
            if (!cal_config_out.empty()) config_out = cal_config_out;
            catmon::cmd_calibrate(cal_config, req, cal_out, config_out, std::cerr);
        } else if (*simulate) {
            catmon::cmd_simulate(sim_scenario, sim_preset, sim_out, sim_parallel_cells, std::cerr);
        } else if (*monitor) {
            std::vector<fs::path> files(mon_data.begin(), mon_data.end());
            catmon::cmd_monitor(mon_config, files, mon_start, mon_out, mon_scores, std::cerr);
        } else if (*discretize) {
            catmon::cmd_discretize(dis_data, dis_labels, dis_opts, dis_out, std::cerr);
        } else if (*scores) {
            catmon::cmd_scores(sc_config, std::cout);
        } else if (*fixture) {
            catmon::cmd_fixture(fx_spec, fx_run, fx_out, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
