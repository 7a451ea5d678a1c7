#include "anchorloc/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "anchorloc/io.hpp"
#include "anchorloc/simulate.hpp"
#include "anchorloc/sweep.hpp"

namespace anchorloc::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitEmptyResult = 3;

/// Precedence: --config flag > ANCHORLOC_CONFIG env var > built-in defaults.
io::RunConfig resolve_config(const std::string& config_flag) {
    if (!config_flag.empty()) return io::load_run_config(config_flag);
    if (const char* env = std::getenv("ANCHORLOC_CONFIG"); env && *env && fs::exists(env))
        return io::load_run_config(env);
    return io::RunConfig{};
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_path,
                 bool seed_given, std::uint64_t seed) {
    Scenario scn = io::load_scenario(scenario_path);
    if (seed_given) scn.seed = seed;
    MeasurementLog log = simulate_scenario(scn);
    io::save_log(log, out_path);

    std::size_t sample_count = 0;
    for (const auto& f : log.frames_h) sample_count += f.rx[0].size() + f.rx[1].size();
    for (const auto& f : log.frames_v) sample_count += f.rx[0].size() + f.rx[1].size();
    std::cout << "wrote " << out_path << ": " << log.frames_h.size() << " H frames, "
              << log.frames_v.size() << " V frames, " << log.imu.size() << " IMU samples, "
              << log.truth.samples.size() << " truth samples, " << sample_count
              << " complex samples\n";
    return kExitOk;
}

int cmd_localize(const std::string& log_path, const std::string& out_path,
                 const io::RunConfig& cfg) {
    MeasurementLog log = io::load_log(log_path);
    PipelineResult result = run_pipeline(log, cfg.pipeline);
    std::cout << "drop stats: " << io::drop_stats_summary(result.stats) << "\n";
    if (result.clock_offset)
        std::cout << "clock offset: " << result.clock_offset->offset
                  << " s (confidence " << result.clock_offset->confidence << ")\n";
    if (result.poses.empty()) {
        std::cerr << "no fixes survived the pipeline (over-aggressive filtering or empty log)\n";
        return kExitEmptyResult;
    }
    io::save_poses(io::pose_records(result), &result.stats, out_path);
    std::cout << "wrote " << out_path << ": " << result.poses.size() << " poses\n";
    return kExitOk;
}

int cmd_evaluate(const std::string& poses_path, const std::string& log_path,
                 const std::string& out_path, double bin_width) {
    DropStats stats;
    std::vector<io::PoseRecord> records = io::load_poses(poses_path, &stats);
    MeasurementLog log = io::load_log(log_path);
    ErrorReport report = evaluate(io::to_poses(records), log.truth, bin_width, &stats);
    if (report.evaluated == 0) {
        std::cerr << "no pose timestamps overlap the ground-truth span\n";
        return kExitInputError;
    }
    io::save_report(report, out_path);
    auto row = [](const char* name, const Percentiles& p, const char* unit) {
        std::cout << "  " << name << ": p10=" << p.p10 << unit << " p50=" << p.p50 << unit
                  << " p90=" << p.p90 << unit << "\n";
    };
    std::cout << "evaluated " << report.evaluated << " poses ("
              << report.excluded_outside_truth << " outside truth span)\n";
    row("x   ", report.x_m, " m");
    row("y   ", report.y_m, " m");
    row("z   ", report.z_m, " m");
    row("roll", report.roll_deg, " deg");
    row("pitc", report.pitch_deg, " deg");
    row("yaw ", report.yaw_deg, " deg");
    row("3d  ", report.l2_m, " m");
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

int cmd_sweep(const std::string& scenario_path, const std::string& spec_path,
              const std::string& out_dir, const io::RunConfig& cfg, bool seed_given,
              std::uint64_t seed) {
    Scenario scn = io::load_scenario(scenario_path);
    if (seed_given) scn.seed = seed;

    io::json spec;
    try {
        spec = io::json::parse(io::read_file(spec_path));
    } catch (const io::json::parse_error& e) {
        throw ValidationError({std::string("sweep spec: ") + e.what()});
    }
    if (!spec.is_object() || !spec.contains("axis") || !spec.at("axis").is_string())
        throw ValidationError({"sweep spec: missing string field \"axis\""});
    SweepAxis axis = sweep_axis_from_string(spec.at("axis").get<std::string>());
    std::vector<double> values;
    if (spec.contains("values") && spec.at("values").is_array())
        for (const auto& v : spec.at("values")) {
            if (v.is_string() && v.get<std::string>() == "inf")
                values.push_back(std::numeric_limits<double>::infinity());
            else if (v.is_number())
                values.push_back(v.get<double>());
            else
                throw ValidationError({"sweep spec: values must be numbers or \"inf\""});
        }
    if (values.empty()) throw ValidationError({"sweep spec: empty \"values\" list"});
    int trials = 1;
    if (spec.contains("trials")) {
        if (!spec.at("trials").is_number_integer() || spec.at("trials").get<int>() < 1)
            throw ValidationError({"sweep spec: \"trials\" must be a positive integer"});
        trials = spec.at("trials").get<int>();
    }

    SweepResult result = monte_carlo_sweep(scn, axis, values, trials, cfg.pipeline,
                                           cfg.eval_bin_width);

    fs::create_directories(out_dir);
    io::json summary{{"schema_version", 1},
                     {"axis", to_string(axis)},
                     {"trials", trials},
                     {"values", io::json::array()},
                     {"reports", io::json::array()},
                     {"median_3d_m", io::json::array()},
                     {"interference_suppression_db", io::json::array()}};
    for (std::size_t i = 0; i < result.values.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "report_%s_%03zu.json", to_string(axis), i);
        io::save_report(result.reports[i], fs::path(out_dir) / name);
        summary["values"].push_back(std::isinf(result.values[i]) ? io::json("inf")
                                                                 : io::json(result.values[i]));
        summary["reports"].push_back(name);
        summary["median_3d_m"].push_back(result.reports[i].l2_m.p50);
        double sup = result.interference_suppression_db[i];
        summary["interference_suppression_db"].push_back(std::isinf(sup) ? io::json("inf")
                                                                         : io::json(sup));
        std::cout << to_string(axis) << "=" << result.values[i]
                  << ": median 3d error " << result.reports[i].l2_m.p50 << " m over "
                  << result.reports[i].evaluated << " poses, interference suppression ";
        if (std::isinf(sup))
            std::cout << "inf\n";
        else
            std::cout << sup << " dB\n";
    }
    io::atomic_write(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");
    std::cout << "wrote " << result.values.size() << " reports to " << out_dir << "\n";
    return kExitOk;
}

int cmd_calibrate(const std::string& log_path, const io::RunConfig& cfg) {
    MeasurementLog log = io::load_log(log_path);
    try {
        ClockOffset co = calibrate_from_log(log, cfg.pipeline);
        std::cout << "clock offset: " << co.offset << " s\nconfidence: " << co.confidence
                  << "\ngrid step: " << co.grid_step << " s\n";
        return kExitOk;
    } catch (const CalibrationFailed& e) {
        std::cerr << "calibration failed: " << e.what() << "\n";
        return kExitEmptyResult;
    }
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"anchorloc: single-anchor mmWave backscatter 6DoF localization toolkit"};
    app.require_subcommand(1);

    std::string scenario_path, log_path, poses_path, out_path, config_path, spec_path, out_dir;
    std::uint64_t seed = 0;
    double bin_width = 10.0;
    double p_thresh = 0.0, max_range_diff = 0.0, pairing_gap = 0.0, offset = 0.0, window = 0.0;
    std::string calibration_mode;

    auto* sim = app.add_subcommand("simulate", "synthesize a measurement log from a scenario");
    sim->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    sim->add_option("--out", out_path, "output measurement log")->required();
    auto* sim_seed = sim->add_option("--seed", seed, "override the scenario seed");

    auto* loc = app.add_subcommand("localize", "run the localization pipeline on a log");
    loc->add_option("--log", log_path, "measurement log")->required();
    loc->add_option("--out", out_path, "output pose file")->required();
    loc->add_option("--config", config_path, "run config JSON");
    auto* loc_pt = loc->add_option("--p-thresh", p_thresh, "SNR threshold (detection + filter)");
    auto* loc_rd = loc->add_option("--max-range-diff", max_range_diff,
                                   "max inter-channel range difference [m]");
    auto* loc_pg = loc->add_option("--pairing-gap", pairing_gap, "max H/V pairing gap [s]");
    auto* loc_cm = loc->add_option("--calibration", calibration_mode,
                                   "clock calibration mode: auto|off|required");
    auto* loc_of = loc->add_option("--offset", offset, "fallback IMU-radar clock offset [s]");

    auto* ev = app.add_subcommand("evaluate", "compare poses against logged ground truth");
    ev->add_option("--poses", poses_path, "pose file from localize")->required();
    ev->add_option("--log", log_path, "measurement log carrying ground truth")->required();
    ev->add_option("--out", out_path, "output report JSON")->required();
    ev->add_option("--config", config_path, "run config JSON");
    auto* ev_bw = ev->add_option("--bin-width", bin_width, "error-vs-time bin width [s]");

    auto* sw = app.add_subcommand("sweep", "Monte-Carlo sweep over a parameter axis");
    sw->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    sw->add_option("--spec", spec_path, "sweep spec JSON: {axis, values, trials}")->required();
    sw->add_option("--out-dir", out_dir, "output directory")->required();
    sw->add_option("--config", config_path, "run config JSON");
    auto* sw_seed = sw->add_option("--seed", seed, "override the scenario seed");

    auto* cal = app.add_subcommand("calibrate", "recover the IMU-radar clock offset from a log");
    cal->add_option("--log", log_path, "measurement log")->required();
    cal->add_option("--config", config_path, "run config JSON");
    auto* cal_win = cal->add_option("--window", window, "offset search window [s]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (sim->parsed()) return cmd_simulate(scenario_path, out_path, sim_seed->count() > 0, seed);

        io::RunConfig cfg = resolve_config(config_path);
        if (loc->parsed()) {
            if (loc_pt->count() > 0) {
                cfg.pipeline.band.snr_threshold = p_thresh;
                cfg.pipeline.filter.snr_threshold = p_thresh;
            }
            if (loc_rd->count() > 0) cfg.pipeline.filter.max_rx_range_diff = max_range_diff;
            if (loc_pg->count() > 0) cfg.pipeline.filter.max_pairing_gap = pairing_gap;
            if (loc_of->count() > 0) cfg.pipeline.calibration.fallback_offset = offset;
            if (loc_cm->count() > 0) {
                if (calibration_mode == "auto")
                    cfg.pipeline.calibration.mode = CalibrationMode::Auto;
                else if (calibration_mode == "off")
                    cfg.pipeline.calibration.mode = CalibrationMode::Off;
                else if (calibration_mode == "required")
                    cfg.pipeline.calibration.mode = CalibrationMode::Required;
                else
                    throw ValidationError({"--calibration: expected auto, off, or required"});
            }
            return cmd_localize(log_path, out_path, cfg);
        }
        if (ev->parsed())
            return cmd_evaluate(poses_path, log_path, out_path,
                                ev_bw->count() > 0 ? bin_width : cfg.eval_bin_width);
        if (sw->parsed())
            return cmd_sweep(scenario_path, spec_path, out_dir, cfg, sw_seed->count() > 0, seed);
        if (cal->parsed()) {
            if (cal_win->count() > 0) cfg.pipeline.calibration.window = window;
            return cmd_calibrate(log_path, cfg);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}

} // namespace anchorloc::cli
