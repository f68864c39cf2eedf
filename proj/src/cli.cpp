#include "susplab/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "susplab/config.hpp"
#include "susplab/svg_plot.hpp"

namespace susplab::cli {

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
};

struct ResolvedRun {
    config::Config raw;
    config::LabSetup setup;
    std::string seed_source = "config";
};

void add_common(CLI::App* cmd, CommonArgs& args, bool out_is_dir) {
    cmd->add_option("--config", args.config_path,
                    "Configuration file (defaults apply when omitted)")
        ->capture_default_str();
    cmd->add_option("--seed", args.seed,
                    "Run seed; overrides SUSPLAB_SEED and the config seed");
    auto* out = cmd->add_option("--out", args.out,
                                out_is_dir ? "Output directory"
                                           : "Output file path");
    out->required();
}

ResolvedRun resolve(const CommonArgs& args) {
    ResolvedRun run;
    if (!args.config_path.empty()) {
        run.raw = config::Config::from_file(args.config_path);
    }
    run.setup = config::load_setup(run.raw);

    if (args.seed) {
        run.setup.seed = *args.seed;
        run.seed_source = "flag";
    } else if (const char* env = std::getenv("SUSPLAB_SEED")) {
        try {
            run.setup.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument(
                std::string("SUSPLAB_SEED is not an integer: ") + env);
        }
        run.seed_source = "env";
    }
    run.setup.road.seed = run.setup.seed;
    run.setup.cfoa.seed = run.setup.seed;
    run.setup.tuning.cfoa.seed = run.setup.seed;

    const auto unused = run.raw.unused_keys({"manifest", "outputs", "tune_result"});
    if (!unused.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& key : unused) msg += " " + key;
        throw std::invalid_argument(msg);
    }
    return run;
}

fuzzy::FuzzySystem build_fuzzy(const config::LabSetup& setup) {
    fuzzy::FuzzySystem system = fuzzy::FuzzySystem::make_default(setup.fuzzy_table);
    if (!setup.rules_csv.empty()) {
        std::ifstream in(setup.rules_csv);
        if (!in) {
            throw std::invalid_argument("cannot open rules CSV: " + setup.rules_csv);
        }
        system.set_rules(fuzzy::RuleBase::from_csv(in));
    }
    return system;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    out << content;
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

template <typename Fn>
void write_stream_file(const fs::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    fn(out);
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

/// The manifest goes to disk before any computation output and declares every
/// file the run will write.
void write_manifest(const fs::path& path, const std::string& subcommand,
                    const ResolvedRun& run, const std::string& out_target,
                    const std::vector<std::string>& outputs) {
    config::Config manifest;
    manifest.set("manifest", "tool", std::string("susplab ") + kVersion);
    manifest.set("manifest", "subcommand", subcommand);
    manifest.set("manifest", "config_path",
                 run.raw.dump().empty() ? "(builtin defaults)" : "(snapshot below)");
    manifest.set("manifest", "seed", std::to_string(run.setup.seed));
    manifest.set("manifest", "seed_source", run.seed_source);
    manifest.set("manifest", "out", out_target);
    config::LabSetup snapshot = run.setup;
    config::dump_setup(snapshot, manifest);
    std::string files;
    for (const auto& f : outputs) {
        if (!files.empty()) files += ", ";
        files += f;
    }
    manifest.set("outputs", "files", files);
    write_text_file(path, manifest.dump());
}

fs::path prepare_out_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

int cmd_road_gen(const CommonArgs& args) {
    ResolvedRun run = resolve(args);
    const auto& setup = run.setup;
    const fs::path dir = prepare_out_dir(args.out);

    const std::vector<std::string> outputs = {"manifest.cfg", "road.csv",
                                              "road_psd.csv", "road.svg",
                                              "road_psd.svg"};
    write_manifest(dir / "manifest.cfg", "road-gen", run, args.out, outputs);

    const road::RoadProfile profile =
        road::generate_profile(setup.road, setup.simc.velocity, setup.simc.dt,
                               setup.simc.duration);
    write_stream_file(dir / "road.csv",
                      [&](std::ostream& out) { road::write_csv(profile, out); });

    const auto psd = road::estimate_psd(profile);
    write_stream_file(dir / "road_psd.csv", [&](std::ostream& out) {
        out << "omega_cpm,estimated_power,target_power\n";
        char buf[128];
        for (const auto& pt : psd) {
            const double target =
                pt.omega > 0.0 ? road::psd_value(setup.road, pt.omega) : 0.0;
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", pt.omega,
                          pt.power, target);
            out << buf;
        }
    });

    write_stream_file(dir / "road.svg", [&](std::ostream& out) {
        svg::Series series;
        series.label = "elevation";
        series.x.resize(profile.samples.size());
        for (std::size_t i = 0; i < profile.samples.size(); ++i) {
            series.x[i] = static_cast<double>(i) * profile.dt;
        }
        series.y = profile.samples;
        svg::PlotOptions opts;
        opts.title = "road elevation";
        opts.x_label = "time (s)";
        opts.y_label = "z_g (m)";
        svg::write_line_plot(out, {series}, opts);
    });

    write_stream_file(dir / "road_psd.svg", [&](std::ostream& out) {
        svg::Series est, target;
        est.label = "estimated";
        target.label = "target";
        for (const auto& pt : psd) {
            if (!(pt.omega > 0.0) || !(pt.power > 0.0)) continue;
            est.x.push_back(pt.omega);
            est.y.push_back(pt.power);
            target.x.push_back(pt.omega);
            target.y.push_back(road::psd_value(setup.road, pt.omega));
        }
        svg::PlotOptions opts;
        opts.title = "road PSD";
        opts.x_label = "omega (cycles/m)";
        opts.y_label = "S (m^2/(cycles/m))";
        opts.log10_x = true;
        opts.log10_y = true;
        svg::write_line_plot(out, {est, target}, opts);
    });
    return 0;
}

int cmd_rules_dump(const CommonArgs& args) {
    ResolvedRun run = resolve(args);
    const fs::path out_file(args.out);
    if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
    const fs::path manifest_path(args.out + ".manifest.cfg");

    write_manifest(manifest_path, "rules-dump", run, args.out,
                   {manifest_path.filename().string(),
                    out_file.filename().string()});

    const fuzzy::FuzzySystem system = build_fuzzy(run.setup);
    write_stream_file(out_file,
                      [&](std::ostream& out) { system.rules().to_csv(out); });
    return 0;
}

int cmd_simulate(const CommonArgs& args, const std::string& mode_override) {
    ResolvedRun run = resolve(args);
    auto& setup = run.setup;
    if (!mode_override.empty()) {
        const auto mode = sim::sim_mode_from_name(mode_override);
        if (!mode) {
            throw std::invalid_argument("unknown --mode: " + mode_override);
        }
        setup.simc.mode = *mode;
    }
    const fs::path dir = prepare_out_dir(args.out);

    const std::vector<std::string> channel_names = {
        "z_s", "z_u", "v_s", "v_u", "a_s", "distortion", "tire_load", "f_d"};
    std::vector<std::string> outputs = {"manifest.cfg", "road.csv",
                                        "timeseries.csv", "metrics.csv",
                                        "metrics.txt"};
    for (const auto& name : channel_names) outputs.push_back(name + ".svg");
    write_manifest(dir / "manifest.cfg", "simulate", run, args.out, outputs);

    const road::RoadProfile profile =
        road::generate_profile(setup.road, setup.simc.velocity, setup.simc.dt,
                               setup.simc.duration);
    write_stream_file(dir / "road.csv",
                      [&](std::ostream& out) { road::write_csv(profile, out); });

    const fuzzy::FuzzySystem system = build_fuzzy(setup);
    const sim::TimeSeries ts = sim::integrate_closed_loop(
        setup.params, &system, &setup.gains, profile, setup.simc);
    write_stream_file(dir / "timeseries.csv",
                      [&](std::ostream& out) { sim::write_csv(ts, out); });

    const sim::Metrics metrics = sim::compute_metrics(ts, setup.simc.settle_skip);
    write_stream_file(dir / "metrics.csv", [&](std::ostream& out) {
        sim::write_csv(metrics, setup.simc.settle_skip, out);
    });
    {
        std::ostringstream text;
        char line[128];
        std::snprintf(line, sizeof(line), "%-22s %14s\n", "metric", "value");
        text << line;
        const struct {
            const char* name;
            double value;
        } rows[] = {
            {"peak_accel (m/s^2)", metrics.peak_accel},
            {"rms_accel (m/s^2)", metrics.rms_accel},
            {"peak_distortion (m)", metrics.peak_distortion},
            {"rms_distortion (m)", metrics.rms_distortion},
            {"tire_load_min (N)", metrics.tire_load_min},
            {"tire_load_max (N)", metrics.tire_load_max},
            {"settle_skip (s)", setup.simc.settle_skip},
        };
        for (const auto& row : rows) {
            std::snprintf(line, sizeof(line), "%-22s %14.6g\n", row.name,
                          row.value);
            text << line;
        }
        write_text_file(dir / "metrics.txt", text.str());
    }

    const std::vector<const std::vector<double>*> channels = {
        &ts.z_s, &ts.z_u, &ts.v_s, &ts.v_u,
        &ts.a_s, &ts.distortion, &ts.tire_load, &ts.f_d};
    for (std::size_t c = 0; c < channels.size(); ++c) {
        write_stream_file(dir / (channel_names[c] + ".svg"),
                          [&](std::ostream& out) {
                              svg::Series series;
                              series.label = channel_names[c];
                              series.x = ts.time;
                              series.y = *channels[c];
                              svg::PlotOptions opts;
                              opts.title = channel_names[c];
                              opts.x_label = "time (s)";
                              opts.y_label = channel_names[c];
                              svg::write_line_plot(out, {series}, opts);
                          });
    }
    return 0;
}

int cmd_tune(const CommonArgs& args, const std::string& method) {
    ResolvedRun run = resolve(args);
    auto& setup = run.setup;
    const auto tuner = sim::tuner_from_name(method);
    if (!tuner || *tuner == sim::TunerKind::none) {
        throw std::invalid_argument("unknown --method: " + method);
    }
    const fs::path dir = prepare_out_dir(args.out);

    const bool metaheuristic = *tuner != sim::TunerKind::zn;
    std::vector<std::string> outputs = {"manifest.cfg", "gains.cfg"};
    if (metaheuristic) {
        outputs.push_back("convergence.csv");
        outputs.push_back("smell.csv");
        outputs.push_back("convergence.svg");
    }
    write_manifest(dir / "manifest.cfg", "tune", run, args.out, outputs);

    const fuzzy::FuzzySystem system = build_fuzzy(setup);
    config::Config gains_out;
    optim::OptResult opt;
    bool has_opt = false;

    if (*tuner == sim::TunerKind::zn) {
        const auto loop = [&](double kp) {
            return sim::zn_distortion_response(setup.params, kp,
                                               setup.tuning.tune_dt,
                                               setup.tuning.zn_duration,
                                               setup.simc.dynamics);
        };
        const optim::ZnResult zn =
            optim::zn_tune(loop, setup.tuning.tune_dt, setup.zn);
        gains_out.set_double("pid", "kp", zn.gains.kp);
        gains_out.set_double("pid", "ki", zn.gains.ki);
        gains_out.set_double("pid", "kd", zn.gains.kd);
        gains_out.set("tune_result", "method", "zn");
        gains_out.set_double("tune_result", "ultimate_gain", zn.ultimate_gain);
        gains_out.set_double("tune_result", "ultimate_period", zn.ultimate_period);
    } else {
        const road::RoadProfile tuning_road = road::generate_profile(
            setup.road, setup.simc.velocity, setup.tuning.tune_dt,
            setup.tuning.tune_duration);
        sim::SimConfig tune_cfg = setup.simc;
        tune_cfg.dt = setup.tuning.tune_dt;
        tune_cfg.duration = setup.tuning.tune_duration;
        const auto objective = sim::make_tuning_objective(
            setup.params, system, tuning_road, tune_cfg, setup.tuning.weights,
            setup.tuning.branch);
        if (*tuner == sim::TunerKind::cfoa) {
            opt = optim::cfoa_minimize(objective, setup.tuning.cfoa);
        } else {
            const auto m = optim::baseline_from_name(sim::tuner_name(*tuner));
            opt = optim::baseline_minimize(*m, objective, setup.tuning.budget,
                                           setup.seed, setup.tuning.baseline);
        }
        has_opt = true;
        gains_out.set_double("pid", "kp", opt.best_gains.kp);
        gains_out.set_double("pid", "ki", opt.best_gains.ki);
        gains_out.set_double("pid", "kd", opt.best_gains.kd);
        gains_out.set("tune_result", "method", sim::tuner_name(*tuner));
        gains_out.set_double("tune_result", "best_score", opt.best_score);
        gains_out.set("tune_result", "evals", std::to_string(opt.evals));
    }
    write_text_file(dir / "gains.cfg", gains_out.dump());

    if (has_opt) {
        write_stream_file(dir / "convergence.csv", [&](std::ostream& out) {
            out << "iteration,best_score\n";
            char buf[64];
            for (std::size_t i = 0; i < opt.history.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, opt.history[i]);
                out << buf;
            }
        });
        write_stream_file(dir / "smell.csv", [&](std::ostream& out) {
            out << "iteration,smell_concentration\n";
            char buf[64];
            for (std::size_t i = 0; i < opt.smell_history.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i,
                              opt.smell_history[i]);
                out << buf;
            }
        });
        write_stream_file(dir / "convergence.svg", [&](std::ostream& out) {
            svg::Series series;
            series.label = "best score";
            for (std::size_t i = 0; i < opt.history.size(); ++i) {
                series.x.push_back(static_cast<double>(i));
                series.y.push_back(opt.history[i]);
            }
            svg::PlotOptions opts;
            opts.title = "tuning convergence";
            opts.x_label = "iteration";
            opts.y_label = "best judgment";
            svg::write_line_plot(out, {series}, opts);
        });
    }
    return 0;
}

int cmd_compare(const CommonArgs& args) {
    ResolvedRun run = resolve(args);
    auto& setup = run.setup;

    bool reference_found = false;
    for (const auto& scenario : setup.scenarios) {
        if (scenario.label == setup.reference) reference_found = true;
    }
    if (!reference_found) {
        throw std::invalid_argument("compare reference '" + setup.reference +
                                    "' is not in the scenario list");
    }

    const fs::path dir = prepare_out_dir(args.out);
    std::vector<std::string> outputs = {"manifest.cfg", "comparison.csv",
                                        "comparison.txt", "overlay_a_s.svg",
                                        "overlay_distortion.svg",
                                        "overlay_tire_load.svg",
                                        "convergence_overlay.svg"};
    for (const auto& scenario : setup.scenarios) {
        outputs.push_back("timeseries_" + scenario.label + ".csv");
    }
    write_manifest(dir / "manifest.cfg", "compare", run, args.out, outputs);

    const fuzzy::FuzzySystem system = build_fuzzy(setup);
    const sim::ComparisonTable table = sim::run_comparison(
        setup.scenarios, setup.reference, setup.params, system, setup.road,
        setup.seed, setup.simc, setup.tuning);

    write_stream_file(dir / "comparison.csv", [&](std::ostream& out) {
        sim::comparison_to_csv(table, out);
    });
    write_text_file(dir / "comparison.txt", sim::render_comparison(table));

    for (const auto& row : table.rows) {
        const fs::path path = dir / ("timeseries_" + row.label + ".csv");
        if (row.ok) {
            write_stream_file(path, [&](std::ostream& out) {
                sim::write_csv(row.series, out);
            });
        } else {
            write_text_file(path, "failed," + row.error + "\n");
        }
    }

    const struct {
        const char* file;
        const char* title;
        const std::vector<double> sim::TimeSeries::* channel;
    } overlays[] = {
        {"overlay_a_s.svg", "sprung acceleration", &sim::TimeSeries::a_s},
        {"overlay_distortion.svg", "suspension distortion",
         &sim::TimeSeries::distortion},
        {"overlay_tire_load.svg", "tire load", &sim::TimeSeries::tire_load},
    };
    for (const auto& overlay : overlays) {
        write_stream_file(dir / overlay.file, [&](std::ostream& out) {
            std::vector<svg::Series> series;
            for (const auto& row : table.rows) {
                if (!row.ok) continue;
                svg::Series s;
                s.label = row.label;
                s.x = row.series.time;
                s.y = row.series.*(overlay.channel);
                series.push_back(std::move(s));
            }
            svg::PlotOptions opts;
            opts.title = overlay.title;
            opts.x_label = "time (s)";
            opts.y_label = overlay.title;
            svg::write_line_plot(out, series, opts);
        });
    }
    write_stream_file(dir / "convergence_overlay.svg", [&](std::ostream& out) {
        std::vector<svg::Series> series;
        for (const auto& row : table.rows) {
            if (!row.ok || !row.has_opt) continue;
            svg::Series s;
            s.label = row.label;
            for (std::size_t i = 0; i < row.opt.history.size(); ++i) {
                s.x.push_back(static_cast<double>(i));
                s.y.push_back(row.opt.history[i]);
            }
            series.push_back(std::move(s));
        }
        svg::PlotOptions opts;
        opts.title = "tuning convergence";
        opts.x_label = "iteration";
        opts.y_label = "best judgment";
        svg::write_line_plot(out, series, opts);
    });

    std::cout << sim::render_comparison(table);
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"susplab: semi-active suspension control laboratory"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    CommonArgs road_args, rules_args, sim_args, tune_args, cmp_args;
    std::string mode_override;
    std::string tune_method = "cfoa";

    auto* road_cmd =
        app.add_subcommand("road-gen", "Generate a seeded road profile");
    add_common(road_cmd, road_args, true);

    auto* rules_cmd =
        app.add_subcommand("rules-dump", "Write the 729-rule base as CSV");
    add_common(rules_cmd, rules_args, false);

    auto* sim_cmd =
        app.add_subcommand("simulate", "Run one closed-loop simulation");
    add_common(sim_cmd, sim_args, true);
    sim_cmd->add_option("--mode", mode_override,
                        "Override sim mode (active, semi_active_zero, "
                        "semi_active_fuzzy_pid)");

    auto* tune_cmd = app.add_subcommand("tune", "Tune PID gains");
    add_common(tune_cmd, tune_args, true);
    tune_cmd->add_option("--method", tune_method,
                         "Tuner: cfoa, foa, ga, pso, bfo, zn")
        ->capture_default_str();

    auto* cmp_cmd =
        app.add_subcommand("compare", "Run the multi-scenario comparison");
    add_common(cmp_cmd, cmp_args, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (road_cmd->parsed()) return cmd_road_gen(road_args);
        if (rules_cmd->parsed()) return cmd_rules_dump(rules_args);
        if (sim_cmd->parsed()) return cmd_simulate(sim_args, mode_override);
        if (tune_cmd->parsed()) return cmd_tune(tune_args, tune_method);
        if (cmp_cmd->parsed()) return cmd_compare(cmp_args);
    } catch (const std::invalid_argument& ex) {
        std::cerr << "susplab: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "susplab: " << ex.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace susplab::cli
