#include "susplab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace susplab::sim {

namespace {

using dynamics::DynamicsOptions;
using dynamics::Mode;
using dynamics::StateDerivative;
using dynamics::SuspensionParams;
using dynamics::VehicleState;

// Linear interpolation into the road profile; clamped at both ends.
double road_elevation(const road::RoadProfile& profile, double t) {
    if (t <= 0.0) return profile.samples.front();
    const double pos = t / profile.dt;
    const auto idx = static_cast<std::size_t>(pos);
    if (idx + 1 >= profile.samples.size()) return profile.samples.back();
    const double frac = pos - static_cast<double>(idx);
    return profile.samples[idx] +
           frac * (profile.samples[idx + 1] - profile.samples[idx]);
}

VehicleState axpy(const VehicleState& s, double h, const StateDerivative& d) {
    return {s.z_s + h * d.z_s, s.v_s + h * d.v_s, s.z_u + h * d.z_u,
            s.v_u + h * d.v_u};
}

// One RK4 step with the controller command held constant.
VehicleState rk4_step(const SuspensionParams& p, const VehicleState& s,
                      const road::RoadProfile& profile, double t, double dt,
                      Mode mode, double f_d, const DynamicsOptions& opts,
                      double parallel_force) {
    const auto f = [&](const VehicleState& x, double time) {
        return dynamics::derivatives(p, x, road_elevation(profile, time), 0.0,
                                     mode, f_d, opts, parallel_force);
    };
    const StateDerivative k1 = f(s, t);
    const StateDerivative k2 = f(axpy(s, 0.5 * dt, k1), t + 0.5 * dt);
    const StateDerivative k3 = f(axpy(s, 0.5 * dt, k2), t + 0.5 * dt);
    const StateDerivative k4 = f(axpy(s, dt, k3), t + dt);
    VehicleState next = s;
    next.z_s += dt / 6.0 * (k1.z_s + 2.0 * k2.z_s + 2.0 * k3.z_s + k4.z_s);
    next.v_s += dt / 6.0 * (k1.v_s + 2.0 * k2.v_s + 2.0 * k3.v_s + k4.v_s);
    next.z_u += dt / 6.0 * (k1.z_u + 2.0 * k2.z_u + 2.0 * k3.z_u + k4.z_u);
    next.v_u += dt / 6.0 * (k1.v_u + 2.0 * k2.v_u + 2.0 * k3.v_u + k4.v_u);
    return next;
}

void check_divergence(const VehicleState& s, std::size_t step) {
    const double limit = 1e6;
    if (std::abs(s.z_s) > limit || std::abs(s.v_s) > limit ||
        std::abs(s.z_u) > limit || std::abs(s.v_u) > limit ||
        !std::isfinite(s.z_s) || !std::isfinite(s.v_s) ||
        !std::isfinite(s.z_u) || !std::isfinite(s.v_u)) {
        std::ostringstream msg;
        msg << "state divergence at step " << step << " (|component| > 1e6)";
        throw std::runtime_error(msg.str());
    }
}

}  // namespace

const char* sim_mode_name(SimMode mode) {
    switch (mode) {
        case SimMode::active: return "active";
        case SimMode::semi_active_zero: return "semi_active_zero";
        case SimMode::semi_active_fuzzy_pid: return "semi_active_fuzzy_pid";
    }
    return "unknown";
}

std::optional<SimMode> sim_mode_from_name(std::string_view name) {
    if (name == "active") return SimMode::active;
    if (name == "semi_active_zero") return SimMode::semi_active_zero;
    if (name == "semi_active_fuzzy_pid") return SimMode::semi_active_fuzzy_pid;
    return std::nullopt;
}

const char* tuner_name(TunerKind tuner) {
    switch (tuner) {
        case TunerKind::none: return "none";
        case TunerKind::zn: return "zn";
        case TunerKind::foa: return "foa";
        case TunerKind::ga: return "ga";
        case TunerKind::pso: return "pso";
        case TunerKind::bfo: return "bfo";
        case TunerKind::cfoa: return "cfoa";
    }
    return "unknown";
}

std::optional<TunerKind> tuner_from_name(std::string_view name) {
    if (name == "none") return TunerKind::none;
    if (name == "zn") return TunerKind::zn;
    if (name == "foa") return TunerKind::foa;
    if (name == "ga") return TunerKind::ga;
    if (name == "pso") return TunerKind::pso;
    if (name == "bfo") return TunerKind::bfo;
    if (name == "cfoa") return TunerKind::cfoa;
    return std::nullopt;
}

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("sim dt must be > 0");
    if (!(duration >= dt)) throw std::invalid_argument("sim duration must be >= dt");
    if (!(velocity > 0.0)) throw std::invalid_argument("sim velocity must be > 0");
    if (!(settle_skip >= 0.0)) throw std::invalid_argument("settle_skip must be >= 0");
}

TimeSeries integrate_closed_loop(const SuspensionParams& params,
                                 const fuzzy::FuzzySystem* fuzzy_sys,
                                 const pid::PidGains* gains,
                                 const road::RoadProfile& road_profile,
                                 const SimConfig& cfg,
                                 std::vector<double>* pid_output) {
    cfg.validate();
    params.validate();
    if (road_profile.samples.size() < 2 || !(road_profile.dt > 0.0)) {
        throw std::invalid_argument("road profile needs >= 2 samples and dt > 0");
    }
    const bool fuzzy_pid = cfg.mode == SimMode::semi_active_fuzzy_pid;
    if (fuzzy_pid) {
        if (!fuzzy_sys || !gains) {
            throw std::invalid_argument(
                "fuzzy-PID mode needs a fuzzy system and PID gains");
        }
        gains->validate();
    }
    const Mode plant_mode =
        (cfg.mode == SimMode::active) ? Mode::active : Mode::semi_active;

    VehicleState state;
    if (cfg.initial_state) {
        state = *cfg.initial_state;
    } else if (cfg.equilibrium_start) {
        state = dynamics::static_equilibrium(params, plant_mode, cfg.dynamics);
    }

    const auto n =
        static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt)) + 1;
    TimeSeries ts;
    for (auto* ch : {&ts.time, &ts.z_s, &ts.z_u, &ts.v_s, &ts.v_u, &ts.a_s,
                     &ts.distortion, &ts.tire_load, &ts.f_d}) {
        ch->reserve(n);
    }
    if (pid_output) pid_output->reserve(n);

    pid::PidState pid_state;
    // Seed the causal acceleration input with the un-commanded value.
    double a_prev =
        dynamics::derivatives(params, state, road_elevation(road_profile, 0.0),
                              0.0, plant_mode, 0.0, cfg.dynamics)
            .v_s;

    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * cfg.dt;
        const double z_g = road_elevation(road_profile, t);
        const double distortion = state.z_s - state.z_u;

        double f_d = 0.0;
        double parallel = 0.0;
        double u_pid = 0.0;
        if (fuzzy_pid) {
            const double u_fuzzy =
                fuzzy_sys->infer(state.v_s, a_prev, distortion);
            const double e = 0.0 - distortion;
            const pid::PidOutput out = pid_step(*gains, pid_state, e, cfg.dt);
            pid_state = out.state;
            u_pid = out.u;
            if (cfg.pid_routing == PidRouting::clamped_sum) {
                f_d = std::clamp(u_fuzzy + u_pid, params.f_min, params.f_max);
            } else {
                f_d = std::clamp(u_fuzzy, params.f_min, params.f_max);
                parallel = u_pid;
            }
        }

        dynamics::ForceBreakdown forces;
        const StateDerivative deriv = dynamics::derivatives(
            params, state, z_g, 0.0, plant_mode, f_d, cfg.dynamics, parallel,
            &forces);

        ts.time.push_back(t);
        ts.z_s.push_back(state.z_s);
        ts.z_u.push_back(state.z_u);
        ts.v_s.push_back(state.v_s);
        ts.v_u.push_back(state.v_u);
        ts.a_s.push_back(deriv.v_s);
        ts.distortion.push_back(distortion);
        ts.tire_load.push_back(forces.f_tire);
        ts.f_d.push_back(f_d);
        if (pid_output) pid_output->push_back(u_pid);

        a_prev = deriv.v_s;
        if (i + 1 < n) {
            state = rk4_step(params, state, road_profile, t, cfg.dt, plant_mode,
                             f_d, cfg.dynamics, parallel);
            check_divergence(state, i + 1);
        }
    }
    return ts;
}

Metrics compute_metrics(const TimeSeries& ts, double settle_skip) {
    if (ts.size() == 0) {
        throw std::invalid_argument("compute_metrics on an empty series");
    }
    Metrics m;
    m.tire_load_min = std::numeric_limits<double>::infinity();
    m.tire_load_max = -std::numeric_limits<double>::infinity();
    double sum_a2 = 0.0, sum_d2 = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(ts.time[i] > settle_skip)) continue;
        ++count;
        m.peak_accel = std::max(m.peak_accel, std::abs(ts.a_s[i]));
        m.peak_distortion = std::max(m.peak_distortion, std::abs(ts.distortion[i]));
        sum_a2 += ts.a_s[i] * ts.a_s[i];
        sum_d2 += ts.distortion[i] * ts.distortion[i];
        m.tire_load_min = std::min(m.tire_load_min, ts.tire_load[i]);
        m.tire_load_max = std::max(m.tire_load_max, ts.tire_load[i]);
    }
    if (count == 0) {
        throw std::invalid_argument("settle_skip leaves no samples for metrics");
    }
    m.rms_accel = std::sqrt(sum_a2 / static_cast<double>(count));
    m.rms_distortion = std::sqrt(sum_d2 / static_cast<double>(count));
    return m;
}

optim::Objective make_tuning_objective(const SuspensionParams& params,
                                       const fuzzy::FuzzySystem& fuzzy_sys,
                                       const road::RoadProfile& tuning_road,
                                       const SimConfig& tune_cfg,
                                       const pid::JudgmentWeights& weights,
                                       pid::OvershootBranch branch) {
    SimConfig cfg = tune_cfg;
    cfg.mode = SimMode::semi_active_fuzzy_pid;
    return [params, &fuzzy_sys, tuning_road, cfg, weights,
            branch](const pid::PidGains& gains) -> double {
        try {
            std::vector<double> u_series;
            const TimeSeries ts = integrate_closed_loop(
                params, &fuzzy_sys, &gains, tuning_road, cfg, &u_series);
            std::vector<double> e_series(ts.size());
            for (std::size_t i = 0; i < ts.size(); ++i) {
                e_series[i] = 0.0 - ts.distortion[i];
            }
            return pid::judgment(e_series, u_series, cfg.dt, weights, 0.0, branch)
                .j;
        } catch (const std::runtime_error&) {
            // Diverged candidate: worst possible score.
            return std::numeric_limits<double>::infinity();
        }
    };
}

std::vector<double> zn_distortion_response(const SuspensionParams& params,
                                           double kp, double dt, double duration,
                                           const DynamicsOptions& opts,
                                           double initial_offset) {
    road::RoadProfile flat;
    flat.dt = duration;
    flat.velocity = 1.0;
    flat.samples = {0.0, 0.0};

    VehicleState state = dynamics::static_equilibrium(params, Mode::semi_active, opts);
    const double d_ref = state.z_s - state.z_u;
    state.z_s += initial_offset;

    const auto n = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
    std::vector<double> response;
    response.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double distortion = state.z_s - state.z_u;
        response.push_back(distortion);
        const double u = kp * (d_ref - distortion);
        if (i + 1 < n) {
            state = rk4_step(params, state, flat, static_cast<double>(i) * dt, dt,
                             Mode::semi_active, 0.0, opts, u);
            // The probe is allowed to diverge; the envelope classifier treats
            // non-finite output as a growing response.
            if (!std::isfinite(state.z_s) || !std::isfinite(state.v_s) ||
                !std::isfinite(state.z_u) || !std::isfinite(state.v_u)) {
                response.resize(n, std::numeric_limits<double>::infinity());
                break;
            }
        }
    }
    return response;
}

ComparisonTable run_comparison(const std::vector<Scenario>& scenarios,
                               const std::string& reference_label,
                               const SuspensionParams& params,
                               const fuzzy::FuzzySystem& fuzzy_sys,
                               const road::RoadSpec& road_spec,
                               std::uint64_t road_seed, const SimConfig& sim_cfg,
                               const TuningSetup& tuning) {
    if (scenarios.size() < 2) {
        throw std::invalid_argument("run_comparison needs at least 2 scenarios");
    }
    const bool have_reference =
        std::any_of(scenarios.begin(), scenarios.end(), [&](const Scenario& s) {
            return s.label == reference_label;
        });
    if (!have_reference) {
        throw std::invalid_argument("reference scenario '" + reference_label +
                                    "' is not in the scenario list");
    }

    road::RoadSpec seeded_spec = road_spec;
    seeded_spec.seed = road_seed;
    const road::RoadProfile shared_road = road::generate_profile(
        seeded_spec, sim_cfg.velocity, sim_cfg.dt, sim_cfg.duration);
    const road::RoadProfile tuning_road = road::generate_profile(
        seeded_spec, sim_cfg.velocity, tuning.tune_dt, tuning.tune_duration);

    SimConfig tune_cfg = sim_cfg;
    tune_cfg.dt = tuning.tune_dt;
    tune_cfg.duration = tuning.tune_duration;
    tune_cfg.mode = SimMode::semi_active_fuzzy_pid;

    ComparisonTable table;
    table.reference_label = reference_label;
    table.settle_skip = sim_cfg.settle_skip;
    table.road_seed = road_seed;

    for (const Scenario& scenario : scenarios) {
        ScenarioResult row;
        row.label = scenario.label;
        row.mode = scenario.mode;
        row.tuner = scenario.tuner;
        try {
            pid::PidGains gains = tuning.fixed_gains;
            if (scenario.mode == SimMode::semi_active_fuzzy_pid) {
                switch (scenario.tuner) {
                    case TunerKind::none:
                        break;
                    case TunerKind::zn: {
                        const auto loop = [&](double kp) {
                            return zn_distortion_response(params, kp,
                                                          tuning.tune_dt,
                                                          tuning.zn_duration,
                                                          sim_cfg.dynamics);
                        };
                        const optim::ZnResult zn =
                            optim::zn_tune(loop, tuning.tune_dt, tuning.zn);
                        gains = zn.gains;
                        row.zn_ultimate_gain = zn.ultimate_gain;
                        row.zn_ultimate_period = zn.ultimate_period;
                        break;
                    }
                    case TunerKind::cfoa: {
                        const auto objective = make_tuning_objective(
                            params, fuzzy_sys, tuning_road, tune_cfg,
                            tuning.weights, tuning.branch);
                        row.opt = optim::cfoa_minimize(objective, tuning.cfoa);
                        row.has_opt = true;
                        gains = row.opt.best_gains;
                        break;
                    }
                    default: {
                        const auto objective = make_tuning_objective(
                            params, fuzzy_sys, tuning_road, tune_cfg,
                            tuning.weights, tuning.branch);
                        const auto method =
                            optim::baseline_from_name(tuner_name(scenario.tuner));
                        row.opt = optim::baseline_minimize(
                            *method, objective, tuning.budget, tuning.cfoa.seed,
                            tuning.baseline);
                        row.has_opt = true;
                        gains = row.opt.best_gains;
                        break;
                    }
                }
                row.gains = gains;
            }

            SimConfig run_cfg = sim_cfg;
            run_cfg.mode = scenario.mode;
            row.series = integrate_closed_loop(
                params,
                scenario.mode == SimMode::semi_active_fuzzy_pid ? &fuzzy_sys
                                                                : nullptr,
                scenario.mode == SimMode::semi_active_fuzzy_pid ? &gains : nullptr,
                shared_road, run_cfg);
            row.metrics = compute_metrics(row.series, sim_cfg.settle_skip);
            row.ok = true;
        } catch (const std::exception& ex) {
            row.ok = false;
            row.error = ex.what();
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {

const ScenarioResult* find_reference(const ComparisonTable& table) {
    for (const auto& row : table.rows) {
        if (row.label == table.reference_label && row.ok) return &row;
    }
    return nullptr;
}

std::string delta_pct(double value, double reference) {
    if (!(std::abs(reference) > 0.0)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+.1f%%",
                  100.0 * (value - reference) / std::abs(reference));
    return buf;
}

}  // namespace

std::string render_comparison(const ComparisonTable& table) {
    const ScenarioResult* ref = find_reference(table);
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-22s %12s %12s %14s %14s %12s %12s\n",
                  "scenario", "peak_accel", "rms_accel", "peak_distort",
                  "rms_distort", "tire_min", "tire_max");
    out << line;
    for (const auto& row : table.rows) {
        if (!row.ok) {
            std::snprintf(line, sizeof(line), "%-22s FAILED: %s\n",
                          row.label.c_str(), row.error.c_str());
            out << line;
            continue;
        }
        const Metrics& m = row.metrics;
        std::snprintf(line, sizeof(line),
                      "%-22s %12.5g %12.5g %14.5g %14.5g %12.5g %12.5g\n",
                      row.label.c_str(), m.peak_accel, m.rms_accel,
                      m.peak_distortion, m.rms_distortion, m.tire_load_min,
                      m.tire_load_max);
        out << line;
        if (ref && &row != ref) {
            std::snprintf(line, sizeof(line),
                          "%-22s %12s %12s %14s %14s %12s %12s\n",
                          ("  vs " + table.reference_label).c_str(),
                          delta_pct(m.peak_accel, ref->metrics.peak_accel).c_str(),
                          delta_pct(m.rms_accel, ref->metrics.rms_accel).c_str(),
                          delta_pct(m.peak_distortion, ref->metrics.peak_distortion).c_str(),
                          delta_pct(m.rms_distortion, ref->metrics.rms_distortion).c_str(),
                          delta_pct(m.tire_load_min, ref->metrics.tire_load_min).c_str(),
                          delta_pct(m.tire_load_max, ref->metrics.tire_load_max).c_str());
            out << line;
        }
    }
    std::snprintf(line, sizeof(line),
                  "reference=%s settle_skip=%.3gs road_seed=%llu\n",
                  table.reference_label.c_str(), table.settle_skip,
                  static_cast<unsigned long long>(table.road_seed));
    out << line;
    return out.str();
}

void comparison_to_csv(const ComparisonTable& table, std::ostream& out) {
    const ScenarioResult* ref = find_reference(table);
    out << "scenario,status,kp,ki,kd,peak_accel_mps2,rms_accel_mps2,"
           "peak_distortion_m,rms_distortion_m,tire_load_min_n,tire_load_max_n,"
           "delta_peak_accel_pct,delta_rms_accel_pct,delta_peak_distortion_pct,"
           "delta_rms_distortion_pct\n";
    char buf[512];
    for (const auto& row : table.rows) {
        if (!row.ok) {
            out << row.label << ",failed,,,,,,,,,,,,,\n";
            continue;
        }
        const Metrics& m = row.metrics;
        auto delta = [&](double v, double r) {
            if (!ref) return std::string("");
            if (!(std::abs(r) > 0.0)) return std::string("");
            char d[32];
            std::snprintf(d, sizeof(d), "%.6g", 100.0 * (v - r) / std::abs(r));
            return std::string(d);
        };
        std::snprintf(buf, sizeof(buf),
                      "%s,ok,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                      "%.17g,%s,%s,%s,%s\n",
                      row.label.c_str(), row.gains.kp, row.gains.ki, row.gains.kd,
                      m.peak_accel, m.rms_accel, m.peak_distortion,
                      m.rms_distortion, m.tire_load_min, m.tire_load_max,
                      ref ? delta(m.peak_accel, ref->metrics.peak_accel).c_str() : "",
                      ref ? delta(m.rms_accel, ref->metrics.rms_accel).c_str() : "",
                      ref ? delta(m.peak_distortion, ref->metrics.peak_distortion).c_str() : "",
                      ref ? delta(m.rms_distortion, ref->metrics.rms_distortion).c_str() : "");
        out << buf;
    }
}

void write_csv(const TimeSeries& ts, std::ostream& out) {
    out << "time_s,z_s_m,z_u_m,v_s_mps,v_u_mps,a_s_mps2,distortion_m,"
           "tire_load_n,f_d_n\n";
    char buf[512];
    for (std::size_t i = 0; i < ts.size(); ++i) {
        std::snprintf(buf, sizeof(buf),
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      ts.time[i], ts.z_s[i], ts.z_u[i], ts.v_s[i], ts.v_u[i],
                      ts.a_s[i], ts.distortion[i], ts.tire_load[i], ts.f_d[i]);
        out << buf;
    }
}

void write_csv(const Metrics& m, double settle_skip, std::ostream& out) {
    out << "metric,value\n";
    char buf[128];
    const struct {
        const char* name;
        double value;
    } rows[] = {
        {"peak_accel_mps2", m.peak_accel},
        {"rms_accel_mps2", m.rms_accel},
        {"peak_distortion_m", m.peak_distortion},
        {"rms_distortion_m", m.rms_distortion},
        {"tire_load_min_n", m.tire_load_min},
        {"tire_load_max_n", m.tire_load_max},
        {"settle_skip_s", settle_skip},
    };
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g\n", row.name, row.value);
        out << buf;
    }
}

}  // namespace susplab::sim
