// Closed-loop integration of the quarter car under road excitation, ride
// metrics, and the multi-scenario comparison harness.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "susplab/dynamics.hpp"
#include "susplab/fuzzy.hpp"
#include "susplab/optim.hpp"
#include "susplab/pid.hpp"
#include "susplab/road.hpp"

namespace susplab::sim {

enum class SimMode { active, semi_active_zero, semi_active_fuzzy_pid };

const char* sim_mode_name(SimMode mode);
std::optional<SimMode> sim_mode_from_name(std::string_view name);

/// How the PID output reaches the plant: added to the fuzzy command before
/// the damper clamp (default), or routed as an unconstrained parallel force
/// for sensitivity studies.
enum class PidRouting { clamped_sum, parallel_force };

struct SimConfig {
    double dt = 0.001;
    double duration = 10.0;
    double velocity = 20.0;  ///< vehicle speed (m/s); 72 km/h
    SimMode mode = SimMode::semi_active_fuzzy_pid;
    bool equilibrium_start = true;
    double settle_skip = 1.0;  ///< metrics ignore t <= settle_skip
    PidRouting pid_routing = PidRouting::clamped_sum;
    dynamics::DynamicsOptions dynamics{};
    /// Optional explicit start state (overrides equilibrium_start).
    std::optional<dynamics::VehicleState> initial_state;

    void validate() const;
};

struct TimeSeries {
    std::vector<double> time;
    std::vector<double> z_s, z_u, v_s, v_u;
    std::vector<double> a_s;
    std::vector<double> distortion;  ///< z_s - z_u
    std::vector<double> tire_load;
    std::vector<double> f_d;  ///< commanded damper force

    std::size_t size() const { return time.size(); }
};

struct Metrics {
    double peak_accel = 0.0;
    double rms_accel = 0.0;
    double peak_distortion = 0.0;
    double rms_distortion = 0.0;
    double tire_load_min = 0.0;
    double tire_load_max = 0.0;
};

/// Fixed-step RK4 on the plant with a zero-order-hold controller updated at
/// every sample. The fuzzy system reads the current sprung velocity and
/// distortion plus the previous sample's computed acceleration; the PID acts
/// on the distortion error against a zero setpoint. Road elevation is
/// linearly interpolated between profile samples.
/// `fuzzy_sys` and `gains` may be null except in the fuzzy-PID mode.
/// `pid_output` (optional) receives the raw PID command per sample.
/// Throws std::runtime_error when any state component passes 1e6.
TimeSeries integrate_closed_loop(const dynamics::SuspensionParams& params,
                                 const fuzzy::FuzzySystem* fuzzy_sys,
                                 const pid::PidGains* gains,
                                 const road::RoadProfile& road_profile,
                                 const SimConfig& cfg,
                                 std::vector<double>* pid_output = nullptr);

/// Peak (max |.|) and RMS statistics over t > settle_skip; tire-load extremes
/// stay signed. Throws std::invalid_argument when no samples remain.
Metrics compute_metrics(const TimeSeries& ts, double settle_skip);

/// Judgment-functional objective over PID gains for the tuners: simulates the
/// fuzzy-PID loop on the given road and scores error against effort. A
/// diverging candidate scores +infinity.
optim::Objective make_tuning_objective(const dynamics::SuspensionParams& params,
                                       const fuzzy::FuzzySystem& fuzzy_sys,
                                       const road::RoadProfile& tuning_road,
                                       const SimConfig& tune_cfg,
                                       const pid::JudgmentWeights& weights,
                                       pid::OvershootBranch branch);

/// Proportional-only distortion loop used by the Ziegler-Nichols experiment:
/// flat road, start offset from equilibrium, the control force routed as an
/// unconstrained parallel force, error measured about the equilibrium
/// distortion. Returns the distortion samples.
std::vector<double> zn_distortion_response(
    const dynamics::SuspensionParams& params, double kp, double dt,
    double duration, const dynamics::DynamicsOptions& opts = {},
    double initial_offset = 0.005);

enum class TunerKind { none, zn, foa, ga, pso, bfo, cfoa };

const char* tuner_name(TunerKind tuner);
std::optional<TunerKind> tuner_from_name(std::string_view name);

struct Scenario {
    std::string label;
    SimMode mode = SimMode::semi_active_fuzzy_pid;
    TunerKind tuner = TunerKind::none;
};

struct TuningSetup {
    pid::JudgmentWeights weights{};
    pid::OvershootBranch branch = pid::OvershootBranch::standard;
    double tune_duration = 4.0;
    double tune_dt = 0.001;
    long budget = 312;  ///< objective evaluations per metaheuristic tuner
    optim::CfoaConfig cfoa{};
    optim::BaselineOptions baseline{};
    optim::ZnOptions zn{};
    double zn_duration = 8.0;
    pid::PidGains fixed_gains{100.0, 10.0, 1.0};  ///< untuned fuzzy-PID rows
};

struct ScenarioResult {
    std::string label;
    bool ok = false;
    std::string error;
    SimMode mode = SimMode::semi_active_fuzzy_pid;
    TunerKind tuner = TunerKind::none;
    pid::PidGains gains{0.0, 0.0, 0.0};
    Metrics metrics{};
    TimeSeries series;
    optim::OptResult opt;  ///< populated for metaheuristic tuners
    bool has_opt = false;
    double zn_ultimate_gain = 0.0;
    double zn_ultimate_period = 0.0;
};

struct ComparisonTable {
    std::vector<ScenarioResult> rows;
    std::string reference_label;
    double settle_skip = 0.0;
    std::uint64_t road_seed = 0;
};

/// Runs every scenario against one shared road realization: tunes where a
/// tuner is named, simulates, computes metrics. A failing tuner or simulation
/// marks its row failed without aborting the others. Throws
/// std::invalid_argument when fewer than 2 scenarios are given or the
/// reference label is not in the list.
ComparisonTable run_comparison(const std::vector<Scenario>& scenarios,
                               const std::string& reference_label,
                               const dynamics::SuspensionParams& params,
                               const fuzzy::FuzzySystem& fuzzy_sys,
                               const road::RoadSpec& road_spec,
                               std::uint64_t road_seed, const SimConfig& sim_cfg,
                               const TuningSetup& tuning);

/// Aligned-text rendering with percentage deltas against the reference row.
std::string render_comparison(const ComparisonTable& table);

/// CSV: one row per scenario, metric columns plus deltas.
void comparison_to_csv(const ComparisonTable& table, std::ostream& out);

/// Multi-column CSV with a header row.
void write_csv(const TimeSeries& ts, std::ostream& out);
void write_csv(const Metrics& metrics, double settle_skip, std::ostream& out);

}  // namespace susplab::sim
