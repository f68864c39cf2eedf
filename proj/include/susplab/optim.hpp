// Gain tuners: the chaotic fruit-fly optimizer, swarm/evolutionary baselines
// running on the same evaluation budget, and Ziegler-Nichols ultimate-gain
// tuning.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "susplab/pid.hpp"

namespace susplab::optim {

/// Swarm coordinates; one axis per PID gain.
struct FlyLocation {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// One logistic-map step mu*c*(1-c). Throws std::invalid_argument unless
/// 0 < c < 1.
double logistic_step(double c, double mu = 4.0);

/// Location update x' = x + s*balance + r*(1-s)*chaos applied per axis.
FlyLocation chaotic_update(const FlyLocation& loc,
                           const std::array<double, 3>& balance_step,
                           const std::array<double, 3>& chaos_step, double r,
                           double s);

/// Smell concentration 1/D + D*(0.5 - beta) with D the distance to the
/// origin. Throws std::invalid_argument at zero distance.
double smell_concentration(const FlyLocation& loc, double beta);

enum class BetaMode { per_iteration, fixed };

/// Source of the per-fly location step: the logistic chaos stream or a plain
/// uniform stream. With `plain` and s = 0 the engine is the baseline
/// fruit-fly optimizer.
enum class StepStream { chaotic, plain };

struct CfoaConfig {
    int pop_size = 30;
    int max_iter = 200;
    double s = 0.7;              ///< balance parameter in [0, 1]
    double logistic_mu = 4.0;
    double search_radius = 1.0;  ///< initial location scale per axis
    double radius_decay = 0.95;  ///< per-iteration step-scale multiplier
    BetaMode beta_mode = BetaMode::per_iteration;
    double beta = 0.5;           ///< used when beta_mode == fixed
    StepStream step_stream = StepStream::chaotic;
    std::uint64_t seed = 0;
    std::array<double, 3> gain_range = {1.0, 1.0, 1.0};

    void validate() const;
};

struct OptResult {
    pid::PidGains best_gains{};
    double best_score = 0.0;
    std::vector<double> history;        ///< best-so-far score per iteration
    std::vector<double> smell_history;  ///< smell concentration of the best fly
    long evals = 0;
};

using Objective = std::function<double(const pid::PidGains&)>;

/// Minimizes the objective over positive gains. Candidate locations map to
/// gains as (|x|, |y|, |z|) scaled by gain_range; candidates that violate the
/// positivity constraint are resampled. Deterministic for a fixed config.
/// Throws std::runtime_error when the objective returns NaN on the initial
/// swarm.
OptResult cfoa_minimize(const Objective& objective, const CfoaConfig& cfg);

enum class BaselineMethod { foa, ga, pso, bfo };

const char* baseline_name(BaselineMethod method);
std::optional<BaselineMethod> baseline_from_name(std::string_view name);

struct BaselineOptions {
    int pop_size = 30;
    double search_radius = 1.0;
    double radius_decay = 0.95;  ///< FOA shares the fruit-fly engine schedule
    std::array<double, 3> gain_range = {1.0, 1.0, 1.0};
};

/// Baseline optimizers consuming exactly `budget` objective evaluations (or
/// fewer when a loop boundary lands short). FOA runs the fruit-fly engine
/// with s = 0 and plain steps; GA is tournament selection with blend
/// crossover and Gaussian mutation; PSO is global-best with inertia; BFO is
/// chemotaxis/reproduction/elimination-dispersal.
OptResult baseline_minimize(BaselineMethod method, const Objective& objective,
                            long budget, std::uint64_t seed,
                            const BaselineOptions& opts = {});

struct ZnOptions {
    double kp_init = 0.5;
    double kp_max = 1e8;
    int bisect_iters = 40;
    double envelope_slope_tol = 0.02;  ///< log-amplitude slope classed as flat
};

struct ZnResult {
    pid::PidGains gains{};
    double ultimate_gain = 0.0;
    double ultimate_period = 0.0;
};

/// Classic Ziegler-Nichols: finds the ultimate proportional gain by a
/// doubling ladder plus geometric bisection on the closed loop's peak
/// envelope, measures the ultimate period from peak spacing, and returns
/// kp = 0.6 Ku, ki = 2 kp / Tu, kd = kp Tu / 8.
/// `closed_loop` simulates the proportional-only loop at gain kp and returns
/// the sampled plant output. Throws std::runtime_error when no sustained
/// oscillation exists below kp_max.
ZnResult zn_tune(const std::function<std::vector<double>(double)>& closed_loop,
                 double dt, const ZnOptions& opts = {});

}  // namespace susplab::optim
