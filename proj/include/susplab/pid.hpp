// Discrete PID on the suspension distortion and the judgment functional that
// scores a closed-loop run for the gain tuners.
#pragma once

#include <span>

namespace susplab::pid {

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;

    /// Throws std::invalid_argument unless all three gains are > 0.
    void validate() const;
};

/// Controller memory carried between samples.
struct PidState {
    double integral = 0.0;
    double prev_error = 0.0;
    bool primed = false;  ///< the derivative term is 0 until the first sample
};

struct PidOutput {
    double u = 0.0;
    PidState state;
};

/// One controller update: backward-Euler integral, backward-difference
/// derivative (0 on the first sample). Throws std::invalid_argument for
/// dt <= 0.
PidOutput pid_step(const PidGains& gains, PidState state, double e, double dt);

/// Which side of the cost carries the overshoot penalty. `standard` charges
/// w4 while the output overshoots the reference; `as_printed` keeps the
/// source text's reversed branch order.
enum class OvershootBranch { standard, as_printed };

struct JudgmentWeights {
    double w1 = 0.999;    ///< absolute-error weight
    double w2 = 0.001;    ///< squared-effort weight
    double w3 = 2.0;      ///< rise-time weight
    double w4 = 100.0;    ///< overshoot weight
    double horizon = 4.0; ///< tuning-run duration (s)

    void validate() const;
};

struct JudgmentResult {
    double j = 0.0;
    double t_p = 0.0;            ///< first reference crossing, or the series end
    double overshoot_peak = 0.0; ///< largest excursion beyond the reference
};

/// J = sum((w1|e| + w2 u^2) dt) + w3 t_p, plus sum(w4 |e_overshoot| dt) on the
/// branch selected above. Overshoot is the excursion past the reference in
/// the direction opposite the initial error. Throws std::invalid_argument on
/// mismatched series lengths or empty input.
JudgmentResult judgment(std::span<const double> e_series,
                        std::span<const double> u_series, double dt,
                        const JudgmentWeights& weights, double reference = 0.0,
                        OvershootBranch branch = OvershootBranch::standard);

}  // namespace susplab::pid
