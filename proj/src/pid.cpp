#include "susplab/pid.hpp"

#include <cmath>
#include <stdexcept>

namespace susplab::pid {

void PidGains::validate() const {
    if (!(kp > 0.0) || !(ki > 0.0) || !(kd > 0.0)) {
        throw std::invalid_argument("PID gains must satisfy kp, ki, kd > 0");
    }
}

void JudgmentWeights::validate() const {
    if (!(w1 >= 0.0) || !(w2 >= 0.0) || !(w3 >= 0.0) || !(w4 >= 0.0)) {
        throw std::invalid_argument("judgment weights must be >= 0");
    }
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("judgment horizon must be > 0");
    }
}

PidOutput pid_step(const PidGains& gains, PidState state, double e, double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("pid_step requires dt > 0");
    }
    state.integral += e * dt;
    const double deriv = state.primed ? (e - state.prev_error) / dt : 0.0;
    state.prev_error = e;
    state.primed = true;
    const double u = gains.kp * e + gains.ki * state.integral + gains.kd * deriv;
    return {u, state};
}

JudgmentResult judgment(std::span<const double> e_series,
                        std::span<const double> u_series, double dt,
                        const JudgmentWeights& weights, double /*reference*/,
                        OvershootBranch branch) {
    if (e_series.size() != u_series.size()) {
        throw std::invalid_argument("judgment series lengths differ");
    }
    if (e_series.empty()) {
        throw std::invalid_argument("judgment requires at least one sample");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("judgment requires dt > 0");
    }
    weights.validate();

    const std::size_t n = e_series.size();

    // Approach direction: sign of the first nonzero error sample.
    double s0 = 0.0;
    for (const double e : e_series) {
        if (e != 0.0) {
            s0 = (e > 0.0) ? 1.0 : -1.0;
            break;
        }
    }

    // Rise time: first sample at or beyond the reference.
    double t_p = static_cast<double>(n) * dt;
    for (std::size_t i = 0; i < n; ++i) {
        if (e_series[i] * s0 <= 0.0) {
            t_p = static_cast<double>(i) * dt;
            break;
        }
    }

    double j = 0.0;
    double overshoot_peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = e_series[i];
        const double u = u_series[i];
        // Signed excursion beyond the reference (positive = overshoot).
        const double excursion = -s0 * e;
        if (excursion > overshoot_peak) overshoot_peak = excursion;

        double integrand = weights.w1 * std::abs(e) + weights.w2 * u * u;
        if (branch == OvershootBranch::standard) {
            if (excursion > 0.0) integrand += weights.w4 * excursion;
        } else {
            // Printed branch order: w4 applies while the excursion is not
            // positive, charging the distance below the reference instead.
            if (!(excursion > 0.0)) integrand += weights.w4 * std::abs(excursion);
        }
        j += integrand * dt;
    }
    j += weights.w3 * t_p;

    return {j, t_p, overshoot_peak};
}

}  // namespace susplab::pid
