#include "susplab/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace susplab::dynamics {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "non-finite " << what << " (" << v << ") in derivative evaluation";
        throw std::runtime_error(msg.str());
    }
}

// Newton iteration on a scalar cubic a*x + b*x^2 + c*x^3 = target.
double solve_cubic(double a, double b, double c, double target, double x0) {
    double x = x0;
    for (int it = 0; it < 200; ++it) {
        const double f = a * x + b * x * x + c * x * x * x - target;
        const double df = a + 2.0 * b * x + 3.0 * c * x * x;
        if (df == 0.0) break;
        const double step = f / df;
        x -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
    }
    return x;
}

}  // namespace

void SuspensionParams::validate() const {
    auto non_negative = [](double v, const char* name) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument(std::string("suspension parameter ") + name +
                                        " must be >= 0");
        }
    };
    if (!(m_s > 0.0) || !(m_u > 0.0)) {
        throw std::invalid_argument("masses m_s and m_u must be > 0");
    }
    non_negative(g, "g");
    non_negative(k11, "k11");
    non_negative(k12, "k12");
    non_negative(k13, "k13");
    non_negative(k21, "k21");
    non_negative(k22, "k22");
    non_negative(c_o, "c_o");
    non_negative(c_s, "c_s");
    non_negative(c_i, "c_i");
    non_negative(k_s, "k_s");
    non_negative(k_m, "k_m");
    non_negative(b_s, "b_s");
    non_negative(b_u, "b_u");
    if (!(0.0 <= f_min && f_min <= f_max)) {
        throw std::invalid_argument("damper bounds must satisfy 0 <= f_min <= f_max");
    }
}

double tire_force(const SuspensionParams& p, double z_u, double z_g) {
    const double d = z_u - z_g;
    return p.k11 * d + p.k12 * d * d - p.k13 * d * d * d;
}

double spring_force(const SuspensionParams& p, double z_s, double z_u) {
    const double d = z_s - z_u;
    return p.k21 * d + p.k22 * d * d * d;
}

double shock_force(const SuspensionParams& p, double rel_vel, double rel_disp,
                   double f_d) {
    if (!(f_d >= p.f_min && f_d <= p.f_max)) {
        std::ostringstream msg;
        msg << "damper command f_d = " << f_d << " outside [" << p.f_min << ", "
            << p.f_max << "]";
        throw std::invalid_argument(msg.str());
    }
    return p.c_s * rel_vel + p.c_i * rel_disp +
           f_d * std::tanh(p.k_s * rel_vel + p.k_m * rel_disp);
}

double actuator_force(const SuspensionParams& p, double v_s, double v_u) {
    return -p.b_s * v_s + p.b_u * v_u;
}

StateDerivative derivatives(const SuspensionParams& p, const VehicleState& s,
                            double z_g, double /*zg_vel*/, Mode mode, double f_d,
                            const DynamicsOptions& opts, double parallel_force,
                            ForceBreakdown* forces) {
    const double rel_vel = s.v_s - s.v_u;
    const double rel_disp = s.z_s - s.z_u;

    const double f_tire = tire_force(p, s.z_u, z_g);
    double f_spring = p.k21 * rel_disp;
    if (opts.spring_cubic == SpringCubic::suspension_travel) {
        f_spring += p.k22 * rel_disp * rel_disp * rel_disp;
    } else {
        const double d = s.z_u - z_g;
        f_spring += p.k22 * d * d * d;
    }

    double a_s, a_u;
    if (mode == Mode::active) {
        const double f_act = actuator_force(p, s.v_s, s.v_u);
        require_finite(f_tire, "tire force");
        require_finite(f_spring, "spring force");
        require_finite(f_act, "actuator force");
        if (opts.signs == CouplingSigns::as_printed) {
            a_s = (-f_spring - f_act + p.c_o * rel_vel - parallel_force) / p.m_s - p.g;
            a_u = (f_spring + f_act - f_tire + parallel_force) / p.m_u - p.g;
        } else {
            a_s = (-f_spring + f_act - p.c_o * rel_vel - parallel_force) / p.m_s - p.g;
            a_u = (f_spring - f_act - f_tire + parallel_force) / p.m_u - p.g;
        }
        if (forces) *forces = {f_tire, f_spring, f_act};
    } else {
        const double f_shock = shock_force(p, rel_vel, rel_disp, f_d);
        require_finite(f_tire, "tire force");
        require_finite(f_spring, "spring force");
        require_finite(f_shock, "shock force");
        if (opts.signs == CouplingSigns::as_printed) {
            a_s = (-f_spring - f_shock + p.c_o * rel_vel - parallel_force) / p.m_s - p.g;
            a_u = (f_spring + f_shock - f_tire - p.c_o * rel_vel + parallel_force) /
                      p.m_u - p.g;
        } else {
            a_s = (-f_spring - f_shock - p.c_o * rel_vel - parallel_force) / p.m_s - p.g;
            a_u = (f_spring + f_shock - f_tire + p.c_o * rel_vel + parallel_force) /
                      p.m_u - p.g;
        }
        if (forces) *forces = {f_tire, f_spring, f_shock};
    }
    require_finite(a_s, "sprung acceleration");
    require_finite(a_u, "unsprung acceleration");
    return {s.v_s, a_s, s.v_u, a_u};
}

VehicleState static_equilibrium(const SuspensionParams& p, Mode mode,
                                const DynamicsOptions& opts) {
    // Unsprung balance: tire force carries the whole weight regardless of mode.
    const double tire_target = -(p.m_s + p.m_u) * p.g;
    const double delta =
        solve_cubic(p.k11, p.k12, -p.k13, tire_target, tire_target / p.k11);

    // Sprung balance with zero velocities and f_d = 0. The displacement term
    // c_i of the damper acts only in the semi-active configuration.
    const double ci = (mode == Mode::semi_active) ? p.c_i : 0.0;
    const double spring_target = -p.m_s * p.g;
    double travel;
    if (opts.spring_cubic == SpringCubic::suspension_travel) {
        travel = solve_cubic(p.k21 + ci, 0.0, p.k22, spring_target,
                             spring_target / (p.k21 + ci));
    } else {
        // Cubic term depends on the (already solved) tire deflection.
        travel = (spring_target - p.k22 * delta * delta * delta) / (p.k21 + ci);
    }

    VehicleState s;
    s.z_u = delta;
    s.z_s = delta + travel;
    s.v_s = 0.0;
    s.v_u = 0.0;
    return s;
}

const char* mode_name(Mode mode) {
    return mode == Mode::active ? "active" : "semi_active";
}

}  // namespace susplab::dynamics
