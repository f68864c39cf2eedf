// Quarter-car plant: nonlinear tire/spring forces, the variable damper with
// its dissipative force bound, the skyhook actuator, and the state
// derivatives for the active and semi-active configurations.
#pragma once

#include <string>

namespace susplab::dynamics {

/// Physical constants of the quarter-car model. Defaults are the nominal
/// parameter set used throughout the tests and the CLI.
struct SuspensionParams {
    double m_s = 36.0;      ///< sprung mass (kg)
    double m_u = 240.0;     ///< unsprung mass (kg)
    double g = 9.81;        ///< gravitational acceleration (m/s^2)
    double k11 = 60063.0;   ///< tire stiffness, linear (N/m)
    double k12 = 42509.0;   ///< tire stiffness, quadratic (N/m^2)
    double k13 = 22875.0;   ///< tire stiffness, cubic (N/m^3)
    double k21 = 15302.0;   ///< suspension stiffness, linear (N/m)
    double k22 = 2728.0;    ///< suspension stiffness, cubic (N/m^3)
    double c_o = 1400.0;    ///< sprung/unsprung coupling damper (N*s/m)
    double c_s = 620.79;    ///< variable-damper velocity coefficient (N*s/m)
    double c_i = 810.78;    ///< variable-damper displacement coefficient (N/m)
    double k_s = 10.54;     ///< tanh velocity scale (s/m)
    double k_m = 13.76;     ///< tanh displacement scale (1/m)
    double f_min = 0.0;     ///< lower damper-force bound (N)
    double f_max = 350.0;   ///< upper damper-force bound (N)
    double b_s = 1335.0;    ///< skyhook sprung coefficient (N*s/m)
    double b_u = 2607.0;    ///< skyhook unsprung coefficient (N*s/m)

    /// Throws std::invalid_argument when a coefficient is negative, a mass is
    /// non-positive, or the damper bounds are out of order.
    void validate() const;
};

/// Plant state: positions and velocities of the sprung and unsprung masses.
struct VehicleState {
    double z_s = 0.0;  ///< sprung position (m)
    double v_s = 0.0;  ///< sprung velocity (m/s)
    double z_u = 0.0;  ///< unsprung position (m)
    double v_u = 0.0;  ///< unsprung velocity (m/s)
};

/// Time derivative of VehicleState: (v_s, a_s, v_u, a_u).
using StateDerivative = VehicleState;

/// Individual force terms of one derivative evaluation (diagnostics).
struct ForceBreakdown {
    double f_tire = 0.0;
    double f_spring = 0.0;
    double f_damper = 0.0;  ///< shock force (semi-active) or actuator force (active)
};

enum class Mode { active, semi_active };

/// Argument of the suspension spring's cubic term. The source equations print
/// the tire deflection (z_u - z_g) inside the spring law; the default uses the
/// suspension travel (z_s - z_u), consistent with the damper law and standard
/// nonlinear-spring models. The printed form stays selectable for sensitivity
/// studies.
enum class SpringCubic { suspension_travel, tire_deflection };

/// Orientation of the c_o coupling term and of the actuator force in the
/// equations of motion. The printed orientation feeds energy into the
/// relative-velocity mode (growth rate ~ (c_o - c_s)(1/m_s + 1/m_u) with the
/// nominal constants) and both plants diverge within a second of simulated
/// time; `dissipative` flips those couplings into the damping orientation.
enum class CouplingSigns { dissipative, as_printed };

struct DynamicsOptions {
    SpringCubic spring_cubic = SpringCubic::suspension_travel;
    CouplingSigns signs = CouplingSigns::dissipative;
};

/// Tire contact force k11*d + k12*d^2 - k13*d^3 with d = z_u - z_g.
double tire_force(const SuspensionParams& p, double z_u, double z_g);

/// Suspension spring force k21*d + k22*d^3 with d = z_s - z_u.
double spring_force(const SuspensionParams& p, double z_s, double z_u);

/// Semi-active damper force
///   c_s*rel_vel + c_i*rel_disp + f_d*tanh(k_s*rel_vel + k_m*rel_disp).
/// Throws std::invalid_argument when f_d violates [f_min, f_max].
double shock_force(const SuspensionParams& p, double rel_vel, double rel_disp,
                   double f_d);

/// Skyhook actuator force -b_s*v_s + b_u*v_u.
double actuator_force(const SuspensionParams& p, double v_s, double v_u);

/// State derivative of the selected configuration.
///
/// `f_d` is the commanded damper force; it must lie in [f_min, f_max] for the
/// semi-active mode and is ignored in the active mode. `zg_vel` is the road
/// elevation rate; the printed force laws do not use it, the parameter exists
/// so callers with richer road models keep a stable signature.
/// `parallel_force` is an optional extra force applied across the two masses
/// (positive pushes the sprung mass down) used by the unconstrained PID
/// routing mode. Throws std::runtime_error when any force term is NaN/Inf and
/// std::invalid_argument on an out-of-bound f_d.
StateDerivative derivatives(const SuspensionParams& p, const VehicleState& s,
                            double z_g, double zg_vel, Mode mode, double f_d,
                            const DynamicsOptions& opts = {},
                            double parallel_force = 0.0,
                            ForceBreakdown* forces = nullptr);

/// Static equilibrium on flat ground (z_g = 0) with zero damper command:
/// gravity balanced by tire and spring deflection. Velocities are zero and
/// the residual accelerations are below 1e-10 m/s^2.
VehicleState static_equilibrium(const SuspensionParams& p, Mode mode,
                                const DynamicsOptions& opts = {});

const char* mode_name(Mode mode);

}  // namespace susplab::dynamics
