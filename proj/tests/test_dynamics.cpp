#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <random>

#include "susplab/dynamics.hpp"
#include "susplab/rng.hpp"

using namespace susplab;
using dynamics::DynamicsOptions;
using dynamics::Mode;
using dynamics::SuspensionParams;
using dynamics::VehicleState;

namespace {

// Independent Horner-form evaluations of the two force polynomials.
double tire_horner(const SuspensionParams& p, double d) {
    return ((-p.k13 * d + p.k12) * d + p.k11) * d;
}
double spring_horner(const SuspensionParams& p, double d) {
    return (p.k22 * d * d + p.k21) * d;
}

double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-30});
    return std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("suspension parameter defaults and validation") {
    SuspensionParams p;
    CHECK(p.m_s == 36.0);
    CHECK(p.m_u == 240.0);
    CHECK(p.k11 == 60063.0);
    CHECK(p.k12 == 42509.0);
    CHECK(p.k13 == 22875.0);
    CHECK(p.k21 == 15302.0);
    CHECK(p.k22 == 2728.0);
    CHECK(p.c_o == 1400.0);
    CHECK(p.c_s == 620.79);
    CHECK(p.c_i == 810.78);
    CHECK(p.k_s == 10.54);
    CHECK(p.k_m == 13.76);
    CHECK(p.f_min == 0.0);
    CHECK(p.f_max == 350.0);
    CHECK(p.b_s == 1335.0);
    CHECK(p.b_u == 2607.0);
    CHECK(p.g == 9.81);
    CHECK_NOTHROW(p.validate());

    SuspensionParams bad = p;
    bad.k11 = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.f_min = 10.0;
    bad.f_max = 5.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.m_s = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("tire force evaluates the printed polynomial") {
    SuspensionParams p;
    CHECK(dynamics::tire_force(p, 0.0, 0.0) == 0.0);
    CHECK(dynamics::tire_force(p, 0.01, 0.0) ==
          doctest::Approx(604.858025).epsilon(1e-12));
    CHECK(dynamics::tire_force(p, -0.01, 0.0) ==
          doctest::Approx(-596.356225).epsilon(1e-12));
}

TEST_CASE("spring force evaluates the decided cubic") {
    SuspensionParams p;
    CHECK(dynamics::spring_force(p, 0.0, 0.0) == 0.0);
    CHECK(dynamics::spring_force(p, 0.1, 0.0) ==
          doctest::Approx(1532.928).epsilon(1e-12));
}

TEST_CASE("force polynomials match an independent Horner oracle") {
    SuspensionParams p;
    std::mt19937_64 gen(42);
    for (int i = 0; i < 10000; ++i) {
        const double d = rng::uniform(gen, -0.5, 0.5);
        CHECK(rel_err(dynamics::tire_force(p, d, 0.0), tire_horner(p, d)) < 1e-12);
        CHECK(rel_err(dynamics::spring_force(p, d, 0.0), spring_horner(p, d)) <
              1e-12);
    }
}

TEST_CASE("spring force is odd in the travel") {
    SuspensionParams p;
    std::mt19937_64 gen(7);
    for (int i = 0; i < 200; ++i) {
        const double d = rng::uniform(gen, -0.3, 0.3);
        CHECK(dynamics::spring_force(p, d, 0.0) ==
              doctest::Approx(-dynamics::spring_force(p, -d, 0.0)).epsilon(1e-12));
    }
}

TEST_CASE("shock force: value, tanh bound, and command validation") {
    SuspensionParams p;
    CHECK(dynamics::shock_force(p, 0.1, 0.0, 0.0) ==
          doctest::Approx(62.079).epsilon(1e-12));
    CHECK(dynamics::shock_force(p, 0.0, 0.0, 350.0) == 0.0);

    std::mt19937_64 gen(3);
    for (int i = 0; i < 500; ++i) {
        const double v = rng::uniform(gen, -2.0, 2.0);
        const double d = rng::uniform(gen, -0.5, 0.5);
        const double f_d = rng::uniform(gen, 0.0, 350.0);
        const double with = dynamics::shock_force(p, v, d, f_d);
        const double without = dynamics::shock_force(p, v, d, 0.0);
        CHECK(std::abs(with - without) <= f_d * (1.0 + 1e-12));
        CHECK(std::abs(with) <=
              p.c_s * std::abs(v) + p.c_i * std::abs(d) + p.f_max + 1e-9);
    }

    CHECK_THROWS_AS(dynamics::shock_force(p, 0.0, 0.0, -1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(dynamics::shock_force(p, 0.0, 0.0, 350.0 + 1e-6),
                    std::invalid_argument);
}

TEST_CASE("actuator force uses the skyhook coefficients") {
    SuspensionParams p;
    CHECK(dynamics::actuator_force(p, 0.0, 0.0) == 0.0);
    CHECK(dynamics::actuator_force(p, 1.0, 0.0) == doctest::Approx(-1335.0));
    CHECK(dynamics::actuator_force(p, 0.0, 1.0) == doctest::Approx(2607.0));
}

TEST_CASE("derivatives: gravity-only state and kinematic identity") {
    SuspensionParams p;
    VehicleState zero;
    const auto d =
        dynamics::derivatives(p, zero, 0.0, 0.0, Mode::semi_active, 0.0);
    CHECK(d.v_s == doctest::Approx(-p.g).epsilon(1e-15));
    CHECK(d.v_u == doctest::Approx(-p.g).epsilon(1e-15));

    std::mt19937_64 gen(11);
    for (int i = 0; i < 200; ++i) {
        VehicleState s{rng::uniform(gen, -0.2, 0.2), rng::uniform(gen, -2.0, 2.0),
                       rng::uniform(gen, -0.2, 0.2), rng::uniform(gen, -2.0, 2.0)};
        const double f_d = rng::uniform(gen, 0.0, 350.0);
        const auto mode = (i % 2 == 0) ? Mode::active : Mode::semi_active;
        const auto deriv = dynamics::derivatives(p, s, 0.01, 0.0, mode, f_d);
        CHECK(deriv.z_s == s.v_s);
        CHECK(deriv.z_u == s.v_u);
    }
}

TEST_CASE("semi-active with zeroed damper terms degenerates to the active plant") {
    SuspensionParams p;
    p.c_i = 0.0;
    p.c_s = 0.0;
    SuspensionParams active_p = p;
    active_p.b_s = 0.0;
    active_p.b_u = 0.0;

    std::mt19937_64 gen(5);
    for (int i = 0; i < 100; ++i) {
        VehicleState s{rng::uniform(gen, -0.1, 0.1), rng::uniform(gen, -1.0, 1.0),
                       rng::uniform(gen, -0.1, 0.1), rng::uniform(gen, -1.0, 1.0)};
        const double z_g = rng::uniform(gen, -0.05, 0.05);
        const auto semi =
            dynamics::derivatives(p, s, z_g, 0.0, Mode::semi_active, 0.0);
        const auto act =
            dynamics::derivatives(active_p, s, z_g, 0.0, Mode::active, 0.0);
        CHECK(semi.v_s == doctest::Approx(act.v_s).epsilon(1e-12));
        // The unsprung equation differs by the c_o coupling term only.
        const double extra = p.c_o * (s.v_s - s.v_u) / p.m_u;
        CHECK(semi.v_u == doctest::Approx(act.v_u + extra).epsilon(1e-9));
    }
}

TEST_CASE("derivatives is pure: equal inputs give bitwise-equal outputs") {
    SuspensionParams p;
    VehicleState s{0.02, -0.4, -0.01, 0.3};
    const auto a = dynamics::derivatives(p, s, 0.004, 0.0, Mode::semi_active, 120.0);
    const auto b = dynamics::derivatives(p, s, 0.004, 0.0, Mode::semi_active, 120.0);
    CHECK(a.z_s == b.z_s);
    CHECK(a.v_s == b.v_s);
    CHECK(a.z_u == b.z_u);
    CHECK(a.v_u == b.v_u);
}

TEST_CASE("derivatives rejects non-finite force inputs") {
    SuspensionParams p;
    VehicleState s;
    s.z_s = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(dynamics::derivatives(p, s, 0.0, 0.0, Mode::semi_active, 0.0),
                    std::runtime_error);
    VehicleState ok;
    CHECK_THROWS_AS(dynamics::derivatives(p, ok, 0.0, 0.0, Mode::semi_active, 400.0),
                    std::invalid_argument);
}

TEST_CASE("static equilibrium zeroes the accelerations") {
    SuspensionParams p;
    for (const auto mode : {Mode::active, Mode::semi_active}) {
        for (const auto cubic : {dynamics::SpringCubic::suspension_travel,
                                 dynamics::SpringCubic::tire_deflection}) {
            DynamicsOptions opts;
            opts.spring_cubic = cubic;
            const VehicleState eq = dynamics::static_equilibrium(p, mode, opts);
            const auto d = dynamics::derivatives(p, eq, 0.0, 0.0, mode, 0.0, opts);
            CHECK(std::abs(d.v_s) < 1e-9);
            CHECK(std::abs(d.v_u) < 1e-9);
            CHECK(d.z_s == 0.0);
            CHECK(d.z_u == 0.0);
        }
    }
}

TEST_CASE("printed coupling signs feed energy into the relative mode") {
    SuspensionParams p;
    DynamicsOptions printed;
    printed.signs = dynamics::CouplingSigns::as_printed;

    // Relative-velocity perturbation about equilibrium; the printed
    // orientation must push it harder apart, the dissipative one must damp.
    VehicleState s = dynamics::static_equilibrium(p, Mode::semi_active);
    s.v_s = 0.1;
    s.v_u = -0.1;
    const auto printed_d =
        dynamics::derivatives(p, s, 0.0, 0.0, Mode::semi_active, 0.0, printed);
    const auto dissip_d =
        dynamics::derivatives(p, s, 0.0, 0.0, Mode::semi_active, 0.0);
    const double rel_acc_printed = printed_d.v_s - printed_d.v_u;
    const double rel_acc_dissip = dissip_d.v_s - dissip_d.v_u;
    CHECK(rel_acc_printed > 0.0);  // grows the relative velocity
    CHECK(rel_acc_dissip < 0.0);   // damps it
}
