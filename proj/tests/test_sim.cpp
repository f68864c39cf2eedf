#include <doctest.h>

#include <stdexcept>

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "susplab/sim.hpp"

using namespace susplab;
using dynamics::SuspensionParams;
using dynamics::VehicleState;
using road::RoadProfile;
using road::RoadSpec;
using sim::SimConfig;
using sim::SimMode;
using sim::TimeSeries;

namespace {

RoadProfile flat_road(double duration) {
    RoadProfile p;
    p.dt = duration;
    p.velocity = 20.0;
    p.samples = {0.0, 0.0};
    return p;
}

RoadProfile rough_road(std::uint64_t seed, double dt, double duration) {
    RoadSpec spec;
    spec.seed = seed;
    return road::generate_profile(spec, 20.0, dt, duration);
}

// ---- linear 2-DOF oracle: exact solution via the matrix exponential ----

using Mat4 = std::array<std::array<double, 4>, 4>;
using Vec4 = std::array<double, 4>;

Mat4 matmul(const Mat4& a, const Mat4& b) {
    Mat4 c{};
    for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 4; ++k) {
            for (int j = 0; j < 4; ++j) {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    return c;
}

Vec4 matvec(const Mat4& a, const Vec4& x) {
    Vec4 y{};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) y[i] += a[i][j] * x[j];
    }
    return y;
}

// Scaling-and-squaring Taylor series; the scaled norm is tiny so the series
// converges to machine precision.
Mat4 expm(Mat4 a, double t) {
    for (auto& row : a) {
        for (double& v : row) v *= t;
    }
    double norm = 0.0;
    for (const auto& row : a) {
        double s = 0.0;
        for (const double v : row) s += std::abs(v);
        norm = std::max(norm, s);
    }
    int squarings = 0;
    while (norm > 0.25) {
        norm *= 0.5;
        ++squarings;
    }
    const double scale = std::pow(0.5, squarings);
    for (auto& row : a) {
        for (double& v : row) v *= scale;
    }
    Mat4 result{};
    for (int i = 0; i < 4; ++i) result[i][i] = 1.0;
    Mat4 term = result;
    for (int k = 1; k <= 24; ++k) {
        term = matmul(term, a);
        for (auto& row : term) {
            for (double& v : row) v /= static_cast<double>(k);
        }
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) result[i][j] += term[i][j];
        }
    }
    for (int s = 0; s < squarings; ++s) result = matmul(result, result);
    return result;
}

Vec4 solve4(Mat4 a, Vec4 b) {
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    Vec4 x{};
    for (int r = 3; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 4; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

SuspensionParams linear_params() {
    SuspensionParams p;
    p.k12 = 0.0;
    p.k13 = 0.0;
    p.k22 = 0.0;
    p.c_i = 0.0;
    p.c_s = 0.0;
    return p;
}

// State x = (z_s, v_s, z_u, v_u); semi-active linear plant with f_d = 0 on a
// flat road: x' = A x + b.
void linear_system(const SuspensionParams& p, Mat4& a, Vec4& b) {
    a = {};
    a[0][1] = 1.0;
    a[2][3] = 1.0;
    // a_s = (-k21 (z_s - z_u) - c_o (v_s - v_u)) / m_s - g
    a[1][0] = -p.k21 / p.m_s;
    a[1][2] = p.k21 / p.m_s;
    a[1][1] = -p.c_o / p.m_s;
    a[1][3] = p.c_o / p.m_s;
    // a_u = (k21 (z_s - z_u) - k11 z_u + c_o (v_s - v_u)) / m_u - g
    a[3][0] = p.k21 / p.m_u;
    a[3][2] = -(p.k21 + p.k11) / p.m_u;
    a[3][1] = p.c_o / p.m_u;
    a[3][3] = -p.c_o / p.m_u;
    b = {0.0, -p.g, 0.0, -p.g};
}

double rk4_error_vs_exact(const SuspensionParams& p, double dt) {
    Mat4 a;
    Vec4 b;
    linear_system(p, a, b);
    // Equilibrium A x_eq = -b.
    Vec4 neg_b = b;
    for (double& v : neg_b) v = -v;
    const Vec4 x_eq = solve4(a, neg_b);

    VehicleState start{x_eq[0] + 0.05, x_eq[1], x_eq[2], x_eq[3] + 0.2};

    SimConfig cfg;
    cfg.dt = dt;
    cfg.duration = 2.0;
    cfg.mode = SimMode::semi_active_zero;
    cfg.initial_state = start;
    const TimeSeries ts =
        sim::integrate_closed_loop(p, nullptr, nullptr, flat_road(4.0), cfg);

    const Mat4 step = expm(a, dt);
    Vec4 x{start.z_s - x_eq[0], start.v_s - x_eq[1], start.z_u - x_eq[2],
           start.v_u - x_eq[3]};
    double max_err = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double exact_zs = x[0] + x_eq[0];
        const double exact_vs = x[1] + x_eq[1];
        const double exact_zu = x[2] + x_eq[2];
        const double exact_vu = x[3] + x_eq[3];
        max_err = std::max({max_err, std::abs(ts.z_s[i] - exact_zs),
                            std::abs(ts.v_s[i] - exact_vs),
                            std::abs(ts.z_u[i] - exact_zu),
                            std::abs(ts.v_u[i] - exact_vu)});
        x = matvec(step, x);
    }
    return max_err;
}

}  // namespace

TEST_CASE("equilibrium start on a flat road is a fixed point") {
    SuspensionParams p;
    SimConfig cfg;
    cfg.duration = 2.0;
    cfg.mode = SimMode::semi_active_zero;
    const TimeSeries ts =
        sim::integrate_closed_loop(p, nullptr, nullptr, flat_road(4.0), cfg);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        CHECK(std::abs(ts.a_s[i]) < 1e-6);
        CHECK(ts.f_d[i] == 0.0);
    }
}

TEST_CASE("closed-loop integration is bitwise deterministic") {
    SuspensionParams p;
    const fuzzy::FuzzySystem sys = fuzzy::FuzzySystem::make_default();
    const pid::PidGains gains{500.0, 50.0, 5.0};
    const RoadProfile road_profile = rough_road(3, 0.001, 1.0);
    SimConfig cfg;
    cfg.duration = 1.0;
    const TimeSeries a =
        sim::integrate_closed_loop(p, &sys, &gains, road_profile, cfg);
    const TimeSeries b =
        sim::integrate_closed_loop(p, &sys, &gains, road_profile, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.z_s[i] == b.z_s[i]);
        CHECK(a.a_s[i] == b.a_s[i]);
        CHECK(a.f_d[i] == b.f_d[i]);
    }
}

TEST_CASE("RK4 shows fourth-order convergence against the exact solution") {
    const SuspensionParams p = linear_params();
    const double err_coarse = rk4_error_vs_exact(p, 0.002);
    const double err_fine = rk4_error_vs_exact(p, 0.001);
    const double ratio = err_coarse / err_fine;
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
}

TEST_CASE("mechanical energy decays on the dissipative linear passive plant") {
    SuspensionParams p = linear_params();
    p.c_o = 0.0;  // the variable damper's c_s does the damping
    p.c_s = 620.79;

    SimConfig cfg;
    cfg.duration = 3.0;
    cfg.mode = SimMode::semi_active_zero;
    VehicleState start = dynamics::static_equilibrium(
        p, dynamics::Mode::semi_active, cfg.dynamics);
    start.z_s += 0.04;
    start.v_u -= 0.3;
    cfg.initial_state = start;
    const TimeSeries ts =
        sim::integrate_closed_loop(p, nullptr, nullptr, flat_road(6.0), cfg);

    auto energy = [&](std::size_t i) {
        const double d = ts.z_s[i] - ts.z_u[i];
        return 0.5 * p.m_s * ts.v_s[i] * ts.v_s[i] +
               0.5 * p.m_u * ts.v_u[i] * ts.v_u[i] +
               0.5 * p.k21 * d * d + 0.5 * p.k11 * ts.z_u[i] * ts.z_u[i] +
               p.m_s * p.g * ts.z_s[i] + p.m_u * p.g * ts.z_u[i];
    };
    for (std::size_t i = 1; i < ts.size(); ++i) {
        CHECK(energy(i) <= energy(i - 1) + 1e-9);
    }
}

TEST_CASE("printed coupling orientation diverges within the abort window") {
    SuspensionParams p;
    SimConfig cfg;
    cfg.duration = 5.0;
    cfg.mode = SimMode::semi_active_zero;
    cfg.dynamics.signs = dynamics::CouplingSigns::as_printed;
    const RoadProfile road_profile = rough_road(0, 0.001, 5.0);
    CHECK_THROWS_AS(
        sim::integrate_closed_loop(p, nullptr, nullptr, road_profile, cfg),
        std::runtime_error);
}

TEST_CASE("fuzzy-PID run keeps the damper command inside its bounds") {
    SuspensionParams p;
    const fuzzy::FuzzySystem sys = fuzzy::FuzzySystem::make_default();
    const pid::PidGains gains{2000.0, 200.0, 20.0};
    const RoadProfile road_profile = rough_road(1, 0.001, 2.0);
    SimConfig cfg;
    cfg.duration = 2.0;
    const TimeSeries ts =
        sim::integrate_closed_loop(p, &sys, &gains, road_profile, cfg);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        CHECK(ts.f_d[i] >= p.f_min);
        CHECK(ts.f_d[i] <= p.f_max);
    }
}

TEST_CASE("fuzzy-PID mode requires its collaborators") {
    SuspensionParams p;
    SimConfig cfg;
    cfg.duration = 0.5;
    CHECK_THROWS_AS(sim::integrate_closed_loop(p, nullptr, nullptr,
                                               flat_road(1.0), cfg),
                    std::invalid_argument);
}

TEST_CASE("compute_metrics basics") {
    TimeSeries ts;
    const double dt = 0.001;
    const std::size_t n = 100001;  // 100 s
    const double amp = 2.5;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        ts.time.push_back(t);
        ts.z_s.push_back(0.0);
        ts.z_u.push_back(0.0);
        ts.v_s.push_back(0.0);
        ts.v_u.push_back(0.0);
        ts.a_s.push_back(amp * std::sin(2.0 * M_PI * 1.0 * t));  // >= 50 cycles
        ts.distortion.push_back(-0.75);
        ts.tire_load.push_back(-2700.0 + std::cos(t));
        ts.f_d.push_back(0.0);
    }
    const sim::Metrics m = sim::compute_metrics(ts, 0.0);
    CHECK(m.peak_accel == doctest::Approx(amp).epsilon(1e-4));
    CHECK(m.rms_accel == doctest::Approx(amp / std::sqrt(2.0)).epsilon(0.01));
    CHECK(m.peak_distortion == doctest::Approx(0.75));
    CHECK(m.rms_distortion == doctest::Approx(0.75));
    CHECK(m.peak_accel >= m.rms_accel);
    CHECK(m.peak_distortion >= m.rms_distortion);
    CHECK(m.tire_load_min < m.tire_load_max);
    CHECK(m.tire_load_min < 0.0);

    CHECK_THROWS_AS(sim::compute_metrics(ts, 100.0), std::invalid_argument);
}

TEST_CASE("run_comparison: identical scenarios give zero deltas") {
    SuspensionParams p;
    const fuzzy::FuzzySystem sys = fuzzy::FuzzySystem::make_default();
    RoadSpec spec;
    SimConfig cfg;
    cfg.duration = 1.5;
    cfg.settle_skip = 0.25;
    sim::TuningSetup tuning;

    const std::vector<sim::Scenario> scenarios = {
        {"a", SimMode::semi_active_zero, sim::TunerKind::none},
        {"b", SimMode::semi_active_zero, sim::TunerKind::none},
    };
    const auto table =
        sim::run_comparison(scenarios, "a", p, sys, spec, 0, cfg, tuning);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].ok);
    CHECK(table.rows[1].ok);
    CHECK(table.rows[0].metrics.rms_accel == table.rows[1].metrics.rms_accel);
    CHECK(table.rows[0].metrics.peak_distortion ==
          table.rows[1].metrics.peak_distortion);

    const std::string text = sim::render_comparison(table);
    CHECK(text.find("+0.0%") != std::string::npos);
}

TEST_CASE("run_comparison validates its inputs") {
    SuspensionParams p;
    const fuzzy::FuzzySystem sys = fuzzy::FuzzySystem::make_default();
    RoadSpec spec;
    SimConfig cfg;
    cfg.duration = 1.0;
    sim::TuningSetup tuning;
    const std::vector<sim::Scenario> one = {
        {"a", SimMode::semi_active_zero, sim::TunerKind::none}};
    CHECK_THROWS_AS(sim::run_comparison(one, "a", p, sys, spec, 0, cfg, tuning),
                    std::invalid_argument);
    const std::vector<sim::Scenario> two = {
        {"a", SimMode::semi_active_zero, sim::TunerKind::none},
        {"b", SimMode::semi_active_zero, sim::TunerKind::none}};
    CHECK_THROWS_AS(sim::run_comparison(two, "missing", p, sys, spec, 0, cfg,
                                        tuning),
                    std::invalid_argument);
}

TEST_CASE("zn probe produces a finite response of the right length") {
    SuspensionParams p;
    const auto response = sim::zn_distortion_response(p, 100.0, 0.001, 1.0);
    CHECK(response.size() == 1001);
    for (const double d : response) CHECK(std::isfinite(d));
}
