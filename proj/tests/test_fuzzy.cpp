#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "susplab/fuzzy.hpp"
#include "susplab/rng.hpp"

using namespace susplab;
using fuzzy::BellMF;
using fuzzy::FuzzySystem;
using fuzzy::FuzzyVariable;
using fuzzy::Level;
using fuzzy::RuleBase;

namespace {

// Independent evaluation of the bell law via exp/log.
double bell_oracle(double x, const BellMF& mf) {
    if (x == mf.r) return 1.0;
    const double t = std::abs((x - mf.r) / mf.p);
    return 1.0 / (1.0 + std::exp(2.0 * mf.q * std::log(t)));
}

double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-30});
    return std::abs(a - b) / scale;
}

// Brute-force Mamdani evaluation, independently coded against the rule base
// and variables, with its own aggregation grid.
double mamdani_oracle(const FuzzySystem& sys, double v, double a, double d) {
    auto clamp = [](double x, const FuzzyVariable& var) {
        return std::min(std::max(x, var.lo), var.hi);
    };
    const double xv = clamp(v, sys.velocity());
    const double xa = clamp(a, sys.acceleration());
    const double xd = clamp(d, sys.distortion());

    double weight[9] = {};
    for (int i = 0; i < 9; ++i) {
        for (int j = 0; j < 9; ++j) {
            for (int k = 0; k < 9; ++k) {
                const double firing = std::min(
                    {bell_oracle(xv, sys.velocity().mfs[i]),
                     bell_oracle(xa, sys.acceleration().mfs[j]),
                     bell_oracle(xd, sys.distortion().mfs[k])});
                const int out = static_cast<int>(
                    sys.rules().at(static_cast<Level>(i), static_cast<Level>(j),
                                   static_cast<Level>(k)));
                weight[out] = std::max(weight[out], firing);
            }
        }
    }
    double strongest = 0.0;
    for (const double w : weight) strongest = std::max(strongest, w);
    if (strongest > FuzzySystem::kActivationFloor) {
        for (double& w : weight) {
            if (w < FuzzySystem::kActivationFloor) w = 0.0;
        }
    }

    const int grid = 5001;
    double num = 0.0, den = 0.0;
    for (int g = 0; g < grid; ++g) {
        const double u = sys.output().lo +
                         (sys.output().hi - sys.output().lo) * g / (grid - 1);
        double mu = 0.0;
        for (int l = 0; l < 9; ++l) {
            mu = std::max(mu,
                          std::min(weight[l], bell_oracle(u, sys.output().mfs[l])));
        }
        const double w = (g == 0 || g == grid - 1) ? 0.5 : 1.0;
        num += w * mu * u;
        den += w * mu;
    }
    return den > 0.0 ? num / den : 0.5 * (sys.output().lo + sys.output().hi);
}

std::vector<const FuzzyVariable*> all_variables(const FuzzySystem& sys) {
    return {&sys.velocity(), &sys.acceleration(), &sys.distortion(),
            &sys.output()};
}

}  // namespace

TEST_CASE("bell membership: center, half-width, and grid oracle") {
    const FuzzySystem sys = FuzzySystem::make_default();
    // The printed-NL variant contributes the remaining published triples.
    fuzzy::TableOptions printed;
    printed.nl_centers_as_printed = true;
    const FuzzySystem sys_printed = FuzzySystem::make_default(printed);

    std::mt19937_64 gen(1);
    for (const FuzzySystem* system : {&sys, &sys_printed}) {
        for (const FuzzyVariable* var : all_variables(*system)) {
            for (const BellMF& mf : var->mfs) {
                CHECK(fuzzy::bell(mf.r, mf) == 1.0);
                CHECK(rel_err(fuzzy::bell(mf.r + mf.p, mf), 0.5) < 1e-12);
                CHECK(rel_err(fuzzy::bell(mf.r - mf.p, mf), 0.5) < 1e-12);
                for (int i = 0; i < 300; ++i) {
                    const double x = mf.r + rng::uniform(gen, -5.0, 5.0) * mf.p;
                    CHECK(rel_err(fuzzy::bell(x, mf), bell_oracle(x, mf)) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("bell is monotone in the distance from the center") {
    const BellMF mf{21.88, 2.5, 0.0};
    CHECK(fuzzy::bell(21.88, mf) == doctest::Approx(0.5).epsilon(1e-12));
    double prev = 1.0;
    for (double x = 0.0; x < 200.0; x += 5.0) {
        const double v = fuzzy::bell(x, mf);
        CHECK(v <= prev);
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
}

TEST_CASE("level names round trip") {
    for (int i = 0; i < fuzzy::kLevels; ++i) {
        const auto lvl = static_cast<Level>(i);
        const auto back = fuzzy::level_from_name(fuzzy::level_name(lvl));
        REQUIRE(back.has_value());
        CHECK(*back == lvl);
    }
    CHECK(!fuzzy::level_from_name("bogus").has_value());
}

TEST_CASE("default table: corrected NL centers restore the progression") {
    const FuzzyVariable vel = fuzzy::make_velocity_variable();
    CHECK(vel.mfs[1].r == doctest::Approx(-0.685));
    const FuzzyVariable acc = fuzzy::make_acceleration_variable();
    CHECK(acc.mfs[1].r == doctest::Approx(-6.625));

    fuzzy::TableOptions printed;
    printed.nl_centers_as_printed = true;
    CHECK(fuzzy::make_velocity_variable(printed).mfs[1].r ==
          doctest::Approx(0.685));
    CHECK(fuzzy::make_acceleration_variable(printed).mfs[1].r ==
          doctest::Approx(0.65));

    // Every other center is an arithmetic progression; the corrected NL
    // values sit exactly on it.
    for (int i = 2; i < 9; ++i) {
        CHECK(vel.mfs[i].r - vel.mfs[i - 1].r == doctest::Approx(0.315));
        CHECK(acc.mfs[i].r - acc.mfs[i - 1].r == doctest::Approx(2.375));
    }
}

TEST_CASE("rule base: the 13 published rules are seeded verbatim") {
    const auto rb = RuleBase::build(fuzzy::make_velocity_variable(),
                                    fuzzy::make_distortion_variable());
    using L = Level;
    CHECK(rb.at(L::NL, L::NMIN, L::PMAX) == L::PL);
    CHECK(rb.at(L::NM, L::NMIN, L::PMAX) == L::PM);
    CHECK(rb.at(L::NS, L::NMIN, L::NMIN) == L::PS);
    CHECK(rb.at(L::PS, L::NM, L::PL) == L::PM);
    CHECK(rb.at(L::PM, L::NMIN, L::PM) == L::PS);
    CHECK(rb.at(L::PL, L::NL, L::NMIN) == L::PL);
    CHECK(rb.at(L::NMIN, L::NMIN, L::NMIN) == L::PMAX);
    CHECK(rb.at(L::PL, L::NS, L::PL) == L::NL);
    CHECK(rb.at(L::PL, L::Small, L::PS) == L::NL);
    CHECK(rb.at(L::NMIN, L::PS, L::NM) == L::PL);
    CHECK(rb.at(L::Small, L::NMIN, L::NMIN) == L::PS);
    CHECK(rb.at(L::PMAX, L::NS, L::NMIN) == L::NL);
    CHECK(rb.at(L::PMAX, L::PMAX, L::PMAX) == L::NMIN);
}

TEST_CASE("rule base policy: outer acceleration bands reflect the level") {
    const auto rb = RuleBase::build(fuzzy::make_velocity_variable(),
                                    fuzzy::make_distortion_variable());
    using L = Level;
    // Non-seeded cells only.
    CHECK(rb.at(L::Small, L::NMIN, L::Small) == L::PMAX);
    CHECK(rb.at(L::PS, L::NL, L::NS) == L::PL);
    CHECK(rb.at(L::NS, L::NM, L::PS) == L::PM);
    CHECK(rb.at(L::Small, L::PM, L::Small) == L::NM);
    CHECK(rb.at(L::NMIN, L::PL, L::PMAX) == L::NL);
    CHECK(rb.at(L::NL, L::PMAX, L::PM) == L::NMIN);
}

TEST_CASE("rule base policy: middle band follows the dominant input") {
    const auto rb = RuleBase::build(fuzzy::make_velocity_variable(),
                                    fuzzy::make_distortion_variable());
    using L = Level;
    // Velocity PL (offset 1/3) vs distortion PL (offset 0.345): distortion
    // dominates and reflects to NL.
    CHECK(rb.at(L::PL, L::PS, L::PL) == L::NL);
    // Velocity PL vs distortion PS (offset 0.11): velocity dominates.
    CHECK(rb.at(L::PL, L::PS, L::PS) == L::NL);
    // Velocity NMIN (0.444) vs distortion PMAX (0.446): distortion wins the
    // near-tie and reflects its own level.
    CHECK(rb.at(L::NMIN, L::Small, L::PMAX) == L::NMIN);
    // Both at Small: distortion's center sits slightly off mid-universe, so
    // distortion dominates and Small reflects to Small.
    CHECK(rb.at(L::Small, L::Small, L::Small) == L::Small);
}

TEST_CASE("rule CSV round trip and validation") {
    const auto rb = RuleBase::build(fuzzy::make_velocity_variable(),
                                    fuzzy::make_distortion_variable());
    std::ostringstream out;
    rb.to_csv(out);
    std::istringstream in(out.str());
    const RuleBase back = RuleBase::from_csv(in);
    CHECK(back == rb);

    // 729 data rows + header.
    int lines = 0;
    std::string line;
    std::istringstream count_in(out.str());
    while (std::getline(count_in, line)) ++lines;
    CHECK(lines == 730);

    std::istringstream dup("vel_level,acc_level,dist_level,out_level\n"
                           "NMIN,NMIN,NMIN,PS\nNMIN,NMIN,NMIN,PL\n");
    CHECK_THROWS_AS(RuleBase::from_csv(dup), std::invalid_argument);
    std::istringstream partial("vel_level,acc_level,dist_level,out_level\n"
                               "NMIN,NMIN,NMIN,PS\n");
    CHECK_THROWS_AS(RuleBase::from_csv(partial), std::invalid_argument);
}

TEST_CASE("infer stays inside the output universe and is pure") {
    const FuzzySystem sys = FuzzySystem::make_default();
    std::mt19937_64 gen(33);
    for (int i = 0; i < 2000; ++i) {
        const double v = rng::uniform(gen, -5.0, 5.0);
        const double a = rng::uniform(gen, -40.0, 40.0);
        const double d = rng::uniform(gen, -2.0, 2.0);
        const double u1 = sys.infer(v, a, d);
        const double u2 = sys.infer(v, a, d);
        CHECK(u1 == u2);
        CHECK(u1 >= 0.0);
        CHECK(u1 <= 350.0);
    }
    CHECK_THROWS_AS(sys.infer(std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("infer matches an independent Mamdani implementation") {
    const FuzzySystem sys = FuzzySystem::make_default();
    std::mt19937_64 gen(8);
    for (int i = 0; i < 25; ++i) {
        const double v = rng::uniform(gen, -1.2, 1.7);
        const double a = rng::uniform(gen, -10.5, 11.5);
        const double d = rng::uniform(gen, -0.05, 0.85);
        const double got = sys.infer(v, a, d);
        const double want = mamdani_oracle(sys, v, a, d);
        // Different aggregation grids; agreement within a fraction of a newton.
        CHECK(got == doctest::Approx(want).epsilon(0.002));
    }
}

TEST_CASE("rule 7 at its antecedent centers commands a near-maximal force") {
    const FuzzySystem sys = FuzzySystem::make_default();
    const double u = sys.infer(-1.0, -9.0, 0.0193);
    CHECK(u >= 300.0);
    CHECK(u == doctest::Approx(mamdani_oracle(sys, -1.0, -9.0, 0.0193))
                   .epsilon(0.002));
}

TEST_CASE("all 13 published rules fire to their consequents") {
    const FuzzySystem sys = FuzzySystem::make_default();
    using L = Level;
    const struct {
        L vel, acc, dist, out;
    } rules[] = {
        {L::NL, L::NMIN, L::PMAX, L::PL},
        {L::NM, L::NMIN, L::PMAX, L::PM},
        {L::NS, L::NMIN, L::NMIN, L::PS},
        {L::PS, L::NM, L::PL, L::PM},
        {L::PM, L::NMIN, L::PM, L::PS},
        {L::PL, L::NL, L::NMIN, L::PL},
        {L::NMIN, L::NMIN, L::NMIN, L::PMAX},
        {L::PL, L::NS, L::PL, L::NL},
        {L::PL, L::Small, L::PS, L::NL},
        {L::NMIN, L::PS, L::NM, L::PL},
        {L::Small, L::NMIN, L::NMIN, L::PS},
        {L::PMAX, L::NS, L::NMIN, L::NL},
        {L::PMAX, L::PMAX, L::PMAX, L::NMIN},
    };
    for (const auto& rule : rules) {
        const double u = sys.infer(
            sys.velocity().mfs[static_cast<int>(rule.vel)].r,
            sys.acceleration().mfs[static_cast<int>(rule.acc)].r,
            sys.distortion().mfs[static_cast<int>(rule.dist)].r);
        // Nearest output MF by membership at the defuzzified value.
        int nearest = 0;
        double best = -1.0;
        for (int l = 0; l < 9; ++l) {
            const double mu = fuzzy::bell(u, sys.output().mfs[l]);
            if (mu > best) {
                best = mu;
                nearest = l;
            }
        }
        CHECK(nearest == static_cast<int>(rule.out));
    }
}

TEST_CASE("acceleration sweep is non-increasing at Small velocity/distortion") {
    const FuzzySystem sys = FuzzySystem::make_default();
    const double v = sys.velocity().mfs[static_cast<int>(Level::Small)].r;
    const double d = sys.distortion().mfs[static_cast<int>(Level::Small)].r;
    const double a_lo = sys.acceleration().mfs[0].r;
    const double a_hi = sys.acceleration().mfs[8].r;
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 50; ++i) {
        const double a = a_lo + (a_hi - a_lo) * i / 49.0;
        const double u = sys.infer(v, a, d);
        CHECK(u <= prev + 1e-9);
        prev = u;
    }
}

TEST_CASE("zero firing strength returns the universe midpoint with a flag") {
    // Sharp bells whose membership underflows to exactly zero far away.
    FuzzyVariable sharp;
    sharp.name = "sharp";
    sharp.lo = -1e6;
    sharp.hi = 1e6;
    for (int i = 0; i < 9; ++i) {
        sharp.mfs[i] = {1e-3, 50.0, static_cast<double>(i)};
    }
    FuzzyVariable out = fuzzy::make_output_variable();
    const auto rules = RuleBase::build(sharp, sharp);
    const FuzzySystem sys(sharp, sharp, sharp, out, rules);
    fuzzy::InferDiagnostics diag;
    const double u = sys.infer(1e6, 1e6, 1e6, &diag);
    CHECK(diag.zero_firing);
    CHECK(u == doctest::Approx(175.0));
}

TEST_CASE("independently built systems agree bitwise") {
    const FuzzySystem a = FuzzySystem::make_default();
    const FuzzySystem b = FuzzySystem::make_default();
    std::mt19937_64 gen(4);
    for (int i = 0; i < 100; ++i) {
        const double v = rng::uniform(gen, -1.2, 1.7);
        const double ac = rng::uniform(gen, -10.0, 11.0);
        const double d = rng::uniform(gen, -0.05, 0.85);
        CHECK(a.infer(v, ac, d) == b.infer(v, ac, d));
    }
}
