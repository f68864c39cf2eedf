#include "susplab/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace susplab::fuzzy {

double bell(double x, const BellMF& mf) {
    return 1.0 / (1.0 + std::pow(std::abs((x - mf.r) / mf.p), 2.0 * mf.q));
}

namespace {

constexpr const char* kLevelNames[kLevels] = {
    "NMIN", "NL", "NM", "NS", "Small", "PS", "PM", "PL", "PMAX",
};

int idx(Level vel, Level acc, Level dist) {
    return (static_cast<int>(vel) * kLevels + static_cast<int>(acc)) * kLevels +
           static_cast<int>(dist);
}

// Universe spans one half-width beyond the outermost centers.
FuzzyVariable finish_variable(FuzzyVariable var) {
    var.lo = var.mfs.front().r - var.mfs.front().p;
    var.hi = var.mfs.back().r + var.mfs.back().p;
    return var;
}

}  // namespace

const char* level_name(Level level) {
    return kLevelNames[static_cast<int>(level)];
}

std::optional<Level> level_from_name(std::string_view name) {
    for (int i = 0; i < kLevels; ++i) {
        if (name == kLevelNames[i]) return static_cast<Level>(i);
    }
    return std::nullopt;
}

RuleBase::RuleBase() {
    out_.fill(static_cast<std::uint8_t>(Level::Small));
}

Level RuleBase::at(Level vel, Level acc, Level dist) const {
    return static_cast<Level>(out_[idx(vel, acc, dist)]);
}

void RuleBase::set(Level vel, Level acc, Level dist, Level out) {
    out_[idx(vel, acc, dist)] = static_cast<std::uint8_t>(out);
}

RuleBase RuleBase::build(const FuzzyVariable& velocity,
                         const FuzzyVariable& distortion) {
    auto reflected = [](int level) { return 8 - level; };
    // Offset of a level's center from mid-universe, normalized by the
    // universe width. The center carries full membership, so weighting by
    // membership leaves the center position itself.
    auto offset = [](const FuzzyVariable& var, int level) {
        const double width = var.hi - var.lo;
        return (var.mfs[static_cast<std::size_t>(level)].r - var.lo) / width - 0.5;
    };

    RuleBase rb;
    for (int v = 0; v < kLevels; ++v) {
        for (int a = 0; a < kLevels; ++a) {
            for (int d = 0; d < kLevels; ++d) {
                int out;
                const bool outer_acc = (a <= 2) || (a >= 6);
                if (outer_acc) {
                    out = reflected(a);
                } else {
                    const double mag_v = std::abs(offset(velocity, v));
                    const double mag_d = std::abs(offset(distortion, d));
                    const int dominant = (mag_d >= mag_v) ? d : v;
                    out = reflected(dominant);
                }
                rb.set(static_cast<Level>(v), static_cast<Level>(a),
                       static_cast<Level>(d), static_cast<Level>(out));
            }
        }
    }

    // Explicitly specified rules override the generated policy.
    using L = Level;
    const struct {
        L vel, acc, dist, out;
    } seeded[] = {
        {L::NL, L::NMIN, L::PMAX, L::PL},     // rule 1
        {L::NM, L::NMIN, L::PMAX, L::PM},     // rule 2
        {L::NS, L::NMIN, L::NMIN, L::PS},     // rule 3
        {L::PS, L::NM, L::PL, L::PM},         // rule 4
        {L::PM, L::NMIN, L::PM, L::PS},       // rule 5
        {L::PL, L::NL, L::NMIN, L::PL},       // rule 6
        {L::NMIN, L::NMIN, L::NMIN, L::PMAX}, // rule 7
        {L::PL, L::NS, L::PL, L::NL},         // rule 8
        {L::PL, L::Small, L::PS, L::NL},      // rule 9
        {L::NMIN, L::PS, L::NM, L::PL},       // rule 726
        {L::Small, L::NMIN, L::NMIN, L::PS},  // rule 727
        {L::PMAX, L::NS, L::NMIN, L::NL},     // rule 728
        {L::PMAX, L::PMAX, L::PMAX, L::NMIN}, // rule 729
    };
    for (const auto& rule : seeded) {
        rb.set(rule.vel, rule.acc, rule.dist, rule.out);
    }
    return rb;
}

void RuleBase::to_csv(std::ostream& out) const {
    out << "vel_level,acc_level,dist_level,out_level\n";
    for (int v = 0; v < kLevels; ++v) {
        for (int a = 0; a < kLevels; ++a) {
            for (int d = 0; d < kLevels; ++d) {
                out << kLevelNames[v] << ',' << kLevelNames[a] << ','
                    << kLevelNames[d] << ','
                    << kLevelNames[static_cast<int>(
                           at(static_cast<Level>(v), static_cast<Level>(a),
                              static_cast<Level>(d)))]
                    << '\n';
            }
        }
    }
}

RuleBase RuleBase::from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("rule CSV is empty");
    }
    RuleBase rb;
    std::array<bool, kLevels * kLevels * kLevels> seen{};
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<std::string, 4> field;
        std::size_t start = 0;
        for (int i = 0; i < 4; ++i) {
            const auto comma = line.find(',', start);
            if (i < 3 && comma == std::string::npos) {
                throw std::invalid_argument("rule CSV row needs 4 columns: " + line);
            }
            field[static_cast<std::size_t>(i)] =
                line.substr(start, comma == std::string::npos ? std::string::npos
                                                              : comma - start);
            start = comma + 1;
        }
        std::array<Level, 4> levels{};
        for (int i = 0; i < 4; ++i) {
            const auto lvl = level_from_name(field[static_cast<std::size_t>(i)]);
            if (!lvl) {
                throw std::invalid_argument("unknown level name: " +
                                            field[static_cast<std::size_t>(i)]);
            }
            levels[static_cast<std::size_t>(i)] = *lvl;
        }
        const int key = idx(levels[0], levels[1], levels[2]);
        if (seen[static_cast<std::size_t>(key)]) {
            throw std::invalid_argument("duplicate rule key: " + line);
        }
        seen[static_cast<std::size_t>(key)] = true;
        rb.set(levels[0], levels[1], levels[2], levels[3]);
        ++rows;
    }
    if (rows != kLevels * kLevels * kLevels) {
        throw std::invalid_argument("rule CSV must hold exactly 729 rows, got " +
                                    std::to_string(rows));
    }
    return rb;
}

FuzzyVariable make_velocity_variable(const TableOptions& opts) {
    const double nl_center = opts.nl_centers_as_printed ? 0.685 : -0.685;
    FuzzyVariable var;
    var.name = "velocity";
    var.mfs = {{
        {0.1575, 2.5, -1.0},
        {0.1575, 2.5, nl_center},
        {0.1575, 2.5, -0.37},
        {0.1575, 2.5, -0.055},
        {0.1575, 2.5, 0.26},
        {0.1575, 2.5, 0.575},
        {0.1575, 2.5, 0.89},
        {0.1575, 2.5, 1.205},
        {0.1575, 2.5, 1.52},
    }};
    return finish_variable(std::move(var));
}

FuzzyVariable make_acceleration_variable(const TableOptions& opts) {
    const double nl_center = opts.nl_centers_as_printed ? 0.65 : -6.625;
    FuzzyVariable var;
    var.name = "acceleration";
    var.mfs = {{
        {1.188, 2.499, -9.0},
        {1.188, 2.5, nl_center},
        {1.188, 2.5, -4.25},
        {1.188, 2.5, -1.875},
        {1.188, 2.5, 0.5},
        {1.188, 2.5, 2.875},
        {1.188, 2.5, 5.25},
        {1.188, 2.5, 7.625},
        {1.188, 2.501, 10.0},
    }};
    return finish_variable(std::move(var));
}

FuzzyVariable make_distortion_variable() {
    FuzzyVariable var;
    var.name = "distortion";
    var.mfs = {{
        {0.0338, 2.5, 0.0193},
        {0.0376, 2.5, 0.0944},
        {0.0535, 2.2, 0.187},
        {0.0619, 2.5, 0.2803},
        {0.0528, 2.5, 0.3912},
        {0.0534, 2.5, 0.4995},
        {0.0493, 2.84, 0.6025},
        {0.0403, 2.5, 0.6972},
        {0.0458, 2.5, 0.7815},
    }};
    return finish_variable(std::move(var));
}

FuzzyVariable make_output_variable() {
    FuzzyVariable var;
    var.name = "force";
    var.mfs = {{
        {21.88, 2.5, 0.0},
        {21.88, 2.5, 43.75},
        {21.88, 2.5, 87.5},
        {21.88, 2.5, 131.3},
        {21.88, 2.5, 175.0},
        {21.88, 2.5, 218.8},
        {21.9, 2.5, 263.0},
        {21.88, 2.5, 306.3},
        {21.88, 2.5, 350.0},
    }};
    // Defuzzification runs over the commanded-force range itself.
    var.lo = 0.0;
    var.hi = 350.0;
    return var;
}

FuzzySystem::FuzzySystem(FuzzyVariable velocity, FuzzyVariable acceleration,
                         FuzzyVariable distortion, FuzzyVariable output,
                         RuleBase rules)
    : velocity_(std::move(velocity)),
      acceleration_(std::move(acceleration)),
      distortion_(std::move(distortion)),
      output_(std::move(output)),
      rules_(std::move(rules)) {
    for (auto& var : {velocity_, acceleration_, distortion_, output_}) {
        if (!(var.hi > var.lo)) {
            throw std::invalid_argument("fuzzy variable " + var.name +
                                        " has an empty universe");
        }
        for (const auto& mf : var.mfs) {
            if (!(mf.p > 0.0) || !(mf.q > 0.0)) {
                throw std::invalid_argument("fuzzy variable " + var.name +
                                            " has a non-positive bell parameter");
            }
        }
    }
    const double step = (output_.hi - output_.lo) / (kGridPoints - 1);
    for (int i = 0; i < kGridPoints; ++i) {
        grid_u_[static_cast<std::size_t>(i)] = output_.lo + step * i;
    }
    for (int l = 0; l < kLevels; ++l) {
        for (int i = 0; i < kGridPoints; ++i) {
            output_grid_[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)] =
                bell(grid_u_[static_cast<std::size_t>(i)],
                     output_.mfs[static_cast<std::size_t>(l)]);
        }
    }
}

FuzzySystem FuzzySystem::make_default(const TableOptions& opts) {
    FuzzyVariable vel = make_velocity_variable(opts);
    FuzzyVariable acc = make_acceleration_variable(opts);
    FuzzyVariable dist = make_distortion_variable();
    FuzzyVariable out = make_output_variable();
    RuleBase rules = RuleBase::build(vel, dist);
    return FuzzySystem(std::move(vel), std::move(acc), std::move(dist),
                       std::move(out), std::move(rules));
}

double FuzzySystem::infer(double velocity, double acceleration, double distortion,
                          InferDiagnostics* diag) const {
    if (diag) *diag = {};
    if (!std::isfinite(velocity) || !std::isfinite(acceleration) ||
        !std::isfinite(distortion)) {
        throw std::invalid_argument("fuzzy inference requires finite inputs");
    }

    auto clamp_input = [&](double x, const FuzzyVariable& var) {
        const double c = std::clamp(x, var.lo, var.hi);
        if (diag && c != x) diag->input_clamped = true;
        return c;
    };
    const double xv = clamp_input(velocity, velocity_);
    const double xa = clamp_input(acceleration, acceleration_);
    const double xd = clamp_input(distortion, distortion_);

    std::array<double, kLevels> mu_v, mu_a, mu_d;
    for (int l = 0; l < kLevels; ++l) {
        mu_v[static_cast<std::size_t>(l)] = bell(xv, velocity_.mfs[static_cast<std::size_t>(l)]);
        mu_a[static_cast<std::size_t>(l)] = bell(xa, acceleration_.mfs[static_cast<std::size_t>(l)]);
        mu_d[static_cast<std::size_t>(l)] = bell(xd, distortion_.mfs[static_cast<std::size_t>(l)]);
    }

    // Min-AND firing, max-aggregated per output level.
    std::array<double, kLevels> level_weight{};
    for (int v = 0; v < kLevels; ++v) {
        for (int a = 0; a < kLevels; ++a) {
            const double mva = std::min(mu_v[static_cast<std::size_t>(v)],
                                        mu_a[static_cast<std::size_t>(a)]);
            for (int d = 0; d < kLevels; ++d) {
                const double firing =
                    std::min(mva, mu_d[static_cast<std::size_t>(d)]);
                const auto out = static_cast<std::size_t>(
                    rules_.at(static_cast<Level>(v), static_cast<Level>(a),
                              static_cast<Level>(d)));
                if (firing > level_weight[out]) level_weight[out] = firing;
            }
        }
    }

    // Adjacent levels overlap at up to ~0.051 membership at each other's
    // centers; activations at that scale are cross-talk, not commands, and
    // left in they break the inverse-acceleration ordering of the output.
    // Drop them whenever a stronger activation exists.
    double strongest = 0.0;
    for (const double w : level_weight) strongest = std::max(strongest, w);
    if (strongest > kActivationFloor) {
        for (double& w : level_weight) {
            if (w < kActivationFloor) w = 0.0;
        }
    }

    // Trapezoid centroid of max_l min(weight_l, bell_l(u)) over the universe.
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i < kGridPoints; ++i) {
        double mu = 0.0;
        for (int l = 0; l < kLevels; ++l) {
            const double clipped =
                std::min(level_weight[static_cast<std::size_t>(l)],
                         output_grid_[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)]);
            if (clipped > mu) mu = clipped;
        }
        const double w = (i == 0 || i == kGridPoints - 1) ? 0.5 : 1.0;
        num += w * mu * grid_u_[static_cast<std::size_t>(i)];
        den += w * mu;
    }
    if (den <= 0.0) {
        if (diag) diag->zero_firing = true;
        return 0.5 * (output_.lo + output_.hi);
    }
    return std::clamp(num / den, output_.lo, output_.hi);
}

}  // namespace susplab::fuzzy
