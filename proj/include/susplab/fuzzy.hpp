// Three-input / one-output Mamdani controller for the variable damper force:
// generalized bell membership functions, a 729-entry rule base, min-AND
// firing, max aggregation and centroid defuzzification.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace susplab::fuzzy {

/// Generalized bell membership function 1 / (1 + |(x-r)/p|^(2q)).
struct BellMF {
    double p;  ///< half-width at half-membership
    double q;  ///< curvature exponent
    double r;  ///< center
};

/// Membership of x in the bell. Equals 1 at the center and 0.5 at r +/- p.
double bell(double x, const BellMF& mf);

/// The nine linguistic levels, ordered as in the rule-set table.
enum class Level : int {
    NMIN = 0,
    NL,
    NM,
    NS,
    Small,
    PS,
    PM,
    PL,
    PMAX,
};
inline constexpr int kLevels = 9;

const char* level_name(Level level);
std::optional<Level> level_from_name(std::string_view name);

/// One linguistic variable: nine bells over a closed universe.
struct FuzzyVariable {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    std::array<BellMF, kLevels> mfs{};
};

/// Dense (velocity, acceleration, distortion) -> output level map.
class RuleBase {
  public:
    RuleBase();

    Level at(Level vel, Level acc, Level dist) const;
    void set(Level vel, Level acc, Level dist, Level out);

    /// Builds the full 729-rule table: the explicitly specified rules are
    /// seeded verbatim, the rest follow the policy that the output level is
    /// the reflection of the acceleration level when acceleration is in its
    /// outer bands, and the reflection of the dominant of velocity/distortion
    /// (by normalized center offset from mid-universe, distortion winning
    /// ties) when acceleration is in its middle band.
    static RuleBase build(const FuzzyVariable& velocity,
                          const FuzzyVariable& distortion);

    /// CSV with header vel_level,acc_level,dist_level,out_level (729 rows).
    void to_csv(std::ostream& out) const;
    static RuleBase from_csv(std::istream& in);

    bool operator==(const RuleBase&) const = default;

  private:
    std::array<std::uint8_t, kLevels * kLevels * kLevels> out_;
};

struct TableOptions {
    /// The source table prints the NL centers of velocity and acceleration as
    /// 0.685 and 0.65, which lands them inside the positive half-axis and
    /// breaks the monotone center layout every other level follows. The
    /// default restores the arithmetic progression (-0.685 and -6.625); set
    /// this to keep the printed values.
    bool nl_centers_as_printed = false;
};

struct InferDiagnostics {
    bool zero_firing = false;   ///< no rule fired; midpoint returned
    bool input_clamped = false; ///< at least one input left its universe
};

class FuzzySystem {
  public:
    FuzzySystem(FuzzyVariable velocity, FuzzyVariable acceleration,
                FuzzyVariable distortion, FuzzyVariable output, RuleBase rules);

    /// The controller of the reference design: Table-valued bells for
    /// velocity, acceleration, distortion and force output plus the generated
    /// 729-rule base.
    static FuzzySystem make_default(const TableOptions& opts = {});

    /// Mamdani inference: inputs clamped to their universes, min-AND firing,
    /// max aggregation, 1001-point trapezoid centroid over the output
    /// universe; the result is clamped to that universe. Aggregated level
    /// activations below kActivationFloor are dropped when a stronger
    /// activation exists (adjacent bells overlap at up to ~0.051 at each
    /// other's centers; that cross-talk otherwise leaks into the centroid).
    double infer(double velocity, double acceleration, double distortion,
                 InferDiagnostics* diag = nullptr) const;

    static constexpr double kActivationFloor = 0.06;

    const FuzzyVariable& velocity() const { return velocity_; }
    const FuzzyVariable& acceleration() const { return acceleration_; }
    const FuzzyVariable& distortion() const { return distortion_; }
    const FuzzyVariable& output() const { return output_; }
    const RuleBase& rules() const { return rules_; }
    void set_rules(RuleBase rules) { rules_ = std::move(rules); }

  private:
    static constexpr int kGridPoints = 1001;

    FuzzyVariable velocity_;
    FuzzyVariable acceleration_;
    FuzzyVariable distortion_;
    FuzzyVariable output_;
    RuleBase rules_;
    // Output membership values precomputed on the centroid grid.
    std::array<std::array<double, kGridPoints>, kLevels> output_grid_{};
    std::array<double, kGridPoints> grid_u_{};
};

/// Table-valued variables (exposed for tests and config overrides).
FuzzyVariable make_velocity_variable(const TableOptions& opts = {});
FuzzyVariable make_acceleration_variable(const TableOptions& opts = {});
FuzzyVariable make_distortion_variable();
FuzzyVariable make_output_variable();

}  // namespace susplab::fuzzy
