// Sectioned key/value configuration: file parsing, typed access, and the
// mapping onto every module's parameter struct.
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "susplab/dynamics.hpp"
#include "susplab/fuzzy.hpp"
#include "susplab/optim.hpp"
#include "susplab/pid.hpp"
#include "susplab/road.hpp"
#include "susplab/sim.hpp"

namespace susplab::config {

/// INI-style text: `[section]` headers, `key = value` pairs, full-line
/// comments starting with '#' or ';'.
class Config {
  public:
    Config() = default;
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const;
    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const;
    std::vector<double> get_doubles(const std::string& section,
                                    const std::string& key,
                                    const std::vector<double>& fallback) const;
    std::vector<std::string> get_strings(
        const std::string& section, const std::string& key,
        const std::vector<std::string>& fallback) const;

    void set(const std::string& section, const std::string& key,
             const std::string& value);
    void set_double(const std::string& section, const std::string& key,
                    double value);

    /// Keys present in the file but never read; sections listed in
    /// `ignored_sections` are skipped.
    std::vector<std::string> unused_keys(
        const std::set<std::string>& ignored_sections = {}) const;

    /// Sorted `[section]` / `key = value` text.
    std::string dump() const;

  private:
    std::map<std::string, std::map<std::string, std::string>> values_;
    mutable std::set<std::string> touched_;
};

/// Everything a workflow needs, resolved from config + defaults.
struct LabSetup {
    dynamics::SuspensionParams params{};
    road::RoadSpec road{};
    fuzzy::TableOptions fuzzy_table{};
    std::string rules_csv;  ///< optional rule-base override path
    pid::PidGains gains{100.0, 10.0, 1.0};
    pid::JudgmentWeights weights{};
    pid::OvershootBranch branch = pid::OvershootBranch::standard;
    optim::CfoaConfig cfoa{};
    optim::BaselineOptions baseline{};
    optim::ZnOptions zn{};
    sim::SimConfig simc{};
    sim::TuningSetup tuning{};
    std::vector<sim::Scenario> scenarios;
    std::string reference = "active";
    std::uint64_t seed = 0;
};

/// Reads every known key (so unused_keys() flags typos afterwards) and
/// validates ranges. Throws std::invalid_argument on bad values.
LabSetup load_setup(const Config& cfg);

/// Writes the fully resolved setup back into config form (the manifest
/// parameter snapshot).
void dump_setup(const LabSetup& setup, Config& cfg);

/// Shorthand scenario names: active, zero (or semi_active_zero), fixed,
/// zn, foa, ga, pso, bfo, cfoa.
sim::Scenario scenario_from_shorthand(const std::string& name);

}  // namespace susplab::config
