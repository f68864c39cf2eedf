#include "susplab/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace susplab::config {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> parts;
    std::string current;
    std::istringstream in(value);
    while (std::getline(in, current, ',')) {
        const std::string item = trim(current);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open config file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unterminated section header");
            }
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": empty section name");
            }
            cfg.values_[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": empty key");
        }
        if (section.empty()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": key outside any [section]");
        }
        cfg.values_[section][key] = value;
    }
    return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto sec = values_.find(section);
    if (sec == values_.end()) return false;
    return sec->second.count(key) > 0;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    touched_.insert(section + "." + key);
    const auto sec = values_.find(section);
    if (sec == values_.end()) return fallback;
    const auto it = sec->second.find(key);
    return it == sec->second.end() ? fallback : it->second;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    const std::string raw = get_string(section, key, "");
    if (raw.empty()) return fallback;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(raw, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config " + section + "." + key +
                                    ": not a number: " + raw);
    }
    if (used != raw.size()) {
        throw std::invalid_argument("config " + section + "." + key +
                                    ": trailing characters: " + raw);
    }
    return v;
}

long long Config::get_int(const std::string& section, const std::string& key,
                          long long fallback) const {
    const std::string raw = get_string(section, key, "");
    if (raw.empty()) return fallback;
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(raw, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config " + section + "." + key +
                                    ": not an integer: " + raw);
    }
    if (used != raw.size()) {
        throw std::invalid_argument("config " + section + "." + key +
                                    ": trailing characters: " + raw);
    }
    return v;
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
    const std::string raw = get_string(section, key, "");
    if (raw.empty()) return fallback;
    if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
    if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
    throw std::invalid_argument("config " + section + "." + key +
                                ": not a boolean: " + raw);
}

std::vector<double> Config::get_doubles(const std::string& section,
                                        const std::string& key,
                                        const std::vector<double>& fallback) const {
    const std::string raw = get_string(section, key, "");
    if (raw.empty()) return fallback;
    std::vector<double> out;
    for (const std::string& item : split_csv(raw)) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw std::invalid_argument("config " + section + "." + key +
                                        ": not a number: " + item);
        }
    }
    return out;
}

std::vector<std::string> Config::get_strings(
    const std::string& section, const std::string& key,
    const std::vector<std::string>& fallback) const {
    const std::string raw = get_string(section, key, "");
    if (raw.empty()) return fallback;
    return split_csv(raw);
}

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
    values_[section][key] = value;
}

void Config::set_double(const std::string& section, const std::string& key,
                        double value) {
    set(section, key, fmt_double(value));
}

std::vector<std::string> Config::unused_keys(
    const std::set<std::string>& ignored_sections) const {
    std::vector<std::string> unused;
    for (const auto& [section, entries] : values_) {
        if (ignored_sections.count(section)) continue;
        for (const auto& [key, value] : entries) {
            if (!touched_.count(section + "." + key)) {
                unused.push_back(section + "." + key);
            }
        }
    }
    return unused;
}

std::string Config::dump() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& [section, entries] : values_) {
        if (!first) out << "\n";
        first = false;
        out << "[" << section << "]\n";
        for (const auto& [key, value] : entries) {
            out << key << " = " << value << "\n";
        }
    }
    return out.str();
}

sim::Scenario scenario_from_shorthand(const std::string& name) {
    sim::Scenario s;
    s.label = name;
    if (name == "active") {
        s.mode = sim::SimMode::active;
        s.tuner = sim::TunerKind::none;
        return s;
    }
    if (name == "zero" || name == "semi_active_zero") {
        s.mode = sim::SimMode::semi_active_zero;
        s.tuner = sim::TunerKind::none;
        return s;
    }
    if (name == "fixed") {
        s.mode = sim::SimMode::semi_active_fuzzy_pid;
        s.tuner = sim::TunerKind::none;
        return s;
    }
    const auto tuner = sim::tuner_from_name(name);
    if (tuner && *tuner != sim::TunerKind::none) {
        s.mode = sim::SimMode::semi_active_fuzzy_pid;
        s.tuner = *tuner;
        return s;
    }
    throw std::invalid_argument("unknown scenario shorthand: " + name);
}

LabSetup load_setup(const Config& cfg) {
    LabSetup setup;

    auto& p = setup.params;
    p.m_s = cfg.get_double("suspension", "m_s", p.m_s);
    p.m_u = cfg.get_double("suspension", "m_u", p.m_u);
    p.g = cfg.get_double("suspension", "g", p.g);
    p.k11 = cfg.get_double("suspension", "k11", p.k11);
    p.k12 = cfg.get_double("suspension", "k12", p.k12);
    p.k13 = cfg.get_double("suspension", "k13", p.k13);
    p.k21 = cfg.get_double("suspension", "k21", p.k21);
    p.k22 = cfg.get_double("suspension", "k22", p.k22);
    p.c_o = cfg.get_double("suspension", "c_o", p.c_o);
    p.c_s = cfg.get_double("suspension", "c_s", p.c_s);
    p.c_i = cfg.get_double("suspension", "c_i", p.c_i);
    p.k_s = cfg.get_double("suspension", "k_s", p.k_s);
    p.k_m = cfg.get_double("suspension", "k_m", p.k_m);
    p.f_min = cfg.get_double("suspension", "f_min", p.f_min);
    p.f_max = cfg.get_double("suspension", "f_max", p.f_max);
    p.b_s = cfg.get_double("suspension", "b_s", p.b_s);
    p.b_u = cfg.get_double("suspension", "b_u", p.b_u);
    p.validate();

    const std::string cubic =
        cfg.get_string("suspension", "spring_cubic", "suspension_travel");
    if (cubic == "suspension_travel") {
        setup.simc.dynamics.spring_cubic = dynamics::SpringCubic::suspension_travel;
    } else if (cubic == "tire_deflection") {
        setup.simc.dynamics.spring_cubic = dynamics::SpringCubic::tire_deflection;
    } else {
        throw std::invalid_argument("suspension.spring_cubic must be "
                                    "suspension_travel or tire_deflection");
    }
    const std::string signs =
        cfg.get_string("suspension", "coupling_signs", "dissipative");
    if (signs == "dissipative") {
        setup.simc.dynamics.signs = dynamics::CouplingSigns::dissipative;
    } else if (signs == "as_printed") {
        setup.simc.dynamics.signs = dynamics::CouplingSigns::as_printed;
    } else {
        throw std::invalid_argument(
            "suspension.coupling_signs must be dissipative or as_printed");
    }

    auto& r = setup.road;
    r.c_ref = cfg.get_double("road", "c_ref", r.c_ref);
    r.omega_ref = cfg.get_double("road", "omega_ref", r.omega_ref);
    r.w_low = cfg.get_double("road", "w_low", r.w_low);
    r.w_high = cfg.get_double("road", "w_high", r.w_high);
    r.omega_min = cfg.get_double("road", "omega_min", r.omega_min);
    r.omega_max = cfg.get_double("road", "omega_max", r.omega_max);
    r.n_harmonics = static_cast<int>(
        cfg.get_int("road", "n_harmonics", r.n_harmonics));
    r.seed = static_cast<std::uint64_t>(cfg.get_int("road", "seed", 0));
    r.validate();

    setup.fuzzy_table.nl_centers_as_printed =
        cfg.get_bool("fuzzy", "nl_centers_as_printed", false);
    setup.rules_csv = cfg.get_string("fuzzy", "rules_csv", "");

    setup.gains.kp = cfg.get_double("pid", "kp", setup.gains.kp);
    setup.gains.ki = cfg.get_double("pid", "ki", setup.gains.ki);
    setup.gains.kd = cfg.get_double("pid", "kd", setup.gains.kd);
    setup.gains.validate();

    auto& w = setup.weights;
    w.w1 = cfg.get_double("judgment", "w1", w.w1);
    w.w2 = cfg.get_double("judgment", "w2", w.w2);
    w.w3 = cfg.get_double("judgment", "w3", w.w3);
    w.w4 = cfg.get_double("judgment", "w4", w.w4);
    w.horizon = cfg.get_double("judgment", "horizon", w.horizon);
    w.validate();
    const std::string branch =
        cfg.get_string("judgment", "overshoot_branch", "standard");
    if (branch == "standard") {
        setup.branch = pid::OvershootBranch::standard;
    } else if (branch == "as_printed") {
        setup.branch = pid::OvershootBranch::as_printed;
    } else {
        throw std::invalid_argument(
            "judgment.overshoot_branch must be standard or as_printed");
    }

    auto& o = setup.cfoa;
    o.pop_size = static_cast<int>(cfg.get_int("optim", "pop_size", o.pop_size));
    o.max_iter = static_cast<int>(cfg.get_int("optim", "max_iter", o.max_iter));
    o.s = cfg.get_double("optim", "s", o.s);
    o.logistic_mu = cfg.get_double("optim", "logistic_mu", o.logistic_mu);
    o.search_radius = cfg.get_double("optim", "search_radius", o.search_radius);
    o.radius_decay = cfg.get_double("optim", "radius_decay", o.radius_decay);
    const std::string beta_mode =
        cfg.get_string("optim", "beta_mode", "per_iteration");
    if (beta_mode == "per_iteration") {
        o.beta_mode = optim::BetaMode::per_iteration;
    } else if (beta_mode == "fixed") {
        o.beta_mode = optim::BetaMode::fixed;
    } else {
        throw std::invalid_argument(
            "optim.beta_mode must be per_iteration or fixed");
    }
    o.beta = cfg.get_double("optim", "beta", o.beta);
    o.seed = static_cast<std::uint64_t>(cfg.get_int("optim", "seed", 0));
    // Location axes map to gains through this scale; sized so the damper
    // command saturates near the top of each axis.
    const std::vector<double> range =
        cfg.get_doubles("optim", "gain_range", {20000.0, 2000.0, 5000.0});
    if (range.size() != 3) {
        throw std::invalid_argument("optim.gain_range needs exactly 3 values");
    }
    o.gain_range = {range[0], range[1], range[2]};
    o.validate();

    setup.baseline.pop_size = o.pop_size;
    setup.baseline.search_radius = o.search_radius;
    setup.baseline.radius_decay = o.radius_decay;
    setup.baseline.gain_range = o.gain_range;

    setup.zn.kp_init = cfg.get_double("zn", "kp_init", setup.zn.kp_init);
    setup.zn.kp_max = cfg.get_double("zn", "kp_max", setup.zn.kp_max);

    auto& s = setup.simc;
    s.dt = cfg.get_double("sim", "dt", s.dt);
    s.duration = cfg.get_double("sim", "duration", s.duration);
    s.velocity = cfg.get_double("sim", "velocity", s.velocity);
    const std::string mode =
        cfg.get_string("sim", "mode", sim_mode_name(s.mode));
    const auto parsed_mode = sim::sim_mode_from_name(mode);
    if (!parsed_mode) {
        throw std::invalid_argument("sim.mode must be one of active, "
                                    "semi_active_zero, semi_active_fuzzy_pid");
    }
    s.mode = *parsed_mode;
    s.equilibrium_start = cfg.get_bool("sim", "equilibrium_start", true);
    s.settle_skip = cfg.get_double("sim", "settle_skip", s.settle_skip);
    const std::string routing =
        cfg.get_string("sim", "pid_routing", "clamped_sum");
    if (routing == "clamped_sum") {
        s.pid_routing = sim::PidRouting::clamped_sum;
    } else if (routing == "parallel_force") {
        s.pid_routing = sim::PidRouting::parallel_force;
    } else {
        throw std::invalid_argument(
            "sim.pid_routing must be clamped_sum or parallel_force");
    }
    s.validate();

    auto& t = setup.tuning;
    t.weights = setup.weights;
    t.branch = setup.branch;
    t.tune_duration = cfg.get_double("tune", "duration", t.tune_duration);
    t.tune_dt = cfg.get_double("tune", "dt", t.tune_dt);
    t.budget = cfg.get_int("tune", "budget", t.budget);
    t.zn_duration = cfg.get_double("tune", "zn_duration", t.zn_duration);
    t.cfoa = setup.cfoa;
    // The metaheuristic budget fixes the CFOA iteration count so every tuner
    // spends the same number of objective evaluations.
    t.cfoa.max_iter = std::max<int>(
        1, static_cast<int>((t.budget - t.cfoa.pop_size) / t.cfoa.pop_size));
    t.baseline = setup.baseline;
    t.zn = setup.zn;
    t.fixed_gains = setup.gains;
    if (!(t.tune_duration > 0.0) || !(t.tune_dt > 0.0)) {
        throw std::invalid_argument("tune.duration and tune.dt must be > 0");
    }
    if (t.budget < t.cfoa.pop_size) {
        throw std::invalid_argument("tune.budget must be >= optim.pop_size");
    }

    const std::vector<std::string> names = cfg.get_strings(
        "compare", "scenarios",
        {"active", "zero", "zn", "ga", "pso", "bfo", "cfoa"});
    setup.scenarios.clear();
    for (const std::string& name : names) {
        setup.scenarios.push_back(scenario_from_shorthand(name));
    }
    setup.reference = cfg.get_string("compare", "reference", "active");

    setup.seed = r.seed;
    return setup;
}

void dump_setup(const LabSetup& setup, Config& cfg) {
    const auto& p = setup.params;
    cfg.set_double("suspension", "m_s", p.m_s);
    cfg.set_double("suspension", "m_u", p.m_u);
    cfg.set_double("suspension", "g", p.g);
    cfg.set_double("suspension", "k11", p.k11);
    cfg.set_double("suspension", "k12", p.k12);
    cfg.set_double("suspension", "k13", p.k13);
    cfg.set_double("suspension", "k21", p.k21);
    cfg.set_double("suspension", "k22", p.k22);
    cfg.set_double("suspension", "c_o", p.c_o);
    cfg.set_double("suspension", "c_s", p.c_s);
    cfg.set_double("suspension", "c_i", p.c_i);
    cfg.set_double("suspension", "k_s", p.k_s);
    cfg.set_double("suspension", "k_m", p.k_m);
    cfg.set_double("suspension", "f_min", p.f_min);
    cfg.set_double("suspension", "f_max", p.f_max);
    cfg.set_double("suspension", "b_s", p.b_s);
    cfg.set_double("suspension", "b_u", p.b_u);
    cfg.set("suspension", "spring_cubic",
            setup.simc.dynamics.spring_cubic == dynamics::SpringCubic::suspension_travel
                ? "suspension_travel"
                : "tire_deflection");
    cfg.set("suspension", "coupling_signs",
            setup.simc.dynamics.signs == dynamics::CouplingSigns::dissipative
                ? "dissipative"
                : "as_printed");

    const auto& r = setup.road;
    cfg.set_double("road", "c_ref", r.c_ref);
    cfg.set_double("road", "omega_ref", r.omega_ref);
    cfg.set_double("road", "w_low", r.w_low);
    cfg.set_double("road", "w_high", r.w_high);
    cfg.set_double("road", "omega_min", r.omega_min);
    cfg.set_double("road", "omega_max", r.omega_max);
    cfg.set("road", "n_harmonics", std::to_string(r.n_harmonics));
    cfg.set("road", "seed", std::to_string(r.seed));

    cfg.set("fuzzy", "nl_centers_as_printed",
            setup.fuzzy_table.nl_centers_as_printed ? "true" : "false");
    if (!setup.rules_csv.empty()) cfg.set("fuzzy", "rules_csv", setup.rules_csv);

    cfg.set_double("pid", "kp", setup.gains.kp);
    cfg.set_double("pid", "ki", setup.gains.ki);
    cfg.set_double("pid", "kd", setup.gains.kd);

    cfg.set_double("judgment", "w1", setup.weights.w1);
    cfg.set_double("judgment", "w2", setup.weights.w2);
    cfg.set_double("judgment", "w3", setup.weights.w3);
    cfg.set_double("judgment", "w4", setup.weights.w4);
    cfg.set_double("judgment", "horizon", setup.weights.horizon);
    cfg.set("judgment", "overshoot_branch",
            setup.branch == pid::OvershootBranch::standard ? "standard"
                                                           : "as_printed");

    const auto& o = setup.cfoa;
    cfg.set("optim", "pop_size", std::to_string(o.pop_size));
    cfg.set("optim", "max_iter", std::to_string(o.max_iter));
    cfg.set_double("optim", "s", o.s);
    cfg.set_double("optim", "logistic_mu", o.logistic_mu);
    cfg.set_double("optim", "search_radius", o.search_radius);
    cfg.set_double("optim", "radius_decay", o.radius_decay);
    cfg.set("optim", "beta_mode",
            o.beta_mode == optim::BetaMode::per_iteration ? "per_iteration"
                                                          : "fixed");
    cfg.set_double("optim", "beta", o.beta);
    cfg.set("optim", "seed", std::to_string(o.seed));
    cfg.set("optim", "gain_range",
            std::to_string(o.gain_range[0]) + ", " +
                std::to_string(o.gain_range[1]) + ", " +
                std::to_string(o.gain_range[2]));

    cfg.set_double("zn", "kp_init", setup.zn.kp_init);
    cfg.set_double("zn", "kp_max", setup.zn.kp_max);

    const auto& s = setup.simc;
    cfg.set_double("sim", "dt", s.dt);
    cfg.set_double("sim", "duration", s.duration);
    cfg.set_double("sim", "velocity", s.velocity);
    cfg.set("sim", "mode", sim::sim_mode_name(s.mode));
    cfg.set("sim", "equilibrium_start", s.equilibrium_start ? "true" : "false");
    cfg.set_double("sim", "settle_skip", s.settle_skip);
    cfg.set("sim", "pid_routing",
            s.pid_routing == sim::PidRouting::clamped_sum ? "clamped_sum"
                                                          : "parallel_force");

    cfg.set_double("tune", "duration", setup.tuning.tune_duration);
    cfg.set_double("tune", "dt", setup.tuning.tune_dt);
    cfg.set("tune", "budget", std::to_string(setup.tuning.budget));
    cfg.set_double("tune", "zn_duration", setup.tuning.zn_duration);

    std::string names;
    for (const auto& scenario : setup.scenarios) {
        if (!names.empty()) names += ", ";
        names += scenario.label;
    }
    cfg.set("compare", "scenarios", names);
    cfg.set("compare", "reference", setup.reference);
}

}  // namespace susplab::config
