#include "susplab/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "susplab/rng.hpp"

namespace susplab::optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double score_or_inf(const Objective& objective, const pid::PidGains& gains) {
    const double v = objective(gains);
    return std::isnan(v) ? kInf : v;
}

}  // namespace

double logistic_step(double c, double mu) {
    if (!(c > 0.0 && c < 1.0)) {
        throw std::invalid_argument("logistic_step requires 0 < c < 1");
    }
    return mu * c * (1.0 - c);
}

FlyLocation chaotic_update(const FlyLocation& loc,
                           const std::array<double, 3>& balance_step,
                           const std::array<double, 3>& chaos_step, double r,
                           double s) {
    if (!(s >= 0.0 && s <= 1.0)) {
        throw std::invalid_argument("balance parameter s must lie in [0, 1]");
    }
    FlyLocation next;
    next.x = loc.x + s * balance_step[0] + r * (1.0 - s) * chaos_step[0];
    next.y = loc.y + s * balance_step[1] + r * (1.0 - s) * chaos_step[1];
    next.z = loc.z + s * balance_step[2] + r * (1.0 - s) * chaos_step[2];
    return next;
}

double smell_concentration(const FlyLocation& loc, double beta) {
    const double dist = std::sqrt(loc.x * loc.x + loc.y * loc.y + loc.z * loc.z);
    if (!(dist > 0.0)) {
        throw std::invalid_argument("smell_concentration undefined at the origin");
    }
    const double trip = dist * (0.5 - beta);
    return 1.0 / dist + trip;
}

void CfoaConfig::validate() const {
    if (pop_size < 2) throw std::invalid_argument("pop_size must be >= 2");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("s must lie in [0, 1]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
    if (!(logistic_mu > 0.0)) throw std::invalid_argument("logistic_mu must be > 0");
    if (!(search_radius > 0.0)) throw std::invalid_argument("search_radius must be > 0");
    if (!(radius_decay > 0.0 && radius_decay <= 1.0)) {
        throw std::invalid_argument("radius_decay must lie in (0, 1]");
    }
    for (const double g : gain_range) {
        if (!(g > 0.0)) throw std::invalid_argument("gain_range entries must be > 0");
    }
}

namespace {

pid::PidGains location_to_gains(const FlyLocation& loc,
                                const std::array<double, 3>& range) {
    return {std::abs(loc.x) * range[0], std::abs(loc.y) * range[1],
            std::abs(loc.z) * range[2]};
}

bool gains_positive(const pid::PidGains& g) {
    return g.kp > 0.0 && g.ki > 0.0 && g.kd > 0.0;
}

// Chaos state must stay inside (0,1) and away from the map's fixed points
// and the exact maximum, which pin the orbit.
bool chaos_state_ok(double c) {
    return c > 1e-12 && c < 1.0 - 1e-12 && c != 0.25 && c != 0.5 && c != 0.75;
}

double draw_chaos_state(std::mt19937_64& rng) {
    double c = rng::unit_uniform(rng);
    while (!chaos_state_ok(c)) c = rng::unit_uniform(rng);
    return c;
}

// Fruit-fly engine shared by CFOA and the FOA baseline.
OptResult fly_engine(const Objective& objective, const CfoaConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    const int pop = cfg.pop_size;
    const double radius0 = cfg.search_radius;

    std::vector<std::array<double, 3>> chaos(static_cast<std::size_t>(pop));
    for (auto& state : chaos) {
        for (double& c : state) c = draw_chaos_state(rng);
    }

    auto random_location = [&](double scale) {
        return FlyLocation{rng::uniform(rng, -scale, scale),
                           rng::uniform(rng, -scale, scale),
                           rng::uniform(rng, -scale, scale)};
    };

    // STEP 1: swarm location and an initial cloud of flies around it.
    FlyLocation swarm = random_location(radius0);
    std::vector<FlyLocation> flies(static_cast<std::size_t>(pop));
    std::vector<double> scores(static_cast<std::size_t>(pop));
    long evals = 0;
    for (int f = 0; f < pop; ++f) {
        FlyLocation loc;
        do {
            const FlyLocation offset = random_location(radius0);
            loc = {swarm.x + offset.x, swarm.y + offset.y, swarm.z + offset.z};
        } while (!gains_positive(location_to_gains(loc, cfg.gain_range)));
        flies[static_cast<std::size_t>(f)] = loc;
        const double v =
            objective(location_to_gains(loc, cfg.gain_range));
        ++evals;
        if (std::isnan(v)) {
            throw std::runtime_error(
                "objective returned NaN at the initial swarm (fly " +
                std::to_string(f) + ")");
        }
        scores[static_cast<std::size_t>(f)] = v;
    }
    int best_idx = 0;
    for (int f = 1; f < pop; ++f) {
        if (scores[static_cast<std::size_t>(f)] < scores[static_cast<std::size_t>(best_idx)]) {
            best_idx = f;
        }
    }
    double best_score = scores[static_cast<std::size_t>(best_idx)];
    FlyLocation best_loc = flies[static_cast<std::size_t>(best_idx)];
    swarm = best_loc;

    OptResult result;
    result.history.reserve(static_cast<std::size_t>(cfg.max_iter));
    result.smell_history.reserve(static_cast<std::size_t>(cfg.max_iter));

    double radius = radius0;
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        const double beta = (cfg.beta_mode == BetaMode::per_iteration)
                                ? rng::unit_uniform(rng)
                                : cfg.beta;
        const std::array<double, 3> balance = {best_loc.x - swarm.x,
                                               best_loc.y - swarm.y,
                                               best_loc.z - swarm.z};
        // STEP 2: pre-draw every random number of the iteration, then place
        // the flies; evaluation order is then free of RNG ordering.
        for (int f = 0; f < pop; ++f) {
            FlyLocation candidate;
            do {
                const double r = rng::unit_uniform(rng);
                std::array<double, 3> step{};
                for (int axis = 0; axis < 3; ++axis) {
                    if (cfg.step_stream == StepStream::chaotic) {
                        auto& c = chaos[static_cast<std::size_t>(f)][static_cast<std::size_t>(axis)];
                        c = logistic_step(c, cfg.logistic_mu);
                        if (!chaos_state_ok(c)) c = draw_chaos_state(rng);
                        step[static_cast<std::size_t>(axis)] = (2.0 * c - 1.0) * radius;
                    } else {
                        step[static_cast<std::size_t>(axis)] =
                            rng::uniform(rng, -radius, radius);
                    }
                }
                candidate = chaotic_update(swarm, balance, step, r, cfg.s);
            } while (!gains_positive(location_to_gains(candidate, cfg.gain_range)));
            flies[static_cast<std::size_t>(f)] = candidate;
        }
        // STEP 3-4: judge every fly.
        for (int f = 0; f < pop; ++f) {
            scores[static_cast<std::size_t>(f)] = score_or_inf(
                objective, location_to_gains(flies[static_cast<std::size_t>(f)],
                                             cfg.gain_range));
            ++evals;
        }
        // STEP 5-8: keep the swarm minimum and move the swarm on improvement.
        int it_best = 0;
        for (int f = 1; f < pop; ++f) {
            if (scores[static_cast<std::size_t>(f)] < scores[static_cast<std::size_t>(it_best)]) {
                it_best = f;
            }
        }
        if (scores[static_cast<std::size_t>(it_best)] < best_score) {
            best_score = scores[static_cast<std::size_t>(it_best)];
            best_loc = flies[static_cast<std::size_t>(it_best)];
            swarm = best_loc;
        }
        result.history.push_back(best_score);
        const double dist = std::sqrt(best_loc.x * best_loc.x +
                                      best_loc.y * best_loc.y +
                                      best_loc.z * best_loc.z);
        result.smell_history.push_back(
            dist > 0.0 ? smell_concentration(best_loc, beta) : 0.0);
        radius *= cfg.radius_decay;
    }

    result.best_gains = location_to_gains(best_loc, cfg.gain_range);
    result.best_score = best_score;
    result.evals = evals;
    return result;
}

struct Candidate {
    FlyLocation loc;
    double score = kInf;
};

// Draws a location whose mapped gains are strictly positive.
FlyLocation draw_valid_location(std::mt19937_64& rng, double radius,
                                const std::array<double, 3>& range) {
    FlyLocation loc;
    do {
        loc = {rng::uniform(rng, -radius, radius),
               rng::uniform(rng, -radius, radius),
               rng::uniform(rng, -radius, radius)};
    } while (!gains_positive(location_to_gains(loc, range)));
    return loc;
}

OptResult ga_minimize(const Objective& objective, long budget,
                      std::uint64_t seed, const BaselineOptions& opts) {
    std::mt19937_64 rng(seed);
    const int pop = opts.pop_size;
    const double radius = opts.search_radius;
    const double sigma = 0.1 * radius;

    std::vector<Candidate> population(static_cast<std::size_t>(pop));
    long evals = 0;
    OptResult result;
    double best_score = kInf;
    FlyLocation best_loc{1.0, 1.0, 1.0};

    auto evaluate = [&](Candidate& c) {
        c.score = score_or_inf(objective, location_to_gains(c.loc, opts.gain_range));
        ++evals;
        if (c.score < best_score) {
            best_score = c.score;
            best_loc = c.loc;
        }
    };

    for (auto& c : population) {
        c.loc = draw_valid_location(rng, radius, opts.gain_range);
        evaluate(c);
        if (evals >= budget) break;
    }
    result.history.push_back(best_score);

    auto tournament = [&]() -> const Candidate& {
        const Candidate* best = nullptr;
        for (int k = 0; k < 3; ++k) {
            const auto& c = population[static_cast<std::size_t>(
                rng() % static_cast<std::uint64_t>(pop))];
            if (!best || c.score < best->score) best = &c;
        }
        return *best;
    };

    while (evals + 1 <= budget) {
        std::vector<Candidate> next;
        next.reserve(static_cast<std::size_t>(pop));
        // Elitism: the best survivor carries its score without a re-eval.
        const auto elite_it = std::min_element(
            population.begin(), population.end(),
            [](const Candidate& a, const Candidate& b) { return a.score < b.score; });
        next.push_back(*elite_it);
        while (static_cast<int>(next.size()) < pop && evals < budget) {
            const Candidate& pa = tournament();
            const Candidate& pb = tournament();
            Candidate child;
            do {
                auto blend = [&](double a, double b) {
                    const double lo = std::min(a, b), hi = std::max(a, b);
                    const double d = hi - lo;
                    return rng::uniform(rng, lo - 0.5 * d, hi + 0.5 * d);
                };
                child.loc = {blend(pa.loc.x, pb.loc.x), blend(pa.loc.y, pb.loc.y),
                             blend(pa.loc.z, pb.loc.z)};
                auto mutate = [&](double v) {
                    return (rng::unit_uniform(rng) < 0.2)
                               ? v + sigma * rng::normal(rng)
                               : v;
                };
                child.loc = {mutate(child.loc.x), mutate(child.loc.y),
                             mutate(child.loc.z)};
            } while (!gains_positive(location_to_gains(child.loc, opts.gain_range)));
            evaluate(child);
            next.push_back(child);
        }
        population = std::move(next);
        result.history.push_back(best_score);
    }

    result.best_gains = location_to_gains(best_loc, opts.gain_range);
    result.best_score = best_score;
    result.evals = evals;
    return result;
}

OptResult pso_minimize(const Objective& objective, long budget,
                       std::uint64_t seed, const BaselineOptions& opts) {
    std::mt19937_64 rng(seed);
    const int pop = opts.pop_size;
    const double radius = opts.search_radius;
    const double inertia = 0.729;
    const double c1 = 1.49445, c2 = 1.49445;

    struct Particle {
        std::array<double, 3> x{}, v{}, pbest{};
        double pbest_score = kInf;
    };
    std::vector<Particle> swarm(static_cast<std::size_t>(pop));
    long evals = 0;
    double best_score = kInf;
    std::array<double, 3> gbest{1.0, 1.0, 1.0};
    OptResult result;

    auto to_loc = [](const std::array<double, 3>& x) {
        return FlyLocation{x[0], x[1], x[2]};
    };
    auto evaluate = [&](Particle& p) {
        const double s = score_or_inf(
            objective, location_to_gains(to_loc(p.x), opts.gain_range));
        ++evals;
        if (s < p.pbest_score) {
            p.pbest_score = s;
            p.pbest = p.x;
        }
        if (s < best_score) {
            best_score = s;
            gbest = p.x;
        }
    };

    for (auto& p : swarm) {
        const FlyLocation loc = draw_valid_location(rng, radius, opts.gain_range);
        p.x = {loc.x, loc.y, loc.z};
        for (double& v : p.v) v = rng::uniform(rng, -0.1 * radius, 0.1 * radius);
        evaluate(p);
        if (evals >= budget) break;
    }
    result.history.push_back(best_score);

    while (evals + 1 <= budget) {
        for (auto& p : swarm) {
            if (evals >= budget) break;
            bool valid = false;
            std::array<double, 3> nx{}, nv{};
            do {
                for (int a = 0; a < 3; ++a) {
                    const double r1 = rng::unit_uniform(rng);
                    const double r2 = rng::unit_uniform(rng);
                    nv[static_cast<std::size_t>(a)] =
                        inertia * p.v[static_cast<std::size_t>(a)] +
                        c1 * r1 * (p.pbest[static_cast<std::size_t>(a)] -
                                   p.x[static_cast<std::size_t>(a)]) +
                        c2 * r2 * (gbest[static_cast<std::size_t>(a)] -
                                   p.x[static_cast<std::size_t>(a)]);
                    nv[static_cast<std::size_t>(a)] = std::clamp(
                        nv[static_cast<std::size_t>(a)], -radius, radius);
                    nx[static_cast<std::size_t>(a)] =
                        p.x[static_cast<std::size_t>(a)] + nv[static_cast<std::size_t>(a)];
                }
                valid = gains_positive(
                    location_to_gains(to_loc(nx), opts.gain_range));
            } while (!valid);
            p.x = nx;
            p.v = nv;
            evaluate(p);
        }
        result.history.push_back(best_score);
    }

    result.best_gains =
        location_to_gains(to_loc(gbest), opts.gain_range);
    result.best_score = best_score;
    result.evals = evals;
    return result;
}

OptResult bfo_minimize(const Objective& objective, long budget,
                       std::uint64_t seed, const BaselineOptions& opts) {
    std::mt19937_64 rng(seed);
    const int pop = std::max(2, opts.pop_size - opts.pop_size % 2);
    const double step = 0.1 * opts.search_radius;
    const int n_swim = 4;
    const int n_repro = 4;
    const int n_elim = 2;
    const double p_elim = 0.25;

    std::vector<Candidate> colony(static_cast<std::size_t>(pop));
    long evals = 0;
    double best_score = kInf;
    FlyLocation best_loc{1.0, 1.0, 1.0};
    OptResult result;

    auto evaluate = [&](Candidate& c) {
        c.score = score_or_inf(objective, location_to_gains(c.loc, opts.gain_range));
        ++evals;
        if (c.score < best_score) {
            best_score = c.score;
            best_loc = c.loc;
        }
    };
    auto unit_direction = [&]() {
        std::array<double, 3> d{};
        double norm = 0.0;
        do {
            for (double& v : d) v = rng::uniform(rng, -1.0, 1.0);
            norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        } while (norm < 1e-12);
        for (double& v : d) v /= norm;
        return d;
    };

    for (auto& c : colony) {
        c.loc = draw_valid_location(rng, opts.search_radius, opts.gain_range);
        evaluate(c);
        if (evals >= budget) break;
    }
    result.history.push_back(best_score);

    // Chemotaxis steps per reproduction stage, sized so the nested schedule
    // roughly exhausts the budget; the hard guard below makes it exact.
    const long per_bact = std::max<long>(1, (budget - pop) / (pop * n_repro * n_elim * 2));
    const int n_chemo = static_cast<int>(per_bact);

    for (int elim = 0; elim < n_elim && evals < budget; ++elim) {
        for (int repro = 0; repro < n_repro && evals < budget; ++repro) {
            for (int chemo = 0; chemo < n_chemo && evals < budget; ++chemo) {
                for (auto& c : colony) {
                    if (evals >= budget) break;
                    const auto dir = unit_direction();
                    Candidate trial = c;
                    auto advance = [&](Candidate& t) {
                        FlyLocation moved;
                        do {
                            moved = {t.loc.x + step * dir[0],
                                     t.loc.y + step * dir[1],
                                     t.loc.z + step * dir[2]};
                            if (!gains_positive(
                                    location_to_gains(moved, opts.gain_range))) {
                                // A blocked direction keeps the bacterium put.
                                moved = t.loc;
                                break;
                            }
                            break;
                        } while (true);
                        t.loc = moved;
                    };
                    advance(trial);
                    evaluate(trial);
                    int swims = 0;
                    while (trial.score < c.score && swims < n_swim &&
                           evals < budget) {
                        c = trial;
                        advance(trial);
                        evaluate(trial);
                        ++swims;
                    }
                    if (trial.score < c.score) c = trial;
                    result.history.push_back(best_score);
                }
            }
            // Reproduction: the healthier half splits, the rest dies.
            std::sort(colony.begin(), colony.end(),
                      [](const Candidate& a, const Candidate& b) {
                          return a.score < b.score;
                      });
            for (int i = 0; i < pop / 2; ++i) {
                colony[static_cast<std::size_t>(pop / 2 + i)] =
                    colony[static_cast<std::size_t>(i)];
            }
        }
        // Elimination-dispersal.
        for (auto& c : colony) {
            if (evals >= budget) break;
            if (rng::unit_uniform(rng) < p_elim) {
                c.loc = draw_valid_location(rng, opts.search_radius, opts.gain_range);
                evaluate(c);
            }
        }
    }
    if (result.history.empty() || result.history.back() != best_score) {
        result.history.push_back(best_score);
    }

    result.best_gains = location_to_gains(best_loc, opts.gain_range);
    result.best_score = best_score;
    result.evals = evals;
    return result;
}

}  // namespace

OptResult cfoa_minimize(const Objective& objective, const CfoaConfig& cfg) {
    return fly_engine(objective, cfg);
}

const char* baseline_name(BaselineMethod method) {
    switch (method) {
        case BaselineMethod::foa: return "foa";
        case BaselineMethod::ga: return "ga";
        case BaselineMethod::pso: return "pso";
        case BaselineMethod::bfo: return "bfo";
    }
    return "unknown";
}

std::optional<BaselineMethod> baseline_from_name(std::string_view name) {
    if (name == "foa") return BaselineMethod::foa;
    if (name == "ga") return BaselineMethod::ga;
    if (name == "pso") return BaselineMethod::pso;
    if (name == "bfo") return BaselineMethod::bfo;
    return std::nullopt;
}

OptResult baseline_minimize(BaselineMethod method, const Objective& objective,
                            long budget, std::uint64_t seed,
                            const BaselineOptions& opts) {
    if (budget < opts.pop_size) {
        throw std::invalid_argument(
            "budget must cover at least one population evaluation");
    }
    switch (method) {
        case BaselineMethod::foa: {
            CfoaConfig cfg;
            cfg.pop_size = opts.pop_size;
            cfg.max_iter = std::max<int>(
                1, static_cast<int>((budget - opts.pop_size) / opts.pop_size));
            cfg.s = 0.0;
            cfg.step_stream = StepStream::plain;
            cfg.search_radius = opts.search_radius;
            cfg.radius_decay = opts.radius_decay;
            cfg.seed = seed;
            cfg.gain_range = opts.gain_range;
            return fly_engine(objective, cfg);
        }
        case BaselineMethod::ga:
            return ga_minimize(objective, budget, seed, opts);
        case BaselineMethod::pso:
            return pso_minimize(objective, budget, seed, opts);
        case BaselineMethod::bfo:
            return bfo_minimize(objective, budget, seed, opts);
    }
    throw std::invalid_argument("unknown baseline method");
}

namespace {

struct PeakInfo {
    std::vector<double> amplitudes;  ///< about the late-series mean
    std::vector<double> times;
};

enum class Envelope { no_oscillation, decaying, sustained, growing };

PeakInfo find_peaks(const std::vector<double>& y, double dt) {
    PeakInfo info;
    if (y.size() < 8) return info;
    double center = 0.0;
    const std::size_t tail = y.size() / 2;
    for (std::size_t i = tail; i < y.size(); ++i) center += y[i];
    center /= static_cast<double>(y.size() - tail);

    // Local maxima of the deviation from the series center.
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        const double prev = y[i - 1] - center;
        const double cur = y[i] - center;
        const double next = y[i + 1] - center;
        if (cur > 0.0 && cur >= prev && cur > next) {
            info.amplitudes.push_back(cur);
            info.times.push_back(static_cast<double>(i) * dt);
        }
    }
    return info;
}

Envelope classify(const std::vector<double>& y, double dt, double slope_tol) {
    for (const double v : y) {
        if (!std::isfinite(v)) return Envelope::growing;
    }
    PeakInfo peaks = find_peaks(y, dt);
    // Skip the start-up transient.
    const std::size_t skip = peaks.amplitudes.size() / 4;
    const std::size_t n = peaks.amplitudes.size() - skip;
    if (n < 3) return Envelope::no_oscillation;

    double span = 0.0;
    for (std::size_t i = skip; i < peaks.amplitudes.size(); ++i) {
        span = std::max(span, peaks.amplitudes[i]);
    }
    if (span <= 1e-12) return Envelope::no_oscillation;

    // Least-squares slope of log amplitude vs peak index.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t i = skip; i < peaks.amplitudes.size(); ++i) {
        if (peaks.amplitudes[i] <= 0.0) continue;
        const double xi = static_cast<double>(m);
        const double yi = std::log(peaks.amplitudes[i]);
        sx += xi;
        sy += yi;
        sxx += xi * xi;
        sxy += xi * yi;
        ++m;
    }
    if (m < 3) return Envelope::no_oscillation;
    const double denom = static_cast<double>(m) * sxx - sx * sx;
    if (denom == 0.0) return Envelope::sustained;
    const double slope = (static_cast<double>(m) * sxy - sx * sy) / denom;
    if (slope > slope_tol) return Envelope::growing;
    if (slope < -slope_tol) return Envelope::decaying;
    return Envelope::sustained;
}

double measure_period(const std::vector<double>& y, double dt) {
    PeakInfo peaks = find_peaks(y, dt);
    const std::size_t n = peaks.times.size();
    if (n < 3) return 0.0;
    const std::size_t skip = std::max<std::size_t>(1, n / 4);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = skip; i + 1 < n; ++i) {
        total += peaks.times[i + 1] - peaks.times[i];
        ++count;
    }
    return count ? total / static_cast<double>(count) : 0.0;
}

}  // namespace

ZnResult zn_tune(const std::function<std::vector<double>(double)>& closed_loop,
                 double dt, const ZnOptions& opts) {
    if (!(dt > 0.0)) throw std::invalid_argument("zn_tune requires dt > 0");

    // Doubling ladder: bracket the stable/growing transition.
    double kp_lo = 0.0;
    double kp_hi = 0.0;
    double kp = opts.kp_init;
    while (kp <= opts.kp_max) {
        const Envelope env = classify(closed_loop(kp), dt, opts.envelope_slope_tol);
        if (env == Envelope::growing) {
            kp_hi = kp;
            break;
        }
        kp_lo = kp;
        kp *= 2.0;
    }
    if (kp_hi == 0.0) {
        throw std::runtime_error(
            "zn_tune found no sustained oscillation below the gain cap");
    }
    if (kp_lo == 0.0) kp_lo = kp_hi / 4.0;

    // Geometric bisection toward the marginal gain.
    for (int it = 0; it < opts.bisect_iters; ++it) {
        const double mid = std::sqrt(kp_lo * kp_hi);
        const Envelope env = classify(closed_loop(mid), dt, opts.envelope_slope_tol);
        if (env == Envelope::sustained) {
            kp_lo = mid;
            kp_hi = mid;
            break;
        }
        if (env == Envelope::growing) {
            kp_hi = mid;
        } else {
            kp_lo = mid;
        }
        if (kp_hi / kp_lo < 1.0 + 1e-4) break;
    }
    const double ku = std::sqrt(kp_lo * kp_hi);

    const double tu = measure_period(closed_loop(ku), dt);
    if (!(tu > 0.0)) {
        throw std::runtime_error("zn_tune could not measure the ultimate period");
    }

    ZnResult result;
    result.ultimate_gain = ku;
    result.ultimate_period = tu;
    result.gains.kp = 0.6 * ku;
    result.gains.ki = 2.0 * result.gains.kp / tu;
    result.gains.kd = result.gains.kp * tu / 8.0;
    result.gains.validate();
    return result;
}

}  // namespace susplab::optim
