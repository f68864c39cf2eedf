#include "susplab/road.hpp"

#include <fftw3.h>

#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "susplab/rng.hpp"

namespace susplab::road {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void RoadSpec::validate() const {
    if (!(c_ref >= 0.0)) throw std::invalid_argument("c_ref must be >= 0");
    if (!(0.0 < omega_min && omega_min < omega_ref && omega_ref < omega_max)) {
        throw std::invalid_argument(
            "road band must satisfy 0 < omega_min < omega_ref < omega_max");
    }
    if (n_harmonics < 1) throw std::invalid_argument("n_harmonics must be >= 1");
    if (!(w_low > 0.0) || !(w_high > 0.0)) {
        throw std::invalid_argument("waviness exponents must be > 0");
    }
}

double psd_value(const RoadSpec& spec, double omega) {
    if (!(omega > 0.0)) {
        throw std::invalid_argument("psd_value requires omega > 0");
    }
    const double ratio = omega / spec.omega_ref;
    const double exponent = (omega <= spec.omega_ref) ? -spec.w_low : -spec.w_high;
    return spec.c_ref * std::pow(ratio, exponent);
}

RoadProfile generate_profile(const RoadSpec& spec, double velocity, double dt,
                             double duration) {
    spec.validate();
    if (!(velocity > 0.0)) throw std::invalid_argument("velocity must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(duration >= dt)) throw std::invalid_argument("duration must be >= dt");

    const std::size_t n = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
    if (n < 2) throw std::invalid_argument("profile would have < 2 samples");

    // Log-spaced center frequencies with bin edges at geometric midpoints.
    const int k = spec.n_harmonics;
    const double log_lo = std::log(spec.omega_min);
    const double log_hi = std::log(spec.omega_max);
    std::vector<double> omega(k), width(k);
    for (int i = 0; i < k; ++i) {
        const double t = (k == 1) ? 0.5 : (i + 0.5) / k;
        omega[i] = std::exp(log_lo + t * (log_hi - log_lo));
        const double e_lo = std::exp(log_lo + (static_cast<double>(i) / k) * (log_hi - log_lo));
        const double e_hi = std::exp(log_lo + (static_cast<double>(i + 1) / k) * (log_hi - log_lo));
        width[i] = e_hi - e_lo;
    }

    std::mt19937_64 rng(spec.seed);
    std::vector<double> amp(k), phase(k), omega_t(k);
    for (int i = 0; i < k; ++i) {
        amp[i] = std::sqrt(2.0 * psd_value(spec, omega[i]) * width[i]);
        phase[i] = kTwoPi * rng::unit_uniform(rng);
        omega_t[i] = kTwoPi * omega[i] * velocity;  // temporal angular frequency
    }

    RoadProfile profile;
    profile.dt = dt;
    profile.velocity = velocity;
    profile.samples.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = static_cast<double>(j) * dt;
        double z = 0.0;
        for (int i = 0; i < k; ++i) {
            z += amp[i] * std::sin(omega_t[i] * t + phase[i]);
        }
        profile.samples[j] = z;
    }
    return profile;
}

namespace {

std::size_t pow2_floor(std::size_t v) {
    std::size_t p = 1;
    while (p * 2 <= v) p *= 2;
    return p;
}

// FFTW's planner is not thread-safe; serialize plan creation/destruction.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

std::vector<PsdPoint> estimate_psd(const RoadProfile& profile, std::size_t nfft) {
    const std::size_t n = profile.samples.size();
    if (n < 64) {
        throw std::invalid_argument("estimate_psd requires at least 64 samples");
    }
    if (!(profile.dt > 0.0) || !(profile.velocity > 0.0)) {
        throw std::invalid_argument("estimate_psd requires dt > 0 and velocity > 0");
    }

    std::size_t seg = nfft ? pow2_floor(nfft) : pow2_floor(n / 2);
    if (seg > 8192 && nfft == 0) seg = 8192;
    // Guarantee >= 4 half-overlapping segments.
    while (seg > 16 && (n - seg) / (seg / 2) + 1 < 4) seg /= 2;
    if (seg < 16) seg = 16;
    if (seg > n) {
        throw std::invalid_argument("estimate_psd segment longer than profile");
    }
    const std::size_t hop = seg / 2;
    const std::size_t n_seg = (n - seg) / hop + 1;

    std::vector<double> window(seg);
    double win_power = 0.0;
    for (std::size_t i = 0; i < seg; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(i) /
                                          static_cast<double>(seg - 1)));
        win_power += window[i] * window[i];
    }

    const std::size_t n_bins = seg / 2 + 1;
    std::vector<double> psd_t(n_bins, 0.0);

    double* in = fftw_alloc_real(seg);
    fftw_complex* out = fftw_alloc_complex(n_bins);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(seg), in, out, FFTW_ESTIMATE);
    }

    const double fs = 1.0 / profile.dt;
    for (std::size_t s = 0; s < n_seg; ++s) {
        const double* x = profile.samples.data() + s * hop;
        double mean = 0.0;
        for (std::size_t i = 0; i < seg; ++i) mean += x[i];
        mean /= static_cast<double>(seg);
        for (std::size_t i = 0; i < seg; ++i) in[i] = (x[i] - mean) * window[i];
        fftw_execute(plan);
        for (std::size_t j = 0; j < n_bins; ++j) {
            const double re = out[j][0];
            const double im = out[j][1];
            const double one_sided = (j == 0 || j == n_bins - 1) ? 1.0 : 2.0;
            psd_t[j] += one_sided * (re * re + im * im) / (fs * win_power);
        }
    }
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);

    std::vector<PsdPoint> result(n_bins);
    const double df = fs / static_cast<double>(seg);
    for (std::size_t j = 0; j < n_bins; ++j) {
        const double f = df * static_cast<double>(j);
        result[j].omega = f / profile.velocity;
        result[j].power = profile.velocity * psd_t[j] / static_cast<double>(n_seg);
    }
    return result;
}

void write_csv(const RoadProfile& profile, std::ostream& out) {
    out << "time_s,elevation_m\n";
    char buf[64];
    for (std::size_t i = 0; i < profile.samples.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n",
                      static_cast<double>(i) * profile.dt, profile.samples[i]);
        out << buf;
    }
}

RoadProfile read_csv(std::istream& in, double velocity) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("road CSV is empty");
    }
    RoadProfile profile;
    profile.velocity = velocity;
    std::vector<double> times;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("road CSV row missing comma: " + line);
        }
        times.push_back(std::stod(line.substr(0, comma)));
        profile.samples.push_back(std::stod(line.substr(comma + 1)));
    }
    if (profile.samples.size() < 2) {
        throw std::invalid_argument("road CSV must hold at least 2 samples");
    }
    profile.dt = times[1] - times[0];
    if (!(profile.dt > 0.0)) {
        throw std::invalid_argument("road CSV times must be increasing");
    }
    return profile;
}

}  // namespace susplab::road
