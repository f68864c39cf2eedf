// Stochastic road elevation: two-slope roughness PSD, seeded sinusoidal
// synthesis, and a Welch periodogram for validating generated profiles.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace susplab::road {

/// Two-slope roughness spectrum. Defaults describe a class-C road:
/// S(omega) = c_ref * (omega/omega_ref)^-w_low   for omega <= omega_ref
///          = c_ref * (omega/omega_ref)^-w_high  for omega >  omega_ref
struct RoadSpec {
    double c_ref = 256e-6;    ///< degree of roughness at omega_ref (m^2/(cycles/m))
    double omega_ref = 0.1;   ///< reference spatial frequency (cycles/m)
    double w_low = 2.0;       ///< waviness below omega_ref
    double w_high = 1.5;      ///< waviness above omega_ref
    double omega_min = 0.01;  ///< synthesis band lower edge (cycles/m)
    double omega_max = 10.0;  ///< synthesis band upper edge (cycles/m)
    int n_harmonics = 500;    ///< superposed sinusoids
    std::uint64_t seed = 0;   ///< RNG seed for the random phases

    void validate() const;
};

/// Sampled elevation signal produced for one vehicle speed.
struct RoadProfile {
    double dt = 0.0;              ///< sample period (s)
    std::vector<double> samples;  ///< elevation z_g (m)
    double velocity = 0.0;        ///< forward speed (m/s)
};

struct PsdPoint {
    double omega;  ///< spatial frequency (cycles/m)
    double power;  ///< PSD estimate (m^2/(cycles/m))
};

/// Spectrum value at a spatial frequency. Throws std::invalid_argument for
/// omega <= 0.
double psd_value(const RoadSpec& spec, double omega);

/// Sinusoidal-superposition synthesis: log-spaced frequencies over
/// [omega_min, omega_max], amplitudes sqrt(2*S*dOmega), uniform random phases
/// from the seed. Identical arguments yield bitwise-identical profiles.
RoadProfile generate_profile(const RoadSpec& spec, double velocity, double dt,
                             double duration);

/// Welch-averaged periodogram of the elevation signal, re-expressed against
/// spatial frequency (omega = f/velocity, power scaled by velocity).
/// Hann window, 50% overlap, at least 4 segments. `nfft` forces the segment
/// length (rounded down to a power of two); 0 picks one automatically.
/// Throws std::invalid_argument for profiles shorter than 64 samples.
std::vector<PsdPoint> estimate_psd(const RoadProfile& profile,
                                   std::size_t nfft = 0);

/// Two-column CSV round trip: header "time_s,elevation_m".
void write_csv(const RoadProfile& profile, std::ostream& out);
RoadProfile read_csv(std::istream& in, double velocity);

}  // namespace susplab::road
