// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

#include "nfbt/rng.hpp"

namespace nfbt {

using cvec = std::vector<std::complex<double>>;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return 1e-3 * db_to_linear(dbm); }
inline double watts_to_dbm(double w) { return linear_to_db(w / 1e-3); }

constexpr double kSpeedOfLight = 299792458.0; // m/s

/// Base-station and link-budget parameters. Antenna indices run over
/// {0, +-1, ..., +-(N-1)/2}, so the antenna count must be odd. Power
/// quantities are stored linear (watts); the reference gain and Rician
/// factor keep their conventional dB form with linear accessors.
struct SystemConfig {
    int n_antennas = 257;
    double carrier_freq_hz = 30e9;
    double antenna_spacing_m = 0.0; // always c / (2 f)
    double tx_power_w = 1.0;
    double noise_power_w = 1e-11;
    double ref_gain_db = -62.0;      // beta_0 at 1 m
    double rician_factor_db = 30.0;  // kappa
    int n_nlos_paths = 0;            // L

    enum class NlosNormalization { aggregate, per_path };
    // aggregate: total NLoS power sits kappa below the LoS power;
    // per_path: each of the L paths individually sits kappa below.
    NlosNormalization nlos_norm = NlosNormalization::aggregate;

    static SystemConfig make(int n_antennas, double carrier_freq_hz,
                             double tx_power_dbm, double noise_power_dbm,
                             double ref_gain_db, double rician_factor_db,
                             int n_nlos_paths);

    void validate() const;

    double wavelength() const { return kSpeedOfLight / carrier_freq_hz; }
    double aperture() const { return (n_antennas - 1) * antenna_spacing_m; }
    double ref_gain_linear() const { return db_to_linear(ref_gain_db); }
    double rician_factor_linear() const { return db_to_linear(rician_factor_db); }
};

/// Polar user coordinate: range from the array center and spatial angle
/// theta0 = cos(AoD), theta0 in (-1, 1).
struct UserLocation {
    double range_m = 0.0;
    double spatial_angle = 0.0;
};

/// Rayleigh distance 2 D^2 / lambda with D the array aperture.
double rayleigh_distance(const SystemConfig& config);

/// Fresnel distance 1.2 D.
double fresnel_distance(const SystemConfig& config);

/// True when the user sits inside [fresnel_distance, rayleigh_distance].
bool in_fresnel_region(const SystemConfig& config, const UserLocation& loc);

enum class SteeringMode { exact, fresnel };

/// Near-field steering vector: element value (1/sqrt(N)) exp(-j 2 pi r_n / lambda)
/// with r_n the antenna-to-user range, exact or Fresnel-approximated. Unit norm.
cvec near_steering(const SystemConfig& config, const UserLocation& loc,
                   SteeringMode mode = SteeringMode::exact);

/// Far-field DFT steering vector: element k = (1/sqrt(N)) exp(-j pi k theta).
cvec far_steering(const SystemConfig& config, double theta);

/// Complex LoS path gain sqrt(kappa/(kappa+1)) * sqrt(beta0)/r0 * exp(-j 2 pi r0/lambda).
std::complex<double> rician_los_gain(const SystemConfig& config, const UserLocation& loc);

/// Downlink channel, stored so that the received amplitude under a
/// beamforming vector w is the conjugated inner product
///   amplitude = sum_n conj(coeffs[n]) * w[n].
/// `truth` is carried for scoring only; training code must not read it.
struct Channel {
    cvec coeffs;
    cvec los_component;
    UserLocation truth;

    int n_antennas() const { return static_cast<int>(coeffs.size()); }
};

/// Rician multipath synthesis: coeffs = sqrt(N) beta b(r0, theta0)
/// + sum_l sqrt(N/L) beta_l b(r_l, theta_l). NLoS angles are uniform on
/// (-1, 1), ranges uniform on [Z_F, Z_R], gains i.i.d. complex Gaussian
/// scaled so the NLoS power matches the Rician factor (see NlosNormalization).
/// L = 0 gives the pure LoS channel.
Channel make_channel(const SystemConfig& config, const UserLocation& loc, Rng& rng);

struct Codeword; // codebooks.hpp

/// hᴴw for a full-length weight vector.
std::complex<double> beamforming_amplitude(const Channel& ch, const cvec& weights);
std::complex<double> beamforming_amplitude(const Channel& ch, const Codeword& w);

/// One coherent pilot observation y = sqrt(P_tot) hᴴw + z with
/// z ~ CN(0, sigma^2). Pass rng = nullptr for the noiseless mode used by
/// oracle tests. Throws std::invalid_argument on dimension mismatch.
std::complex<double> received_sample(const Channel& ch, const Codeword& w,
                                     const SystemConfig& config, Rng* rng);

/// |received_sample|^2, in watts.
double received_power(const Channel& ch, const Codeword& w,
                      const SystemConfig& config, Rng* rng);

/// log2(1 + P_tot |hᴴw|^2 / sigma^2), bps/Hz.
double achievable_rate(const Channel& ch, const Codeword& w, const SystemConfig& config);
double achievable_rate(const Channel& ch, const cvec& weights, const SystemConfig& config);

/// Reference SNR gamma = N P_tot beta0 / (r0^2 sigma^2), in dB.
double reference_snr_db(const SystemConfig& config, const UserLocation& loc);

} // namespace nfbt
