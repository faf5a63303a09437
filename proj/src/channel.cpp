// SPDX-License-Identifier: Apache-2.0

#include "nfbt/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nfbt/codebooks.hpp"

namespace nfbt {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

void check_location(const UserLocation& loc) {
    if (!(loc.range_m > 0.0))
        throw std::domain_error("user range must be positive, got " +
                                std::to_string(loc.range_m));
    if (std::abs(loc.spatial_angle) >= 1.0)
        throw std::domain_error("spatial angle must lie in (-1, 1), got " +
                                std::to_string(loc.spatial_angle));
}
} // namespace

SystemConfig SystemConfig::make(int n_antennas, double carrier_freq_hz,
                                double tx_power_dbm, double noise_power_dbm,
                                double ref_gain_db, double rician_factor_db,
                                int n_nlos_paths) {
    SystemConfig cfg;
    cfg.n_antennas = n_antennas;
    cfg.carrier_freq_hz = carrier_freq_hz;
    cfg.antenna_spacing_m = kSpeedOfLight / (2.0 * carrier_freq_hz);
    cfg.tx_power_w = dbm_to_watts(tx_power_dbm);
    cfg.noise_power_w = dbm_to_watts(noise_power_dbm);
    cfg.ref_gain_db = ref_gain_db;
    cfg.rician_factor_db = rician_factor_db;
    cfg.n_nlos_paths = n_nlos_paths;
    cfg.validate();
    return cfg;
}

void SystemConfig::validate() const {
    if (n_antennas < 1 || n_antennas % 2 == 0)
        throw std::invalid_argument("n_antennas must be odd (antenna indices are "
                                    "0, +-1, ..., +-(N-1)/2), got " +
                                    std::to_string(n_antennas));
    if (!(carrier_freq_hz > 0.0))
        throw std::invalid_argument("carrier frequency must be positive");
    double half_wave = kSpeedOfLight / (2.0 * carrier_freq_hz);
    if (std::abs(antenna_spacing_m - half_wave) > 1e-12 * half_wave)
        throw std::invalid_argument("antenna spacing must equal lambda/2 = c/(2f)");
    if (!(tx_power_w > 0.0) || !(noise_power_w > 0.0))
        throw std::invalid_argument("transmit and noise powers must be positive");
    if (n_nlos_paths < 0)
        throw std::invalid_argument("number of NLoS paths must be non-negative");
}

double rayleigh_distance(const SystemConfig& config) {
    double d = config.aperture();
    return 2.0 * d * d / config.wavelength();
}

double fresnel_distance(const SystemConfig& config) {
    return 1.2 * config.aperture();
}

bool in_fresnel_region(const SystemConfig& config, const UserLocation& loc) {
    return loc.range_m >= fresnel_distance(config) &&
           loc.range_m <= rayleigh_distance(config);
}

cvec near_steering(const SystemConfig& config, const UserLocation& loc,
                   SteeringMode mode) {
    check_location(loc);
    const int n = config.n_antennas;
    const double d0 = config.antenna_spacing_m;
    const double r0 = loc.range_m;
    const double th = loc.spatial_angle;
    const double wavenum = 2.0 * kPi / config.wavelength();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const int half = (n - 1) / 2;

    cvec v(n);
    for (int i = 0; i < n; ++i) {
        // vector slot i holds antenna index (N-1)/2 - i, so that the phase
        // ramp of a far user matches the DFT codeword ordering
        double idx = static_cast<double>(half - i);
        double rn;
        if (mode == SteeringMode::exact) {
            rn = std::sqrt(r0 * r0 + idx * idx * d0 * d0 - 2.0 * r0 * th * idx * d0);
        } else {
            rn = r0 - idx * d0 * th + idx * idx * d0 * d0 * (1.0 - th * th) / (2.0 * r0);
        }
        v[i] = std::polar(scale, -wavenum * rn);
    }
    return v;
}

cvec far_steering(const SystemConfig& config, double theta) {
    const int n = config.n_antennas;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    cvec v(n);
    for (int k = 0; k < n; ++k)
        v[k] = std::polar(scale, -kPi * k * theta);
    return v;
}

std::complex<double> rician_los_gain(const SystemConfig& config,
                                     const UserLocation& loc) {
    check_location(loc);
    double kappa = config.rician_factor_linear();
    double mag = std::sqrt(kappa / (kappa + 1.0)) *
                 std::sqrt(config.ref_gain_linear()) / loc.range_m;
    double phase = -2.0 * kPi * loc.range_m / config.wavelength();
    return std::polar(mag, phase);
}

Channel make_channel(const SystemConfig& config, const UserLocation& loc, Rng& rng) {
    config.validate();
    check_location(loc);

    const int n = config.n_antennas;
    const double root_n = std::sqrt(static_cast<double>(n));
    std::complex<double> beta = rician_los_gain(config, loc);

    Channel ch;
    ch.truth = loc;
    ch.los_component = near_steering(config, loc, SteeringMode::exact);
    for (auto& c : ch.los_component)
        c *= root_n * beta;
    ch.coeffs = ch.los_component;

    const int l_paths = config.n_nlos_paths;
    if (l_paths > 0) {
        double kappa = config.rician_factor_linear();
        double alpha = std::sqrt(config.ref_gain_linear()) / loc.range_m;
        // aggregate: sum_l (N/L) E|beta_l|^2 = N alpha^2 / (kappa+1)
        double gain_scale = alpha / std::sqrt(kappa + 1.0);
        if (config.nlos_norm == SystemConfig::NlosNormalization::per_path)
            gain_scale *= std::sqrt(static_cast<double>(l_paths));
        double path_scale = std::sqrt(static_cast<double>(n) / l_paths);
        double z_lo = fresnel_distance(config);
        double z_hi = rayleigh_distance(config);
        for (int l = 0; l < l_paths; ++l) {
            UserLocation scatter;
            scatter.spatial_angle = rng.uniform(-1.0, 1.0);
            scatter.range_m = rng.uniform(z_lo, z_hi);
            std::complex<double> gain = gain_scale * rng.complex_normal(1.0);
            cvec steer = near_steering(config, scatter, SteeringMode::exact);
            for (int i = 0; i < n; ++i)
                ch.coeffs[i] += path_scale * gain * steer[i];
        }
    }
    return ch;
}

std::complex<double> beamforming_amplitude(const Channel& ch, const cvec& weights) {
    if (weights.size() != ch.coeffs.size())
        throw std::invalid_argument("beamforming vector length " +
                                    std::to_string(weights.size()) +
                                    " does not match channel dimension " +
                                    std::to_string(ch.coeffs.size()));
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        acc += std::conj(ch.coeffs[i]) * weights[i];
    return acc;
}

std::complex<double> beamforming_amplitude(const Channel& ch, const Codeword& w) {
    return beamforming_amplitude(ch, w.weights);
}

std::complex<double> received_sample(const Channel& ch, const Codeword& w,
                                     const SystemConfig& config, Rng* rng) {
    std::complex<double> y =
        std::sqrt(config.tx_power_w) * beamforming_amplitude(ch, w);
    if (rng != nullptr)
        y += rng->complex_normal(config.noise_power_w);
    return y;
}

double received_power(const Channel& ch, const Codeword& w,
                      const SystemConfig& config, Rng* rng) {
    return std::norm(received_sample(ch, w, config, rng));
}

double achievable_rate(const Channel& ch, const cvec& weights,
                       const SystemConfig& config) {
    double signal = config.tx_power_w * std::norm(beamforming_amplitude(ch, weights));
    return std::log2(1.0 + signal / config.noise_power_w);
}

double achievable_rate(const Channel& ch, const Codeword& w,
                       const SystemConfig& config) {
    return achievable_rate(ch, w.weights, config);
}

double reference_snr_db(const SystemConfig& config, const UserLocation& loc) {
    check_location(loc);
    double gamma = config.n_antennas * config.tx_power_w * config.ref_gain_linear() /
                   (loc.range_m * loc.range_m * config.noise_power_w);
    return linear_to_db(gamma);
}

} // namespace nfbt
