// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "nfbt/channel.hpp"
#include "nfbt/codebooks.hpp"

using namespace nfbt;

namespace {

SystemConfig default_config(int n_paths = 0) {
    return SystemConfig::make(257, 30e9, 30.0, -80.0, -62.0, 30.0, n_paths);
}

double norm_sq(const cvec& v) {
    double s = 0;
    for (const auto& c : v)
        s += std::norm(c);
    return s;
}

Codeword as_codeword(cvec w) {
    Codeword c;
    c.weights = std::move(w);
    c.active_mask.assign(c.weights.size(), true);
    return c;
}

// largest per-element phase difference after removing the best global phase
double aligned_phase_dev(const cvec& a, const cvec& b) {
    std::complex<double> in = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        in += std::conj(b[i]) * a[i];
    double ph = std::arg(in);
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst,
                         std::abs(std::arg(a[i] * std::conj(b[i]) *
                                           std::polar(1.0, -ph))));
    return worst;
}

} // namespace

TEST_CASE("config construction and validation") {
    SystemConfig cfg = default_config();
    CHECK(cfg.antenna_spacing_m ==
          doctest::Approx(kSpeedOfLight / 60e9).epsilon(1e-15));
    CHECK(cfg.tx_power_w == doctest::Approx(1.0));
    CHECK(cfg.noise_power_w == doctest::Approx(1e-11));

    CHECK_THROWS_AS(SystemConfig::make(256, 30e9, 30, -80, -62, 30, 0),
                    std::invalid_argument); // even N
    SystemConfig bad = cfg;
    bad.antenna_spacing_m *= 1.001;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("rayleigh distance") {
    SystemConfig cfg = default_config();
    CHECK(std::abs(rayleigh_distance(cfg) - 328.0) < 1.0);

    SystemConfig tiny = SystemConfig::make(3, 30e9, 30, -80, -62, 30, 0);
    CHECK(rayleigh_distance(tiny) ==
          doctest::Approx(2.0 * tiny.wavelength()).epsilon(1e-12));

    // doubling N-1 quadruples
    SystemConfig a = SystemConfig::make(129, 30e9, 30, -80, -62, 30, 0);
    SystemConfig b = SystemConfig::make(257, 30e9, 30, -80, -62, 30, 0);
    CHECK(rayleigh_distance(b) ==
          doctest::Approx(4.0 * rayleigh_distance(a)).epsilon(1e-12));
}

TEST_CASE("fresnel distance") {
    SystemConfig cfg = default_config();
    // 1.2 * 256 * d0 with d0 = 5 mm at 30 GHz (exact c shifts it ~1 mm)
    CHECK(std::abs(fresnel_distance(cfg) - 1.536) < 0.002);

    SystemConfig one = SystemConfig::make(1, 30e9, 30, -80, -62, 30, 0);
    CHECK(fresnel_distance(one) == 0.0);

    SystemConfig a = SystemConfig::make(129, 30e9, 30, -80, -62, 30, 0);
    CHECK(fresnel_distance(cfg) ==
          doctest::Approx(2.0 * fresnel_distance(a)).epsilon(1e-12));
}

TEST_CASE("near-field steering vector") {
    SystemConfig cfg = default_config();
    UserLocation loc{20.0, 0.5};

    SUBCASE("center antenna carries only the r0 phase, both modes") {
        int mid = (cfg.n_antennas - 1) / 2;
        auto expect = std::polar(1.0 / std::sqrt(257.0),
                                 -2.0 * M_PI * loc.range_m / cfg.wavelength());
        for (auto mode : {SteeringMode::exact, SteeringMode::fresnel}) {
            cvec v = near_steering(cfg, loc, mode);
            CHECK(std::abs(v[mid] - expect) < 1e-12);
        }
    }

    SUBCASE("unit norm") {
        for (double th : {-0.8, 0.0, 0.62}) {
            cvec v = near_steering(cfg, {9.5, th});
            CHECK(std::abs(std::sqrt(norm_sq(v)) - 1.0) < 1e-12);
        }
    }

    SUBCASE("far-field limit matches far_steering up to a global phase") {
        cvec v = near_steering(cfg, {1e6, 0.4});
        CHECK(aligned_phase_dev(v, far_steering(cfg, 0.4)) < 1e-3);
    }

    SUBCASE("deviation from far_steering shrinks monotonically with range") {
        cvec f = far_steering(cfg, 0.4);
        double d100 = aligned_phase_dev(near_steering(cfg, {1e2, 0.4}), f);
        double d1k = aligned_phase_dev(near_steering(cfg, {1e3, 0.4}), f);
        double d10k = aligned_phase_dev(near_steering(cfg, {1e4, 0.4}), f);
        CHECK(d100 > d1k);
        CHECK(d1k > d10k);
    }

    SUBCASE("fresnel mode tracks the exact ranges") {
        // measured 0.0774 rad at (20 m, 0.5); frozen at 0.08
        cvec e = near_steering(cfg, loc, SteeringMode::exact);
        cvec f = near_steering(cfg, loc, SteeringMode::fresnel);
        double worst = 0;
        for (std::size_t i = 0; i < e.size(); ++i)
            worst = std::max(worst, std::abs(std::arg(e[i] * std::conj(f[i]))));
        CHECK(worst < 0.08);
    }

    SUBCASE("invalid locations rejected") {
        CHECK_THROWS_AS(near_steering(cfg, {0.0, 0.0}), std::domain_error);
        CHECK_THROWS_AS(near_steering(cfg, {-5.0, 0.0}), std::domain_error);
        CHECK_THROWS_AS(near_steering(cfg, {20.0, 1.0}), std::domain_error);
    }
}

TEST_CASE("far-field steering vector") {
    SystemConfig cfg = default_config();

    SUBCASE("theta = 0 gives a flat vector") {
        cvec v = far_steering(cfg, 0.0);
        for (const auto& c : v)
            CHECK(std::abs(c - 1.0 / std::sqrt(257.0)) < 1e-15);
    }

    SUBCASE("orthogonal on the N-point DFT grid") {
        AngularGrid grid{cfg.n_antennas};
        cvec a = far_steering(cfg, grid.angle(10));
        cvec b = far_steering(cfg, grid.angle(133));
        std::complex<double> in = 0;
        for (int i = 0; i < cfg.n_antennas; ++i)
            in += std::conj(a[i]) * b[i];
        CHECK(std::abs(in) < 1e-10);
    }

    SUBCASE("unit norm for arbitrary theta") {
        Rng rng(3);
        for (int i = 0; i < 20; ++i)
            CHECK(std::abs(std::sqrt(norm_sq(far_steering(cfg, rng.uniform(-1, 1)))) -
                           1.0) < 1e-12);
    }
}

TEST_CASE("rician LoS gain") {
    SUBCASE("huge Rician factor reduces to pure path gain") {
        SystemConfig cfg = SystemConfig::make(257, 30e9, 30, -80, -62, 300.0, 0);
        UserLocation loc{5.0, 0.2};
        double expect = std::sqrt(cfg.ref_gain_linear()) / loc.range_m;
        CHECK(std::abs(std::abs(rician_los_gain(cfg, loc)) - expect) / expect < 1e-6);
    }

    SUBCASE("reference parameter point") {
        SystemConfig cfg = default_config();
        double expect = std::sqrt(std::pow(10.0, -6.2)) * std::sqrt(1000.0 / 1001.0);
        CHECK(std::abs(rician_los_gain(cfg, {1.0, 0.0})) ==
              doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("doubling the range halves the gain") {
        SystemConfig cfg = default_config();
        double g1 = std::abs(rician_los_gain(cfg, {7.0, 0.1}));
        double g2 = std::abs(rician_los_gain(cfg, {14.0, 0.1}));
        CHECK(g1 == doctest::Approx(2.0 * g2).epsilon(1e-12));
    }
}

TEST_CASE("channel synthesis") {
    UserLocation loc{20.0, 0.25};

    SUBCASE("LoS-only channel equals its LoS component") {
        SystemConfig cfg = default_config(0);
        Rng rng(42);
        Channel ch = make_channel(cfg, loc, rng);
        REQUIRE(ch.coeffs.size() == ch.los_component.size());
        for (std::size_t i = 0; i < ch.coeffs.size(); ++i)
            CHECK(ch.coeffs[i] == ch.los_component[i]);
    }

    SUBCASE("LoS power invariant") {
        SystemConfig cfg = default_config(2);
        Rng rng(43);
        Channel ch = make_channel(cfg, loc, rng);
        double expect = cfg.n_antennas * std::norm(rician_los_gain(cfg, loc));
        CHECK(std::abs(norm_sq(ch.los_component) - expect) / expect < 1e-9);
    }

    SUBCASE("aggregate NLoS power sits kappa below the LoS power") {
        SystemConfig cfg = default_config(2);
        Rng rng(44);
        double acc = 0;
        const int draws = 10000;
        for (int t = 0; t < draws; ++t) {
            Channel ch = make_channel(cfg, loc, rng);
            cvec diff(ch.coeffs.size());
            for (std::size_t i = 0; i < diff.size(); ++i)
                diff[i] = ch.coeffs[i] - ch.los_component[i];
            acc += norm_sq(diff) / norm_sq(ch.los_component);
        }
        double ratio = acc / draws; // expect 1/kappa = 1e-3
        CHECK(ratio > 0.8e-3);
        CHECK(ratio < 1.2e-3);
    }

    SUBCASE("per-path normalization scales the NLoS power by L") {
        SystemConfig cfg = default_config(2);
        cfg.nlos_norm = SystemConfig::NlosNormalization::per_path;
        Rng rng(45);
        double acc = 0;
        const int draws = 4000;
        for (int t = 0; t < draws; ++t) {
            Channel ch = make_channel(cfg, loc, rng);
            cvec diff(ch.coeffs.size());
            for (std::size_t i = 0; i < diff.size(); ++i)
                diff[i] = ch.coeffs[i] - ch.los_component[i];
            acc += norm_sq(diff) / norm_sq(ch.los_component);
        }
        double ratio = acc / draws; // expect L/kappa = 2e-3
        CHECK(ratio > 1.6e-3);
        CHECK(ratio < 2.4e-3);
    }

    SUBCASE("identical seed gives an identical channel") {
        SystemConfig cfg = default_config(3);
        Rng r1(7), r2(7);
        Channel a = make_channel(cfg, loc, r1);
        Channel b = make_channel(cfg, loc, r2);
        for (std::size_t i = 0; i < a.coeffs.size(); ++i)
            CHECK(a.coeffs[i] == b.coeffs[i]);
    }
}

TEST_CASE("received power") {
    SystemConfig cfg = default_config(0);
    Rng rng(5);
    Channel ch = make_channel(cfg, {20.0, 0.3}, rng);

    SUBCASE("matched beamformer attains P ||h||^2, noiselessly") {
        double hn = std::sqrt(norm_sq(ch.coeffs));
        cvec w(ch.coeffs.size());
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = ch.coeffs[i] / hn;
        double p = received_power(ch, as_codeword(w), cfg, nullptr);
        double expect = cfg.tx_power_w * norm_sq(ch.coeffs);
        CHECK(std::abs(p - expect) / expect < 1e-12);
    }

    SUBCASE("orthogonal beamformer receives nothing, noiselessly") {
        // Gram-Schmidt a basis vector against the channel direction
        cvec u(ch.coeffs.size());
        double hn = std::sqrt(norm_sq(ch.coeffs));
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = ch.coeffs[i] / hn;
        cvec w(u.size(), 0.0);
        w[0] = 1.0;
        std::complex<double> proj = std::conj(u[0]); // <u, e0>
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] -= proj * u[i];
        double wn = std::sqrt(norm_sq(w));
        for (auto& c : w)
            c /= wn;
        double p = received_power(ch, as_codeword(w), cfg, nullptr);
        double expect = cfg.tx_power_w * norm_sq(ch.coeffs);
        CHECK(p / expect < 1e-20);
    }

    SUBCASE("mean noisy power = noiseless power + sigma^2") {
        // arrange signal power comparable to sigma^2 so the test has teeth
        cvec w = far_steering(cfg, 0.9);
        Codeword cw = as_codeword(w);
        double p0 = received_power(ch, cw, cfg, nullptr);
        SystemConfig noisy = cfg;
        noisy.noise_power_w = p0 > 0 ? p0 : 1e-11;
        Rng noise_rng(99);
        double acc = 0;
        const int draws = 100000;
        for (int t = 0; t < draws; ++t)
            acc += received_power(ch, cw, noisy, &noise_rng);
        double expect = p0 + noisy.noise_power_w;
        CHECK(std::abs(acc / draws - expect) / expect < 0.01);
    }

    SUBCASE("dimension mismatch rejected") {
        Codeword bad;
        bad.weights.assign(16, 0.0);
        bad.active_mask.assign(16, true);
        CHECK_THROWS_AS(received_power(ch, bad, cfg, nullptr),
                        std::invalid_argument);
    }
}

TEST_CASE("achievable rate") {
    SystemConfig cfg = default_config(0);
    Rng rng(6);
    Channel ch = make_channel(cfg, {15.0, -0.2}, rng);

    SUBCASE("zero beamforming gain gives zero rate") {
        cvec w(ch.coeffs.size(), 0.0);
        w[0] = 1.0;
        cvec u = ch.coeffs;
        double hn = std::sqrt(norm_sq(u));
        for (auto& c : u)
            c /= hn;
        std::complex<double> proj = std::conj(u[0]);
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] -= proj * u[i];
        double wn = std::sqrt(norm_sq(w));
        for (auto& c : w)
            c /= wn;
        CHECK(achievable_rate(ch, w, cfg) < 1e-12);
    }

    SUBCASE("unit SNR gives exactly 1 bps/Hz") {
        cvec w = far_steering(cfg, -0.2);
        SystemConfig unit = cfg;
        unit.noise_power_w =
            unit.tx_power_w * std::norm(beamforming_amplitude(ch, w));
        CHECK(achievable_rate(ch, w, unit) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("monotone in transmit power") {
        cvec w = far_steering(cfg, -0.2);
        double prev = -1;
        for (double p : {0.01, 0.1, 1.0, 10.0}) {
            SystemConfig c2 = cfg;
            c2.tx_power_w = p;
            double r = achievable_rate(ch, w, c2);
            CHECK(r >= prev);
            prev = r;
        }
    }
}

TEST_CASE("reference SNR") {
    SystemConfig cfg = default_config();
    UserLocation loc{20.0, 0.0};

    SUBCASE("matches the defining linear expression") {
        double expect =
            linear_to_db(257.0 * 1.0 * std::pow(10.0, -6.2) / (400.0 * 1e-11));
        CHECK(reference_snr_db(cfg, loc) == doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("doubling N adds 3.01 dB") {
        SystemConfig big = SystemConfig::make(513, 30e9, 30, -80, -62, 30, 0);
        SystemConfig half = SystemConfig::make(257, 30e9, 30, -80, -62, 30, 0);
        // 513 vs 256.5 is not exactly double; use the ratio directly
        double delta = reference_snr_db(big, loc) - reference_snr_db(half, loc);
        CHECK(delta == doctest::Approx(10.0 * std::log10(513.0 / 257.0)).epsilon(1e-9));
        CHECK(std::abs(delta - 3.01) < 0.02);
    }

    SUBCASE("doubling the range subtracts 6.02 dB") {
        double d = reference_snr_db(cfg, {40.0, 0.0}) - reference_snr_db(cfg, loc);
        CHECK(std::abs(d + 6.0206) < 1e-3);
    }
}
