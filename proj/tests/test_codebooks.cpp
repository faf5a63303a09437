// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nfbt/codebooks.hpp"

using namespace nfbt;

namespace {

SystemConfig default_config() {
    return SystemConfig::make(257, 30e9, 30.0, -80.0, -62.0, 30.0, 0);
}

double norm_of(const Codeword& w) {
    double s = 0;
    for (const auto& c : w.weights)
        s += std::norm(c);
    return std::sqrt(s);
}

void check_mask_consistency(const Codebook& cb) {
    for (const auto& w : cb.entries) {
        REQUIRE(w.weights.size() == w.active_mask.size());
        CHECK(std::abs(norm_of(w) - 1.0) < 1e-12);
        for (std::size_t i = 0; i < w.weights.size(); ++i) {
            if (!w.active_mask[i])
                CHECK(w.weights[i] == std::complex<double>(0.0, 0.0));
            else
                CHECK(std::abs(w.weights[i]) > 0.0);
        }
    }
}

} // namespace

TEST_CASE("sampling vector") {
    SUBCASE("N=257, U=16 activates 17 antennas") {
        auto mask = sampling_vector(257, 16);
        int count = 0;
        for (bool b : mask)
            count += b;
        CHECK(count == 17);
        CHECK(mask[0]);
        CHECK(mask[256]);
        CHECK(mask[16]);
        CHECK_FALSE(mask[1]);
        CHECK(sparse_element_count(257, 16) == 17);
    }

    SUBCASE("U=1 activates everything") {
        auto mask = sampling_vector(257, 1);
        for (bool b : mask)
            CHECK(b);
    }

    SUBCASE("N=5, U=2 gives 1,0,1,0,1") {
        auto mask = sampling_vector(5, 2);
        std::vector<bool> expect{true, false, true, false, true};
        CHECK(mask == expect);
    }

    SUBCASE("divisibility violation names the constraint") {
        CHECK_THROWS_WITH_AS(sampling_vector(257, 15),
                             doctest::Contains("divisible"), std::invalid_argument);
    }
}

TEST_CASE("angular grid") {
    AngularGrid grid{272};
    auto angles = grid.angles();
    REQUIRE(angles.size() == 272);
    for (std::size_t i = 1; i < angles.size(); ++i) {
        CHECK(angles[i] > angles[i - 1]);
        CHECK(angles[i] - angles[i - 1] == doctest::Approx(2.0 / 272).epsilon(1e-12));
    }
    CHECK(angles.front() > -1.0);
    CHECK(angles.back() < 1.0);
    // symmetric about zero
    CHECK(angles.front() + angles.back() == doctest::Approx(0.0).epsilon(1e-15));
    // wrap and lookup agree
    CHECK(grid.wrap_index(273) == 1);
    CHECK(grid.wrap_index(0) == 272);
    CHECK(grid.wrap_index(-5) == 267);
    for (long s : {1L, 100L, 272L})
        CHECK(grid.index_of(grid.angle(s)) == s);
}

TEST_CASE("sparse DFT codebook") {
    SystemConfig cfg = default_config();

    SUBCASE("N=257, U=16: 17 codewords spanning [-1/16, 1/16)") {
        Codebook cb = sparse_dft_codebook(cfg, 16);
        REQUIRE(cb.entries.size() == 17);
        CHECK(cb.grid.n_points == 272);
        CHECK(cb.entries.front().steer_angle ==
              doctest::Approx(-1.0 / 16).epsilon(1e-12));
        CHECK(cb.entries.back().steer_angle < 1.0 / 16);
        CHECK(cb.entries.front().index == 128);
        CHECK(cb.entries.back().index == 144);
        check_mask_consistency(cb);
    }

    SUBCASE("U=1 reduces to the conventional DFT codebook") {
        Codebook sparse = sparse_dft_codebook(cfg, 1);
        Codebook dft = dft_codebook(cfg, 1);
        REQUIRE(sparse.entries.size() == dft.entries.size());
        for (std::size_t g = 0; g < sparse.entries.size(); ++g)
            for (int i = 0; i < cfg.n_antennas; ++i)
                CHECK(std::abs(sparse.entries[g].weights[i] -
                               dft.entries[g].weights[i]) < 1e-12);
    }

    SUBCASE("odd (N-1)/U rejected") {
        // 256/256 = 1 is odd: the symmetric window does not exist
        CHECK_THROWS_WITH_AS(sparse_dft_codebook(cfg, 256),
                             doctest::Contains("even"), std::invalid_argument);
    }

    SUBCASE("interval warning beyond the subarray design rule") {
        CHECK_FALSE(interval_constraint_warning(cfg, 16).has_value());
        CHECK(interval_constraint_warning(cfg, 32).has_value());
    }
}

TEST_CASE("subarray codebook") {
    SystemConfig cfg = default_config();

    SUBCASE("admissible bounds for N=257, U=16") {
        auto [lo, hi] = subarray_bounds(cfg, 16);
        CHECK(lo == 16.0);
        CHECK(hi == doctest::Approx(17.5271).epsilon(1e-3));
        CHECK_NOTHROW(subarray_codebook(cfg, 17, 16));
        CHECK_NOTHROW(subarray_codebook(cfg, 16, 16));
        CHECK_THROWS_AS(subarray_codebook(cfg, 18, 16), std::invalid_argument);
        CHECK_THROWS_AS(subarray_codebook(cfg, 15, 16), std::invalid_argument);
        // sweeps may force inadmissible sizes explicitly
        CHECK_NOTHROW(subarray_codebook(cfg, 64, 16, false));
    }

    SUBCASE("central placement and mask") {
        Codebook cb = subarray_codebook(cfg, 17, 16);
        REQUIRE(cb.entries.size() == 272);
        const auto& mask = cb.entries[0].active_mask;
        for (int i = 0; i < 120; ++i) {
            CHECK_FALSE(mask[i]);
            CHECK_FALSE(mask[256 - i]);
        }
        for (int i = 120; i <= 136; ++i)
            CHECK(mask[i]);
        check_mask_consistency(cb);
    }

    SUBCASE("far-field criterion holds for the chosen M") {
        // subarray Rayleigh distance below the array Fresnel distance
        double d0 = cfg.antenna_spacing_m;
        double lhs = 2.0 * 17 * 17 * d0 * d0 / cfg.wavelength();
        CHECK(lhs <= 1.2 * cfg.aperture());
        double lhs18 = 2.0 * 18 * 18 * d0 * d0 / cfg.wavelength();
        CHECK(lhs18 > 1.2 * cfg.aperture());
    }

    SUBCASE("beam width criterion: 4/M <= 4/U for admissible M") {
        for (int m : {16, 17})
            CHECK(4.0 / m <= 4.0 / 16 + 1e-15);
    }
}

TEST_CASE("polar codebook") {
    SystemConfig cfg = default_config();
    AngularGrid grid{272};
    Codebook cb = polar_codebook(cfg, 5, 1.2, grid);
    REQUIRE(cb.entries.size() == 272u * 5u);

    SUBCASE("ranges decrease as 1/v at fixed angle") {
        for (long s : {1L, 136L, 272L}) {
            double r1 = polar_entry(cb, s, 1).steer_range.value();
            for (int v = 2; v <= 5; ++v) {
                double rv = polar_entry(cb, s, v).steer_range.value();
                CHECK(rv == doctest::Approx(r1 / v).epsilon(1e-12));
                CHECK(rv < polar_entry(cb, s, v - 1).steer_range.value());
            }
        }
    }

    SUBCASE("broadside range law r = alpha / v") {
        // grid has no exact zero angle; use the formula at the near-zero entry
        double d0 = cfg.antenna_spacing_m;
        double alpha = 257.0 * 257.0 * d0 * d0 / (2.0 * cfg.wavelength() * 1.2 * 1.2);
        long s = 136; // theta = -1/272
        double theta = grid.angle(s);
        for (int v = 1; v <= 5; ++v)
            CHECK(polar_entry(cb, s, v).steer_range.value() ==
                  doctest::Approx(alpha * (1 - theta * theta) / v).epsilon(1e-12));
    }

    SUBCASE("codewords equal the near-field steering vector at their focus") {
        for (long s : {7L, 136L, 250L}) {
            for (int v : {1, 3, 5}) {
                const Codeword& w = polar_entry(cb, s, v);
                cvec expect = near_steering(
                    cfg, {w.steer_range.value(), w.steer_angle});
                for (int i = 0; i < cfg.n_antennas; ++i)
                    CHECK(std::abs(w.weights[i] - expect[i]) < 1e-14);
            }
        }
    }
}

TEST_CASE("codebook serialization round-trips") {
    SystemConfig cfg = default_config();

    SUBCASE("sparse codebook, weights regenerated from metadata") {
        Codebook cb = sparse_dft_codebook(cfg, 16);
        Codebook back = codebook_from_json(codebook_to_json(cb));
        REQUIRE(back.entries.size() == cb.entries.size());
        CHECK(back.kind == cb.kind);
        CHECK(back.grid.n_points == cb.grid.n_points);
        for (std::size_t g = 0; g < cb.entries.size(); ++g) {
            CHECK(back.entries[g].index == cb.entries[g].index);
            for (int i = 0; i < cfg.n_antennas; ++i)
                CHECK(back.entries[g].weights[i] == cb.entries[g].weights[i]);
        }
    }

    SUBCASE("polar codebook with inlined weights") {
        AngularGrid grid{34}; // small grid keeps the dump light
        Codebook cb = polar_codebook(
            SystemConfig::make(17, 30e9, 30, -80, -62, 30, 0), 3, 1.2, grid);
        std::string dumped = codebook_to_json(cb, true);
        CHECK(dumped.find("weights") != std::string::npos);
        Codebook back = codebook_from_json(dumped);
        REQUIRE(back.entries.size() == cb.entries.size());
        for (std::size_t g = 0; g < cb.entries.size(); ++g) {
            CHECK(back.entries[g].steer_range.value() ==
                  doctest::Approx(cb.entries[g].steer_range.value()).epsilon(1e-12));
            for (std::size_t i = 0; i < cb.entries[g].weights.size(); ++i)
                CHECK(std::abs(back.entries[g].weights[i] -
                               cb.entries[g].weights[i]) < 1e-12);
        }
    }
}
