// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <string_view>

namespace nfbt {

// Counter-free splitmix64 generator. We roll our own instead of using
// <random> so that trial streams are bit-identical across compilers and
// standard libraries, which the report determinism contract requires.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (spare value cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // (0, 1] so the log never sees zero
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance) {
        double s = std::sqrt(variance / 2.0);
        double re = normal();
        double im = normal();
        return {s * re, s * im};
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return detail::mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Stable per-trial seed: hash of (master seed, stream tag, sweep value bits,
/// trial index). Order-independent trial execution relies on this.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                 double sweep_value, std::uint64_t trial) {
    std::uint64_t h = detail::mix64(master);
    h = hash_combine(h, fnv1a64(stream));
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(sweep_value));
    std::memcpy(&bits, &sweep_value, sizeof(bits));
    h = hash_combine(h, bits);
    h = hash_combine(h, trial);
    return h;
}

} // namespace nfbt
