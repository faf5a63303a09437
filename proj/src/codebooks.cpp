// SPDX-License-Identifier: Apache-2.0

#include "nfbt/codebooks.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace nfbt {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

void check_divisible(int n_antennas, int interval) {
    if (interval < 1)
        throw std::invalid_argument("activation interval must be >= 1");
    if (n_antennas < 1)
        throw std::invalid_argument("antenna count must be >= 1");
    if ((n_antennas - 1) % interval != 0)
        throw std::invalid_argument(
            "N-1 = " + std::to_string(n_antennas - 1) + " is not divisible by U = " +
            std::to_string(interval) + "; Q = (N-1)/U + 1 must be an integer");
}

std::vector<bool> full_mask(int n) { return std::vector<bool>(n, true); }
} // namespace

std::vector<double> AngularGrid::angles() const {
    std::vector<double> out(n_points);
    for (int s = 1; s <= n_points; ++s)
        out[s - 1] = angle(s);
    return out;
}

std::vector<bool> sampling_vector(int n_antennas, int interval) {
    check_divisible(n_antennas, interval);
    std::vector<bool> mask(n_antennas, false);
    for (int k = 0; k < n_antennas; k += interval)
        mask[k] = true;
    return mask;
}

int sparse_element_count(int n_antennas, int interval) {
    check_divisible(n_antennas, interval);
    return (n_antennas - 1) / interval + 1;
}

Codebook dft_codebook(const SystemConfig& config, int interval) {
    config.validate();
    int q = sparse_element_count(config.n_antennas, interval);
    Codebook cb;
    cb.kind = CodebookKind::dft;
    cb.grid = AngularGrid{q * interval};
    cb.n_antennas = config.n_antennas;
    cb.carrier_freq_hz = config.carrier_freq_hz;
    cb.interval = interval;
    cb.entries.reserve(cb.grid.n_points);
    for (int s = 1; s <= cb.grid.n_points; ++s) {
        Codeword w;
        w.weights = far_steering(config, cb.grid.angle(s));
        w.active_mask = full_mask(config.n_antennas);
        w.steer_angle = cb.grid.angle(s);
        w.index = s;
        cb.entries.push_back(std::move(w));
    }
    return cb;
}

Codebook sparse_dft_codebook(const SystemConfig& config, int interval) {
    config.validate();
    const int n = config.n_antennas;
    int q = sparse_element_count(n, interval);
    if ((n - 1) / interval % 2 != 0)
        throw std::invalid_argument(
            "(N-1)/U = " + std::to_string((n - 1) / interval) +
            " must be even so that Q is odd and the codeword window "
            "straddling theta = 0 is symmetric");

    const std::vector<bool> mask = sampling_vector(n, interval);
    const int qu = q * interval;
    AngularGrid grid{qu};

    // the Q consecutive grid angles lying in [-1/U, 1/U)
    long g_lo = static_cast<long>(std::ceil((qu - q + 1) / 2.0));

    Codebook cb;
    cb.kind = CodebookKind::sparse_dft;
    cb.grid = grid;
    cb.n_antennas = n;
    cb.carrier_freq_hz = config.carrier_freq_hz;
    cb.interval = interval;
    cb.entries.reserve(q);
    const double scale = 1.0 / std::sqrt(static_cast<double>(q));
    for (long g = g_lo; g < g_lo + q; ++g) {
        double theta = grid.angle(g);
        Codeword w;
        w.weights.assign(n, 0.0);
        for (int k = 0; k < n; k += interval)
            w.weights[k] = std::polar(scale, -kPi * k * theta);
        w.active_mask = mask;
        w.steer_angle = theta;
        w.index = static_cast<int>(g);
        cb.entries.push_back(std::move(w));
    }
    return cb;
}

std::optional<std::string> interval_constraint_warning(const SystemConfig& config,
                                                       int interval) {
    double limit = std::sqrt(1.2 * (config.n_antennas - 1));
    if (interval > limit)
        return "activation interval U = " + std::to_string(interval) +
               " exceeds sqrt(1.2 (N-1)) = " + std::to_string(limit) +
               "; no admissible central-subarray size exists";
    return std::nullopt;
}

std::pair<double, double> subarray_bounds(const SystemConfig& config, int interval) {
    return {static_cast<double>(interval), std::sqrt(1.2 * (config.n_antennas - 1))};
}

Codebook subarray_codebook(const SystemConfig& config, int m_antennas, int interval,
                           bool enforce_bounds) {
    config.validate();
    const int n = config.n_antennas;
    if (m_antennas < 1 || m_antennas > n)
        throw std::invalid_argument("subarray size must lie in [1, N]");
    if (enforce_bounds) {
        auto [lo, hi] = subarray_bounds(config, interval);
        if (m_antennas < lo || m_antennas > hi)
            throw std::invalid_argument(
                "subarray size M = " + std::to_string(m_antennas) +
                " violates U <= M <= sqrt(1.2 (N-1)): the beam-width criterion "
                "requires M >= " + std::to_string(interval) +
                " and the subarray far-field criterion requires M <= " +
                std::to_string(hi));
    }

    int q = sparse_element_count(n, interval);
    AngularGrid grid{q * interval};
    int lead = (n - m_antennas) / 2; // exact centering when N-M is even

    Codebook cb;
    cb.kind = CodebookKind::subarray;
    cb.grid = grid;
    cb.n_antennas = n;
    cb.carrier_freq_hz = config.carrier_freq_hz;
    cb.interval = interval;
    cb.m_antennas = m_antennas;
    cb.entries.reserve(grid.n_points);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m_antennas));
    for (int s = 1; s <= grid.n_points; ++s) {
        double theta = grid.angle(s);
        Codeword w;
        w.weights.assign(n, 0.0);
        w.active_mask.assign(n, false);
        for (int k = lead; k < lead + m_antennas; ++k) {
            w.weights[k] = std::polar(scale, -kPi * k * theta);
            w.active_mask[k] = true;
        }
        w.steer_angle = theta;
        w.index = s;
        cb.entries.push_back(std::move(w));
    }
    return cb;
}

Codebook polar_codebook(const SystemConfig& config, int n_ranges, double beta_delta,
                        const AngularGrid& grid) {
    config.validate();
    if (n_ranges < 1)
        throw std::invalid_argument("polar codebook needs at least one range sample");
    if (!(beta_delta > 0.0))
        throw std::invalid_argument("beta_delta must be positive");

    const double d0 = config.antenna_spacing_m;
    const double alpha = config.n_antennas * config.n_antennas * d0 * d0 /
                         (2.0 * config.wavelength() * beta_delta * beta_delta);

    Codebook cb;
    cb.kind = CodebookKind::polar;
    cb.grid = grid;
    cb.n_antennas = config.n_antennas;
    cb.carrier_freq_hz = config.carrier_freq_hz;
    cb.interval = 1;
    cb.n_ranges = n_ranges;
    cb.beta_delta = beta_delta;
    cb.entries.reserve(static_cast<std::size_t>(grid.n_points) * n_ranges);
    for (int s = 1; s <= grid.n_points; ++s) {
        double theta = grid.angle(s);
        for (int v = 1; v <= n_ranges; ++v) {
            double r = alpha * (1.0 - theta * theta) / v;
            Codeword w;
            w.weights = near_steering(config, {r, theta}, SteeringMode::exact);
            w.active_mask = full_mask(config.n_antennas);
            w.steer_angle = theta;
            w.steer_range = r;
            w.index = (s - 1) * n_ranges + v;
            cb.entries.push_back(std::move(w));
        }
    }
    return cb;
}

const Codeword& polar_entry(const Codebook& polar, long grid_index, int range_index) {
    if (polar.kind != CodebookKind::polar)
        throw std::invalid_argument("polar_entry: codebook is not polar");
    if (range_index < 1 || range_index > polar.n_ranges)
        throw std::invalid_argument("polar_entry: range index out of bounds");
    return polar.at((grid_index - 1) * polar.n_ranges + range_index);
}

namespace {

const char* kind_name(CodebookKind k) {
    switch (k) {
    case CodebookKind::dft: return "dft";
    case CodebookKind::sparse_dft: return "sparse_dft";
    case CodebookKind::subarray: return "subarray";
    case CodebookKind::polar: return "polar";
    }
    return "?";
}

CodebookKind kind_from_name(const std::string& s) {
    if (s == "dft") return CodebookKind::dft;
    if (s == "sparse_dft") return CodebookKind::sparse_dft;
    if (s == "subarray") return CodebookKind::subarray;
    if (s == "polar") return CodebookKind::polar;
    throw std::invalid_argument("unknown codebook kind '" + s + "'");
}

} // namespace

std::string codebook_to_json(const Codebook& cb, bool inline_weights) {
    nlohmann::json j;
    j["kind"] = kind_name(cb.kind);
    j["n_antennas"] = cb.n_antennas;
    j["carrier_freq_hz"] = cb.carrier_freq_hz;
    j["grid_points"] = cb.grid.n_points;
    j["interval"] = cb.interval;
    if (cb.kind == CodebookKind::subarray)
        j["m_antennas"] = cb.m_antennas;
    if (cb.kind == CodebookKind::polar) {
        j["n_ranges"] = cb.n_ranges;
        j["beta_delta"] = cb.beta_delta;
    }
    auto& entries = j["entries"] = nlohmann::json::array();
    for (const auto& w : cb.entries) {
        nlohmann::json e;
        e["index"] = w.index;
        e["angle"] = w.steer_angle;
        if (w.steer_range)
            e["range"] = *w.steer_range;
        if (inline_weights) {
            auto& ws = e["weights"] = nlohmann::json::array();
            for (const auto& c : w.weights)
                ws.push_back({c.real(), c.imag()});
        }
        entries.push_back(std::move(e));
    }
    return j.dump(2);
}

Codebook codebook_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    CodebookKind kind = kind_from_name(j.at("kind").get<std::string>());
    int n = j.at("n_antennas").get<int>();
    double freq = j.at("carrier_freq_hz").get<double>();
    int interval = j.at("interval").get<int>();

    // regenerate from metadata through the ordinary constructors; noise and
    // NLoS settings are irrelevant to codebook geometry
    SystemConfig cfg = SystemConfig::make(n, freq, 30.0, -80.0, -62.0, 30.0, 0);

    Codebook cb;
    switch (kind) {
    case CodebookKind::dft:
        cb = dft_codebook(cfg, interval);
        break;
    case CodebookKind::sparse_dft:
        cb = sparse_dft_codebook(cfg, interval);
        break;
    case CodebookKind::subarray:
        cb = subarray_codebook(cfg, j.at("m_antennas").get<int>(), interval,
                               /*enforce_bounds=*/false);
        break;
    case CodebookKind::polar: {
        AngularGrid grid{j.at("grid_points").get<int>()};
        cb = polar_codebook(cfg, j.at("n_ranges").get<int>(),
                            j.at("beta_delta").get<double>(), grid);
        break;
    }
    }
    if (static_cast<int>(cb.entries.size()) !=
        static_cast<int>(j.at("entries").size()))
        throw std::invalid_argument("codebook entry count does not match metadata");
    return cb;
}

} // namespace nfbt
