// SPDX-License-Identifier: Apache-2.0

#include "nfbt/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nfbt {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double wrap_angle(double theta) {
    // into [-1, 1)
    return theta - 2.0 * std::floor((theta + 1.0) / 2.0);
}

std::size_t argmax_first(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best])
            best = i;
    return best;
}

std::size_t argmin_first(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[best])
            best = i;
    return best;
}

Codeword synthesized_beamformer(cvec weights) {
    Codeword w;
    w.weights = std::move(weights);
    w.active_mask.assign(w.weights.size(), true);
    w.steer_angle = std::numeric_limits<double>::quiet_NaN();
    w.index = -1;
    return w;
}

} // namespace

double beam_pattern(const SystemConfig& config, const UserLocation& loc, double theta,
                    int interval) {
    if (interval < 1)
        throw std::invalid_argument("beam_pattern: interval must be >= 1");
    const int q_count = sparse_element_count(config.n_antennas, interval);
    const int half = (q_count - 1) / 2;
    const double du = interval * config.antenna_spacing_m;
    const double wavenum = 2.0 * kPi / config.wavelength();
    const double r0 = loc.range_m;
    const double th0 = loc.spatial_angle;

    std::complex<double> acc = 0.0;
    for (int q = -half; q <= q_count - 1 - half; ++q) {
        double rq = std::sqrt(r0 * r0 + q * q * du * du - 2.0 * r0 * th0 * q * du);
        acc += std::polar(1.0, wavenum * rq + kPi * q * interval * theta);
    }
    return std::abs(acc) / q_count;
}

AngularSupport angular_support(const PowerProfile& profile, const AngularGrid& grid,
                               double mu_db) {
    if (profile.powers.empty())
        throw std::invalid_argument("angular_support: empty power profile");
    if (profile.powers.size() != profile.codeword_indices.size())
        throw std::invalid_argument("angular_support: profile length mismatch");
    double peak = *std::max_element(profile.powers.begin(), profile.powers.end());
    if (!(peak > 0.0))
        throw std::runtime_error("angular_support: all received powers are zero");
    double threshold = db_to_linear(-mu_db) * peak;

    AngularSupport s;
    for (std::size_t i = 0; i < profile.powers.size(); ++i)
        if (profile.powers[i] > threshold)
            s.member_indices.push_back(profile.codeword_indices[i]);
    std::sort(s.member_indices.begin(), s.member_indices.end());
    s.left_angle = grid.angle(s.member_indices.front());
    s.right_angle = grid.angle(s.member_indices.back());
    s.width = s.right_angle - s.left_angle;
    return s;
}

PowerProfile shift_profile(const PowerProfile& profile) {
    const std::size_t q = profile.powers.size();
    if (q == 0)
        throw std::invalid_argument("shift_profile: empty profile");
    if (profile.shifted)
        throw std::invalid_argument("shift_profile: profile already shifted");

    std::size_t min_pos = argmin_first(profile.powers);
    long l = profile.codeword_indices[min_pos];

    PowerProfile out;
    out.shifted = true;
    out.powers.reserve(q);
    out.codeword_indices.reserve(q);
    // rotate so the minimum lands last; indices above l fall one period back
    for (std::size_t k = 1; k <= q; ++k)
        out.powers.push_back(profile.powers[(min_pos + k) % q]);
    for (long s = l - static_cast<long>(q) + 1; s <= l; ++s)
        out.codeword_indices.push_back(s);
    return out;
}

long support_median(const std::vector<long>& sorted_members) {
    if (sorted_members.empty())
        throw std::invalid_argument("support_median: empty member list");
    const std::size_t m = sorted_members.size();
    if (m % 2 == 1)
        return sorted_members[m / 2];
    // even cardinality: land between the two central members, ties to the
    // lower index; when the support has a central 3-dB hole (the pattern is
    // M-shaped in part of the near field) this stays on the hole's center
    long a = sorted_members[m / 2 - 1];
    long b = sorted_members[m / 2];
    return (a + b) >= 0 ? (a + b) / 2 : -((-a - b + 1) / 2);
}

std::vector<long> middle_k_indices(const std::vector<long>& sorted_members, int k) {
    if (k < 1)
        throw std::invalid_argument("middle_k_indices: k must be >= 1");
    long med = support_median(sorted_members);
    std::vector<long> out;
    out.reserve(k);
    for (int j = -(k - 1) / 2; j <= k / 2; ++j)
        out.push_back(med + j);
    return out;
}

TrainingCodebooks build_training_codebooks(const SystemConfig& config,
                                           const TrainParams& params) {
    TrainingCodebooks books;
    books.dft = dft_codebook(config, params.interval);
    books.sparse = sparse_dft_codebook(config, params.interval);
    books.subarray = subarray_codebook(config, params.m_antennas, params.interval,
                                       params.enforce_subarray_bounds);
    books.polar =
        polar_codebook(config, params.n_ranges, params.beta_delta, books.dft.grid);
    return books;
}

Phase1Result phase1_sweep(const SystemConfig& config, const Channel& ch,
                          const Codebook& sparse_cb, PilotMeter& meter, double mu_db,
                          int k_mid) {
    if (sparse_cb.kind != CodebookKind::sparse_dft)
        throw std::invalid_argument("phase1_sweep: codebook is not sparse DFT");

    Phase1Result res;
    res.raw.shifted = false;
    for (const auto& w : sparse_cb.entries) {
        res.raw.powers.push_back(meter.power(ch, w, config));
        res.raw.codeword_indices.push_back(w.index);
    }
    res.shifted = shift_profile(res.raw);
    res.support = angular_support(res.shifted, sparse_cb.grid, mu_db);
    res.median_index = support_median(res.support.member_indices);
    res.mid_indices = middle_k_indices(res.support.member_indices, k_mid);

    const int u = sparse_cb.interval;
    double base = sparse_cb.grid.angle(res.median_index);
    for (int alias = 0; alias < u; ++alias)
        res.candidates.push_back(wrap_angle(base + 2.0 * alias / u));
    return res;
}

Phase2Result phase2_resolve(const SystemConfig& config, const Channel& ch,
                            const Codebook& sub_cb,
                            const std::vector<double>& candidates, PilotMeter& meter) {
    if (sub_cb.kind != CodebookKind::subarray)
        throw std::invalid_argument("phase2_resolve: codebook is not subarray");
    if (candidates.empty())
        throw std::invalid_argument("phase2_resolve: no candidate angles");

    Phase2Result res;
    std::vector<long> indices;
    for (double theta : candidates) {
        long s = sub_cb.grid.wrap_index(sub_cb.grid.index_of(theta));
        indices.push_back(s);
        res.powers.push_back(meter.power(ch, sub_cb.at(s), config));
    }
    std::size_t best = argmax_first(res.powers);
    res.winner_alias = static_cast<int>(best);
    res.winner_grid_index = indices[best];
    res.angle = sub_cb.grid.angle(res.winner_grid_index);
    return res;
}

Phase3Result phase3_range(const SystemConfig& config, const Channel& ch,
                          const Codebook& polar_cb, double est_angle,
                          PilotMeter& meter) {
    if (polar_cb.kind != CodebookKind::polar)
        throw std::invalid_argument("phase3_range: codebook is not polar");

    long s = polar_cb.grid.wrap_index(polar_cb.grid.index_of(est_angle));
    Phase3Result res;
    for (int v = 1; v <= polar_cb.n_ranges; ++v)
        res.powers.push_back(meter.power(ch, polar_entry(polar_cb, s, v), config));
    std::size_t best = argmax_first(res.powers);
    res.range_index = static_cast<int>(best) + 1;
    res.peak_power = res.powers[best];
    res.chosen = polar_entry(polar_cb, s, res.range_index);
    res.range = res.chosen.steer_range.value();
    return res;
}

TrainingOutcome three_phase_train(const SystemConfig& config, const Channel& ch,
                                  const TrainingCodebooks& books,
                                  const TrainParams& params, Rng* rng) {
    PilotMeter meter{rng};
    TrainingOutcome out;

    Phase1Result p1 =
        phase1_sweep(config, ch, books.sparse, meter, params.support_mu_db,
                     params.k_mid);
    out.phase_log.push_back({"sparse-sweep", p1.shifted.codeword_indices,
                             p1.shifted.powers, p1.median_index});

    Phase2Result p2 = phase2_resolve(config, ch, books.subarray, p1.candidates, meter);
    {
        std::vector<long> alias_ids(p1.candidates.size());
        for (std::size_t i = 0; i < alias_ids.size(); ++i)
            alias_ids[i] = static_cast<long>(i);
        out.phase_log.push_back(
            {"ambiguity", alias_ids, p2.powers, p2.winner_alias});
    }

    // range sweep over the K middle support angles, shifted into the period
    // phase 2 selected
    const long q_count = static_cast<long>(books.sparse.entries.size());
    Phase3Result best;
    double best_power = -1.0;
    long best_grid_index = 0;
    PhaseRecord p3_log{"range-sweep", {}, {}, 0};
    for (long mid : p1.mid_indices) {
        long s = books.polar.grid.wrap_index(mid + p2.winner_alias * q_count);
        Phase3Result p3 =
            phase3_range(config, ch, books.polar, books.polar.grid.angle(s), meter);
        for (int v = 1; v <= params.n_ranges; ++v) {
            p3_log.indices.push_back((s - 1) * params.n_ranges + v);
            p3_log.powers.push_back(p3.powers[v - 1]);
        }
        if (p3.peak_power > best_power) {
            best_power = p3.peak_power;
            best = p3;
            best_grid_index = s;
        }
    }
    p3_log.winner = best.chosen.index;
    out.phase_log.push_back(std::move(p3_log));

    out.est_angle = books.polar.grid.angle(best_grid_index);
    out.est_range = best.range;
    out.chosen = best.chosen;
    out.pilots_used = overhead_three_phase(config.n_antennas, params.interval,
                                           params.n_ranges, params.k_mid);
    out.measurements = meter.count;
    return out;
}

TrainingOutcome three_phase_train(const SystemConfig& config, const Channel& ch,
                                  const TrainParams& params, Rng* rng) {
    TrainingCodebooks books = build_training_codebooks(config, params);
    return three_phase_train(config, ch, books, params, rng);
}

TrainingOutcome exhaustive_train(const SystemConfig& config, const Channel& ch,
                                 const Codebook& polar_cb, Rng* rng) {
    if (polar_cb.kind != CodebookKind::polar)
        throw std::invalid_argument("exhaustive_train: codebook is not polar");
    PilotMeter meter{rng};

    double best_power = -1.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < polar_cb.entries.size(); ++i) {
        double p = meter.power(ch, polar_cb.entries[i], config);
        if (p > best_power) {
            best_power = p;
            best = i;
        }
    }

    TrainingOutcome out;
    out.chosen = polar_cb.entries[best];
    out.est_angle = out.chosen.steer_angle;
    out.est_range = out.chosen.steer_range;
    out.pilots_used = static_cast<long>(polar_cb.entries.size());
    out.measurements = meter.count;
    out.phase_log.push_back({"exhaustive", {out.chosen.index}, {best_power},
                             out.chosen.index});
    return out;
}

TrainingOutcome two_phase_train(const SystemConfig& config, const Channel& ch,
                                const Codebook& dft_cb, const Codebook& polar_cb,
                                int k_candidates, Rng* rng, double mu_db) {
    if (dft_cb.kind != CodebookKind::dft)
        throw std::invalid_argument("two_phase_train: first codebook must be DFT");
    PilotMeter meter{rng};

    PowerProfile profile;
    for (const auto& w : dft_cb.entries) {
        profile.powers.push_back(meter.power(ch, w, config));
        profile.codeword_indices.push_back(w.index);
    }
    AngularSupport support = angular_support(profile, dft_cb.grid, mu_db);
    std::vector<long> mids = middle_k_indices(support.member_indices, k_candidates);

    TrainingOutcome out;
    out.phase_log.push_back({"dft-sweep", profile.codeword_indices, profile.powers,
                             mids[(mids.size() - 1) / 2]});

    Phase3Result best;
    double best_power = -1.0;
    long best_grid_index = 0;
    for (long mid : mids) {
        long s = polar_cb.grid.wrap_index(mid);
        Phase3Result p3 =
            phase3_range(config, ch, polar_cb, polar_cb.grid.angle(s), meter);
        if (p3.peak_power > best_power) {
            best_power = p3.peak_power;
            best = p3;
            best_grid_index = s;
        }
    }

    out.est_angle = polar_cb.grid.angle(best_grid_index);
    out.est_range = best.range;
    out.chosen = best.chosen;
    out.pilots_used = overhead_two_phase(config.n_antennas, dft_cb.interval,
                                         polar_cb.n_ranges, k_candidates);
    out.measurements = meter.count;
    return out;
}

TrainingOutcome far_field_train(const SystemConfig& config, const Channel& ch,
                                const Codebook& dft_cb, Rng* rng) {
    if (dft_cb.kind != CodebookKind::dft)
        throw std::invalid_argument("far_field_train: codebook must be DFT");
    PilotMeter meter{rng};

    std::vector<double> powers;
    powers.reserve(dft_cb.entries.size());
    for (const auto& w : dft_cb.entries)
        powers.push_back(meter.power(ch, w, config));
    std::size_t best = argmax_first(powers);

    TrainingOutcome out;
    out.chosen = dft_cb.entries[best];
    out.est_angle = out.chosen.steer_angle;
    out.est_range = std::nullopt;
    out.pilots_used = overhead_far_field(config.n_antennas, dft_cb.interval);
    out.measurements = meter.count;
    out.phase_log.push_back(
        {"far-field-sweep", {out.chosen.index}, {powers[best]}, out.chosen.index});
    return out;
}

cvec ls_channel_estimate(const SystemConfig& config, const Channel& ch, Rng* rng,
                         PilotMeter* meter) {
    const int n = config.n_antennas;
    PilotMeter local{rng};
    if (meter == nullptr)
        meter = &local;

    // pilot beams: the N-point DFT grid, which makes the pilot matrix
    // scaled-unitary and the normal equations trivially invertible
    AngularGrid pilot_grid{n};
    std::vector<cvec> pilots;
    pilots.reserve(n);
    std::vector<std::complex<double>> y(n);
    for (int i = 1; i <= n; ++i) {
        Codeword w;
        w.weights = far_steering(config, pilot_grid.angle(i));
        w.active_mask.assign(n, true);
        w.steer_angle = pilot_grid.angle(i);
        w.index = i;
        y[i - 1] = meter->sample(ch, w, config);
        pilots.push_back(std::move(w.weights));
    }

    // y = sqrt(P) W conj(h) + z with unitary W => conj(h) ~= W^H y / sqrt(P)
    const double inv_root_p = 1.0 / std::sqrt(config.tx_power_w);
    cvec est(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            est[k] += std::conj(pilots[i][k]) * y[i];
    for (auto& e : est)
        e = std::conj(e * inv_root_p); // back to channel coefficients
    return est;
}

TrainingOutcome ls_estimate(const SystemConfig& config, const Channel& ch, Rng* rng) {
    PilotMeter meter{rng};
    cvec est = ls_channel_estimate(config, ch, rng, &meter);

    double norm_sq = 0.0;
    for (const auto& e : est)
        norm_sq += std::norm(e);
    if (!(norm_sq > 0.0))
        throw std::runtime_error("ls_estimate: zero channel estimate");
    double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (auto& e : est)
        e *= inv_norm;

    TrainingOutcome out;
    out.chosen = synthesized_beamformer(std::move(est));
    out.pilots_used = overhead_ls(config.n_antennas);
    out.measurements = meter.count;
    return out;
}

TrainingOutcome perfect_csi_train(const SystemConfig& config, const Channel& ch) {
    (void)config;
    double norm_sq = 0.0;
    for (const auto& c : ch.coeffs)
        norm_sq += std::norm(c);
    double inv_norm = 1.0 / std::sqrt(norm_sq);
    cvec w(ch.coeffs.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = ch.coeffs[i] * inv_norm;

    TrainingOutcome out;
    out.chosen = synthesized_beamformer(std::move(w));
    out.est_angle = ch.truth.spatial_angle;
    out.est_range = ch.truth.range_m;
    out.pilots_used = 0;
    out.measurements = 0;
    return out;
}

long overhead_three_phase(int n_antennas, int interval, int n_ranges, int k_mid) {
    long base = static_cast<long>((n_antennas - 1) / interval) + interval +
                static_cast<long>(k_mid) * n_ranges;
    return base + (k_mid == 1 ? 1 : 0);
}

long overhead_exhaustive(int n_antennas, int interval, int n_ranges) {
    long q = sparse_element_count(n_antennas, interval);
    return q * interval * n_ranges;
}

long overhead_two_phase(int n_antennas, int interval, int n_ranges, int k_candidates) {
    long q = sparse_element_count(n_antennas, interval);
    return q * interval + static_cast<long>(k_candidates) * n_ranges;
}

long overhead_far_field(int n_antennas, int interval) {
    long q = sparse_element_count(n_antennas, interval);
    return q * interval;
}

long overhead_ls(int n_antennas) { return n_antennas; }

int optimal_interval(int n_antennas, int v_ranges) {
    if (n_antennas < 2)
        throw std::invalid_argument("optimal_interval: need at least 2 antennas");
    (void)v_ranges; // shifts the objective by a constant only
    const int m = n_antennas - 1;
    const double limit = std::sqrt(1.2 * m) + 1e-9;
    int best_u = 0;
    long best_cost = 0;
    for (int u = 1; u <= m; ++u) {
        if (m % u != 0 || u > limit)
            continue;
        long cost = static_cast<long>(m / u) + u;
        if (best_u == 0 || cost < best_cost) {
            best_u = u;
            best_cost = cost;
        }
    }
    if (best_u == 0)
        throw std::runtime_error("optimal_interval: no feasible divisor");
    return best_u;
}

} // namespace nfbt
