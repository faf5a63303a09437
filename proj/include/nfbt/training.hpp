// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nfbt/codebooks.hpp"

namespace nfbt {

/// Received pilot powers of one sweep, in transmission order together with
/// the (1-based, possibly shifted) grid indices of the codewords used.
struct PowerProfile {
    std::vector<double> powers;
    std::vector<long> codeword_indices;
    bool shifted = false;
};

/// Contiguous run of sweep angles whose power exceeds kappa * max
/// (3-dB rule by default).
struct AngularSupport {
    std::vector<long> member_indices; // ascending
    double left_angle = 0.0;
    double right_angle = 0.0;
    double width = 0.0;
};

struct PhaseRecord {
    std::string name;
    std::vector<long> indices;
    std::vector<double> powers;
    long winner = 0;
};

/// Result of one training run. `pilots_used` is the scheme's nominal
/// overhead formula; `measurements` counts actual pilot observations
/// (they agree for every scheme except mid-K, see three_phase_train).
struct TrainingOutcome {
    std::optional<double> est_angle;
    std::optional<double> est_range;
    Codeword chosen;
    long pilots_used = 0;
    long measurements = 0;
    std::vector<PhaseRecord> phase_log;
};

/// Counts pilot observations so overhead accounting can be asserted.
struct PilotMeter {
    Rng* rng = nullptr; // nullptr => noiseless
    long count = 0;

    double power(const Channel& ch, const Codeword& w, const SystemConfig& cfg) {
        ++count;
        return received_power(ch, w, cfg, rng);
    }
    std::complex<double> sample(const Channel& ch, const Codeword& w,
                                const SystemConfig& cfg) {
        ++count;
        return received_sample(ch, w, cfg, rng);
    }
};

/// Received beam pattern of a sparse far-field beam steered at `theta`,
/// evaluated by the exact Q-element summation
///   f = | (1/Q) sum_q exp(j 2 pi r_q / lambda) exp(j pi q U theta) |
/// with r_q the exact antenna-user ranges of the sparse array. Periodic in
/// theta with period 2/U; equals |b_SLA^H a_SLA(theta)|.
double beam_pattern(const SystemConfig& config, const UserLocation& loc, double theta,
                    int interval);

/// Members with power > kappa * max(power), kappa = 10^(-mu_db/10)
/// (mu_db = 3 gives the 3-dB support with kappa ~ 0.5). Throws on an
/// all-zero profile.
AngularSupport angular_support(const PowerProfile& profile, const AngularGrid& grid,
                               double mu_db = 3.0);

/// Received-beam-pattern shifting: locates the minimum-power codeword
/// (ties to the lowest index), rotates the sequence so it lands last, and
/// relabels indices as [l-Q+1, ..., l] so the support becomes contiguous.
PowerProfile shift_profile(const PowerProfile& profile);

/// Median of a sorted support-member list; even cardinalities land between
/// the two central members (ties to the lower index), so a support with a
/// central 3-dB hole still resolves to the hole's center.
long support_median(const std::vector<long>& sorted_members);

/// K consecutive indices centered on the support median. Coincides with the
/// middle-K slice of a contiguous support.
std::vector<long> middle_k_indices(const std::vector<long>& sorted_members, int k);

struct TrainParams {
    int interval = 16;      // U
    int m_antennas = 17;    // M
    int n_ranges = 5;       // V
    int k_mid = 1;          // K (middle-K angles fed to the range sweep)
    double beta_delta = 1.2;
    double support_mu_db = 3.0;
    bool enforce_subarray_bounds = true;
};

struct TrainingCodebooks {
    Codebook dft;      // QU far-field codewords
    Codebook sparse;   // Q sparse codewords tiling one period
    Codebook subarray; // QU central-subarray codewords
    Codebook polar;    // QU x V near-field codewords
};

TrainingCodebooks build_training_codebooks(const SystemConfig& config,
                                           const TrainParams& params);

struct Phase1Result {
    PowerProfile raw;
    PowerProfile shifted;
    AngularSupport support;
    long median_index = 0;          // Med(S), shifted index space
    std::vector<long> mid_indices;  // middle-K shifted indices
    std::vector<double> candidates; // U alias angles of the median, in [-1, 1)
};

/// Phase 1: sweep the Q sparse codewords, shift, extract the support and
/// return the U period-aliased candidate angles of its median.
Phase1Result phase1_sweep(const SystemConfig& config, const Channel& ch,
                          const Codebook& sparse_cb, PilotMeter& meter,
                          double mu_db = 3.0, int k_mid = 1);

struct Phase2Result {
    long winner_grid_index = 0;
    int winner_alias = 0; // u in 0..U-1
    double angle = 0.0;
    std::vector<double> powers;
};

/// Phase 2: probe each candidate angle with the matching central-subarray
/// codeword; the largest received power resolves the angular ambiguity.
Phase2Result phase2_resolve(const SystemConfig& config, const Channel& ch,
                            const Codebook& sub_cb,
                            const std::vector<double>& candidates, PilotMeter& meter);

struct Phase3Result {
    double range = 0.0;
    int range_index = 0; // v*
    double peak_power = 0.0;
    Codeword chosen;
    std::vector<double> powers;
};

/// Phase 3: sweep the V polar codewords at the estimated angle and pick the
/// strongest ring.
Phase3Result phase3_range(const SystemConfig& config, const Channel& ch,
                          const Codebook& polar_cb, double est_angle,
                          PilotMeter& meter);

/// The full three-phase scheme. For k_mid = K > 1 the range sweep covers the
/// K middle support angles and the global power argmax wins. Reported
/// overhead follows T = (N-1)/U + U + K V (+1 when K = 1); the K > 1 form
/// undercounts the physical Q + U + K V pilots by one, which `measurements`
/// reports faithfully.
TrainingOutcome three_phase_train(const SystemConfig& config, const Channel& ch,
                                  const TrainingCodebooks& books,
                                  const TrainParams& params, Rng* rng);
TrainingOutcome three_phase_train(const SystemConfig& config, const Channel& ch,
                                  const TrainParams& params, Rng* rng);

/// 2D exhaustive search over all QU x V polar codewords; overhead QUV.
TrainingOutcome exhaustive_train(const SystemConfig& config, const Channel& ch,
                                 const Codebook& polar_cb, Rng* rng);

/// Two-phase benchmark: full-grid DFT sweep, middle-K support angles, then a
/// V-point range sweep per candidate; overhead QU + KV.
TrainingOutcome two_phase_train(const SystemConfig& config, const Channel& ch,
                                const Codebook& dft_cb, const Codebook& polar_cb,
                                int k_candidates, Rng* rng, double mu_db = 3.0);

/// Far-field benchmark: full-grid DFT sweep, power argmax; overhead QU.
TrainingOutcome far_field_train(const SystemConfig& config, const Channel& ch,
                                const Codebook& dft_cb, Rng* rng);

/// Raw least-squares channel estimate from N pilots on the N-point DFT grid
/// (scaled-unitary pilot matrix): noiseless recovery is exact and
/// E||estimate - h||^2 = N sigma^2 / P_tot.
cvec ls_channel_estimate(const SystemConfig& config, const Channel& ch, Rng* rng,
                         PilotMeter* meter = nullptr);

/// LS benchmark scheme; beamformer = estimate / ||estimate||.
TrainingOutcome ls_estimate(const SystemConfig& config, const Channel& ch, Rng* rng);

/// Genie beamformer matched to the full channel; zero overhead, rate upper
/// bound for every scheme.
TrainingOutcome perfect_csi_train(const SystemConfig& config, const Channel& ch);

/// Training-overhead formulas, one per scheme.
long overhead_three_phase(int n_antennas, int interval, int n_ranges, int k_mid = 1);
long overhead_exhaustive(int n_antennas, int interval, int n_ranges);
long overhead_two_phase(int n_antennas, int interval, int n_ranges, int k_candidates);
long overhead_far_field(int n_antennas, int interval);
long overhead_ls(int n_antennas);

/// Divisor-feasible activation interval closest to sqrt(N-1) subject to
/// U <= sqrt(1.2 (N-1)), i.e. the minimizer of the three-phase overhead
/// F(U) = (N-1)/U + U + V + 1 over the feasible set (ties to the smaller U).
int optimal_interval(int n_antennas, int v_ranges);

} // namespace nfbt
