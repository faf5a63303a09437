// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nfbt/channel.hpp"

namespace nfbt {

/// One beamforming vector plus its steering metadata. Weights are zero
/// exactly where active_mask is false and the vector is unit-norm over the
/// active antennas. Codeword indices follow 1-based grid numbering; index -1
/// marks a synthesized beamformer that belongs to no codebook.
struct Codeword {
    cvec weights;
    std::vector<bool> active_mask;
    double steer_angle = 0.0;
    std::optional<double> steer_range;
    int index = -1;
};

/// Uniform angular grid theta_s = (2s - QU - 1) / (QU), s = 1..QU.
/// angle() accepts any integer: indices outside 1..QU address the periodic
/// extension used by the shifted beam-pattern bookkeeping.
struct AngularGrid {
    int n_points = 0;

    double angle(long s) const {
        return (2.0 * static_cast<double>(s) - n_points - 1) / n_points;
    }
    double spacing() const { return 2.0 / n_points; }
    std::vector<double> angles() const;

    /// Wraps any integer index into 1..n_points (angle wrap by 2).
    long wrap_index(long s) const {
        long m = (s - 1) % n_points;
        if (m < 0)
            m += n_points;
        return m + 1;
    }
    /// Grid index of an on-grid angle (nearest for off-grid input).
    long index_of(double theta) const {
        return std::lround((theta * n_points + n_points + 1) / 2.0);
    }
};

enum class CodebookKind { dft, sparse_dft, subarray, polar };

struct Codebook {
    CodebookKind kind = CodebookKind::dft;
    AngularGrid grid;
    std::vector<Codeword> entries;

    // construction parameters, kept so serialized codebooks can be rebuilt
    int n_antennas = 0;
    double carrier_freq_hz = 0.0;
    int interval = 1;      // U (dft, sparse_dft, subarray grids)
    int m_antennas = 0;    // subarray only
    int n_ranges = 0;      // polar only
    double beta_delta = 0; // polar only

    const Codeword& at(long index_1based) const { return entries.at(index_1based - 1); }
};

/// Activation mask with true at antenna slots 0, U, 2U, ..., N-1.
/// Requires (N-1) divisible by U; popcount is Q = (N-1)/U + 1.
std::vector<bool> sampling_vector(int n_antennas, int interval);

/// Number of active sparse-array elements Q = (N-1)/U + 1.
int sparse_element_count(int n_antennas, int interval);

/// Conventional DFT codebook on the QU-point grid (one far_steering codeword
/// per grid angle).
Codebook dft_codebook(const SystemConfig& config, int interval);

/// Sparse DFT codebook: the Q consecutive grid codewords whose angles tile
/// one period [-1/U, 1/U), each restricted to the sparse activation mask and
/// renormalized. Requires (N-1)/U even so the symmetric index window of the
/// construction is well defined.
Codebook sparse_dft_codebook(const SystemConfig& config, int interval);

/// Non-fatal design-rule check U <= sqrt(1.2 (N-1)); returns a message when
/// violated (the subarray stage then has no admissible size).
std::optional<std::string> interval_constraint_warning(const SystemConfig& config,
                                                       int interval);

/// Admissible central-subarray sizes [U, sqrt(1.2 (N-1))]: the lower edge
/// keeps the subarray beam narrower than the 2/U alias spacing, the upper
/// edge keeps the user in the subarray far field.
std::pair<double, double> subarray_bounds(const SystemConfig& config, int interval);

/// Central-subarray codebook: QU codewords with M contiguous central
/// antennas active. `enforce_bounds = false` permits deliberately
/// inadmissible M for sensitivity sweeps.
Codebook subarray_codebook(const SystemConfig& config, int m_antennas, int interval,
                           bool enforce_bounds = true);

/// Polar-domain codebook: for each grid angle theta_s, V near-field
/// codewords focused at ranges r_{s,v} = alpha(1 - theta_s^2)/v with
/// alpha = N^2 d0^2 / (2 lambda beta_delta^2). Entry order is
/// (s-1)*V + v with v innermost.
Codebook polar_codebook(const SystemConfig& config, int n_ranges, double beta_delta,
                        const AngularGrid& grid);

const Codeword& polar_entry(const Codebook& polar, long grid_index, int range_index);

/// JSON text form: kind, construction parameters and per-codeword metadata;
/// weights are regenerated from the metadata on load unless inlined.
std::string codebook_to_json(const Codebook& cb, bool inline_weights = false);
Codebook codebook_from_json(const std::string& text);

} // namespace nfbt
