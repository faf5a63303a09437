// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nfbt/training.hpp"

namespace nfbt {

enum class SweepVariable { snr, range, rician, subarray_m, n_antennas, none };

std::string sweep_variable_name(SweepVariable v);
SweepVariable sweep_variable_from_name(const std::string& s);

/// Fixed value or per-trial uniform draw.
struct RandomOrFixed {
    double fixed = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool is_fixed = true;

    double draw(Rng& rng) const { return is_fixed ? fixed : rng.uniform(lo, hi); }
};

struct UserPlacement {
    RandomOrFixed range_m{20.0, 0, 0, true};
    RandomOrFixed angle{0.0, -0.6, 0.6, false};
    bool snap_angle_to_grid = false;
};

struct SchemeSpec {
    std::string id; // perfect_csi | ls | exhaustive | two_phase | three_phase | far_field
    int k_mid = 0;  // 0 = scheme default
};

struct Timing {
    double t_total_s = 0.2e-3;  // transmission window T_tol
    double t_symbol_s = 0.1e-6; // pilot symbol length T_s
};

struct Scenario {
    std::string name;
    SystemConfig config;
    TrainParams train;
    UserPlacement user;
    std::vector<SchemeSpec> schemes;
    SweepVariable sweep = SweepVariable::none;
    std::vector<double> sweep_values;
    int n_trials = 1000;
    std::uint64_t master_seed = 1;
    Timing timing;

    void validate() const;
};

/// Parses and validates a scenario file (JSON text). Constraint checks from
/// the other modules (divisibility, subarray bounds, Q parity) run eagerly;
/// violations surface as std::invalid_argument naming the constraint.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& s);

struct ReportRow {
    std::string scheme;
    double sweep_value = 0.0;
    double mean_rate_bpshz = 0.0;
    double mean_eff_rate_bpshz = 0.0;
    double mean_pilots = 0.0;
    std::optional<double> accuracy_vs_oracle; // codebook-selection schemes only
    double ci95 = 0.0;                        // 95% half-width of the mean rate
    long trials = 0;

    bool operator==(const ReportRow&) const = default;
};

struct ExperimentReport {
    std::string scenario_name;
    std::string sweep_variable;
    std::string scenario_json; // provenance echo
    std::vector<ReportRow> rows;

    const ReportRow& row(const std::string& scheme, double sweep_value) const;
};

/// Runs the Monte Carlo experiment: n_trials independent channel draws per
/// (scheme, sweep value), deterministically seeded from the master seed so
/// the report does not depend on thread count or execution order. All
/// schemes see the same channel realization at a given (sweep value, trial).
ExperimentReport run(const Scenario& scenario, int threads = 0);

void emit_csv(const ExperimentReport& report, const std::string& path);
void emit_json(const ExperimentReport& report, const std::string& path);
std::string report_to_csv_text(const ExperimentReport& report);
std::string report_to_json_text(const ExperimentReport& report);
ExperimentReport report_from_json_text(const std::string& text);

} // namespace nfbt
