// SPDX-License-Identifier: Apache-2.0

#include "nfbt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace nfbt {

using nlohmann::json;

std::string sweep_variable_name(SweepVariable v) {
    switch (v) {
    case SweepVariable::snr: return "snr";
    case SweepVariable::range: return "range";
    case SweepVariable::rician: return "rician";
    case SweepVariable::subarray_m: return "subarray_m";
    case SweepVariable::n_antennas: return "n_antennas";
    case SweepVariable::none: return "none";
    }
    return "?";
}

SweepVariable sweep_variable_from_name(const std::string& s) {
    if (s == "snr") return SweepVariable::snr;
    if (s == "range") return SweepVariable::range;
    if (s == "rician") return SweepVariable::rician;
    if (s == "subarray_m") return SweepVariable::subarray_m;
    if (s == "n_antennas") return SweepVariable::n_antennas;
    if (s == "none") return SweepVariable::none;
    throw std::invalid_argument("unknown sweep variable '" + s + "'");
}

namespace {

const std::vector<std::string> kSchemeIds = {"perfect_csi", "ls",         "exhaustive",
                                             "two_phase",   "three_phase", "far_field"};

bool scheme_selects_polar_codeword(const std::string& id) {
    return id == "exhaustive" || id == "two_phase" || id == "three_phase";
}

int default_k(const std::string& id, const TrainParams& train) {
    if (id == "three_phase")
        return train.k_mid;
    if (id == "two_phase")
        return 1;
    return 1;
}

// Feasible (U, M) for a given antenna count: U a divisor with even quotient
// under the subarray constraint minimizing (N-1)/U + U; M the largest
// admissible subarray size.
std::pair<int, int> derive_geometry(int n_antennas) {
    const int m = n_antennas - 1;
    const double limit = std::sqrt(1.2 * m) + 1e-9;
    int best_u = 0;
    long best_cost = 0;
    for (int u = 1; u <= m; ++u) {
        if (m % u != 0 || (m / u) % 2 != 0 || u > limit)
            continue;
        long cost = static_cast<long>(m / u) + u;
        if (best_u == 0 || cost < best_cost) {
            best_u = u;
            best_cost = cost;
        }
    }
    if (best_u == 0)
        throw std::invalid_argument(
            "no feasible activation interval for N = " + std::to_string(n_antennas) +
            " (need a divisor U of N-1 with (N-1)/U even and U <= sqrt(1.2 (N-1)))");
    int sub = static_cast<int>(std::floor(limit));
    return {best_u, std::max(sub, best_u)};
}

} // namespace

void Scenario::validate() const {
    config.validate();
    if (n_trials < 1)
        throw std::invalid_argument("scenario: n_trials must be >= 1");
    if (schemes.empty())
        throw std::invalid_argument("scenario: at least one scheme is required");
    for (const auto& s : schemes)
        if (std::find(kSchemeIds.begin(), kSchemeIds.end(), s.id) == kSchemeIds.end())
            throw std::invalid_argument("scenario: unknown scheme id '" + s.id + "'");
    if (sweep != SweepVariable::none && sweep_values.empty())
        throw std::invalid_argument("scenario: sweep_values must be non-empty");
    if (sweep == SweepVariable::snr && !user.range_m.is_fixed)
        throw std::invalid_argument(
            "scenario: an snr sweep requires a fixed user range (the transmit "
            "power is back-computed from the reference SNR at that range)");
    if (!(timing.t_total_s > 0.0) || !(timing.t_symbol_s > 0.0))
        throw std::invalid_argument("scenario: timing durations must be positive");

    // geometry checks run eagerly unless the sweep itself varies them
    if (sweep != SweepVariable::n_antennas) {
        sparse_dft_codebook(config, train.interval); // divisibility + parity
        if (sweep != SweepVariable::subarray_m)
            subarray_codebook(config, train.m_antennas, train.interval,
                              train.enforce_subarray_bounds);
    }
    if (train.n_ranges < 1)
        throw std::invalid_argument("scenario: range_samples must be >= 1");
}

namespace {

RandomOrFixed parse_random_or_fixed(const json& j, const std::string& field) {
    RandomOrFixed r;
    if (j.is_number()) {
        r.is_fixed = true;
        r.fixed = j.get<double>();
        return r;
    }
    if (j.is_object() && j.contains("uniform")) {
        auto arr = j.at("uniform");
        if (!arr.is_array() || arr.size() != 2)
            throw std::invalid_argument("scenario field '" + field +
                                        "': uniform needs [lo, hi]");
        r.is_fixed = false;
        r.lo = arr[0].get<double>();
        r.hi = arr[1].get<double>();
        return r;
    }
    throw std::invalid_argument("scenario field '" + field +
                                "' must be a number or {\"uniform\": [lo, hi]}");
}

json random_or_fixed_to_json(const RandomOrFixed& r) {
    if (r.is_fixed)
        return r.fixed;
    return json{{"uniform", {r.lo, r.hi}}};
}

template <typename T>
T require(const json& j, const std::string& field) {
    if (!j.contains(field))
        throw std::invalid_argument("scenario: missing required field '" + field + "'");
    try {
        return j.at(field).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("scenario: field '" + field + "' has wrong type");
    }
}

} // namespace

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario parse error: ") + e.what());
    }

    Scenario sc;
    sc.name = j.value("name", "scenario");

    if (!j.contains("config"))
        throw std::invalid_argument("scenario: missing required field 'config'");
    const json& jc = j.at("config");
    int n_antennas = require<int>(jc, "n_antennas");
    double freq_hz = require<double>(jc, "carrier_freq_ghz") * 1e9;
    double tx_dbm = require<double>(jc, "tx_power_dbm");
    double noise_dbm = require<double>(jc, "noise_power_dbm");
    double ref_gain = require<double>(jc, "ref_gain_db");
    double rician = require<double>(jc, "rician_factor_db");
    sc.config = SystemConfig::make(n_antennas, freq_hz, tx_dbm, noise_dbm, ref_gain,
                                   rician, jc.value("n_nlos_paths", 0));
    if (jc.value("nlos_normalization", "aggregate") == std::string("per_path"))
        sc.config.nlos_norm = SystemConfig::NlosNormalization::per_path;

    if (j.contains("training")) {
        const json& jt = j.at("training");
        sc.train.interval = require<int>(jt, "interval");
        sc.train.m_antennas = require<int>(jt, "subarray_antennas");
        sc.train.n_ranges = jt.value("range_samples", 5);
        sc.train.k_mid = jt.value("mid_k", 1);
        sc.train.beta_delta = jt.value("beta_delta", 1.2);
        sc.train.support_mu_db = jt.value("support_threshold_db", 3.0);
    } else {
        auto [u, m] = derive_geometry(sc.config.n_antennas);
        sc.train.interval = u;
        sc.train.m_antennas = m;
    }

    if (j.contains("user")) {
        const json& ju = j.at("user");
        if (ju.contains("range_m"))
            sc.user.range_m = parse_random_or_fixed(ju.at("range_m"), "user.range_m");
        if (ju.contains("angle"))
            sc.user.angle = parse_random_or_fixed(ju.at("angle"), "user.angle");
        sc.user.snap_angle_to_grid = ju.value("snap_angle_to_grid", false);
    }

    if (!j.contains("schemes"))
        throw std::invalid_argument("scenario: missing required field 'schemes'");
    for (const auto& js : j.at("schemes")) {
        SchemeSpec spec;
        if (js.is_string()) {
            spec.id = js.get<std::string>();
        } else {
            spec.id = require<std::string>(js, "id");
            spec.k_mid = js.value("mid_k", 0);
        }
        sc.schemes.push_back(std::move(spec));
    }

    if (j.contains("sweep")) {
        const json& jw = j.at("sweep");
        sc.sweep = sweep_variable_from_name(require<std::string>(jw, "variable"));
        sc.sweep_values = require<std::vector<double>>(jw, "values");
    }

    sc.n_trials = j.value("trials", 1000);
    sc.master_seed = j.value("seed", 1ULL);
    if (j.contains("timing")) {
        const json& jt = j.at("timing");
        sc.timing.t_total_s = require<double>(jt, "t_total_ms") * 1e-3;
        sc.timing.t_symbol_s = require<double>(jt, "t_symbol_us") * 1e-6;
    }

    sc.validate();
    return sc;
}

std::string scenario_to_json_text(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["config"] = {{"n_antennas", s.config.n_antennas},
                   {"carrier_freq_ghz", s.config.carrier_freq_hz / 1e9},
                   {"tx_power_dbm", watts_to_dbm(s.config.tx_power_w)},
                   {"noise_power_dbm", watts_to_dbm(s.config.noise_power_w)},
                   {"ref_gain_db", s.config.ref_gain_db},
                   {"rician_factor_db", s.config.rician_factor_db},
                   {"n_nlos_paths", s.config.n_nlos_paths},
                   {"nlos_normalization",
                    s.config.nlos_norm == SystemConfig::NlosNormalization::aggregate
                        ? "aggregate"
                        : "per_path"}};
    j["training"] = {{"interval", s.train.interval},
                     {"subarray_antennas", s.train.m_antennas},
                     {"range_samples", s.train.n_ranges},
                     {"mid_k", s.train.k_mid},
                     {"beta_delta", s.train.beta_delta},
                     {"support_threshold_db", s.train.support_mu_db}};
    j["user"] = {{"range_m", random_or_fixed_to_json(s.user.range_m)},
                 {"angle", random_or_fixed_to_json(s.user.angle)},
                 {"snap_angle_to_grid", s.user.snap_angle_to_grid}};
    auto& schemes = j["schemes"] = json::array();
    for (const auto& sp : s.schemes) {
        json e{{"id", sp.id}};
        if (sp.k_mid > 0)
            e["mid_k"] = sp.k_mid;
        schemes.push_back(std::move(e));
    }
    if (s.sweep != SweepVariable::none)
        j["sweep"] = {{"variable", sweep_variable_name(s.sweep)},
                      {"values", s.sweep_values}};
    j["trials"] = s.n_trials;
    j["seed"] = s.master_seed;
    j["timing"] = {{"t_total_ms", s.timing.t_total_s * 1e3},
                   {"t_symbol_us", s.timing.t_symbol_s * 1e6}};
    return j.dump(2);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    Scenario sc = scenario_from_json_text(ss.str());
    // near-field placement is advisory: flag it, do not reject it
    if (sc.user.range_m.is_fixed && sc.sweep != SweepVariable::range &&
        !in_fresnel_region(sc.config, {sc.user.range_m.fixed, 0.0}))
        std::fprintf(stderr,
                     "warning: scenario '%s' places the user at %.3g m, outside "
                     "the Fresnel region [%.3g, %.3g] m\n",
                     sc.name.c_str(), sc.user.range_m.fixed,
                     fresnel_distance(sc.config), rayleigh_distance(sc.config));
    return sc;
}

namespace {

struct EffectiveSetup {
    SystemConfig config;
    TrainParams train;
    UserPlacement user;
};

EffectiveSetup apply_sweep(const Scenario& sc, double value) {
    EffectiveSetup e{sc.config, sc.train, sc.user};
    switch (sc.sweep) {
    case SweepVariable::none:
        break;
    case SweepVariable::snr: {
        // hit the requested reference SNR at the (fixed) user range by
        // scaling the transmit power; the noise floor stays put
        double r0 = e.user.range_m.fixed;
        e.config.tx_power_w = db_to_linear(value) * r0 * r0 * e.config.noise_power_w /
                              (e.config.n_antennas * e.config.ref_gain_linear());
        break;
    }
    case SweepVariable::range:
        e.user.range_m = RandomOrFixed{value, 0, 0, true};
        break;
    case SweepVariable::rician:
        e.config.rician_factor_db = value;
        break;
    case SweepVariable::subarray_m:
        e.train.m_antennas = static_cast<int>(std::lround(value));
        e.train.enforce_subarray_bounds = false;
        break;
    case SweepVariable::n_antennas: {
        e.config.n_antennas = static_cast<int>(std::lround(value));
        auto [u, m] = derive_geometry(e.config.n_antennas);
        e.train.interval = u;
        e.train.m_antennas = m;
        break;
    }
    }
    e.config.validate();
    return e;
}

long oracle_polar_index(const Channel& ch, const Codebook& polar) {
    long best = 0;
    double best_gain = -1.0;
    for (const auto& w : polar.entries) {
        double g = std::norm(beamforming_amplitude(ch, w));
        if (g > best_gain) {
            best_gain = g;
            best = w.index;
        }
    }
    return best;
}

TrainingOutcome run_scheme(const SchemeSpec& spec, const SystemConfig& cfg,
                           const TrainParams& train, const TrainingCodebooks& books,
                           const Channel& ch, Rng* rng) {
    TrainingOutcome out;
    int k = spec.k_mid > 0 ? spec.k_mid : default_k(spec.id, train);
    if (spec.id == "perfect_csi") {
        out = perfect_csi_train(cfg, ch);
    } else if (spec.id == "ls") {
        out = ls_estimate(cfg, ch, rng);
    } else if (spec.id == "exhaustive") {
        out = exhaustive_train(cfg, ch, books.polar, rng);
    } else if (spec.id == "far_field") {
        out = far_field_train(cfg, ch, books.dft, rng);
    } else if (spec.id == "two_phase") {
        out = two_phase_train(cfg, ch, books.dft, books.polar, k, rng,
                              train.support_mu_db);
    } else if (spec.id == "three_phase") {
        TrainParams p = train;
        p.k_mid = k;
        out = three_phase_train(cfg, ch, books, p, rng);
    } else {
        throw std::invalid_argument("unknown scheme id '" + spec.id + "'");
    }
    // overhead accounting: the reported pilot budget must match the metered
    // observations; the mid-K formula undercounts its phase-1 sweep by one
    long expected = out.pilots_used;
    if (spec.id == "three_phase" && k > 1)
        expected += 1;
    if (out.measurements != expected)
        throw std::logic_error("scheme '" + spec.id + "' consumed " +
                               std::to_string(out.measurements) +
                               " pilots but reported " +
                               std::to_string(out.pilots_used));
    return out;
}

struct TrialCell {
    double rate = 0.0;
    double eff = 0.0;
    double pilots = 0.0;
    double match = 0.0;
};

} // namespace

const ReportRow& ExperimentReport::row(const std::string& scheme,
                                       double sweep_value) const {
    for (const auto& r : rows)
        if (r.scheme == scheme && r.sweep_value == sweep_value)
            return r;
    throw std::out_of_range("report has no row for scheme '" + scheme + "'");
}

ExperimentReport run(const Scenario& scenario, int threads) {
    scenario.validate();
    if (threads <= 0) {
        unsigned hc = std::thread::hardware_concurrency();
        threads = hc > 0 ? static_cast<int>(hc) : 1;
    }

    std::vector<double> values = scenario.sweep_values;
    if (scenario.sweep == SweepVariable::none)
        values = {0.0};

    const int n_schemes = static_cast<int>(scenario.schemes.size());
    const int n_trials = scenario.n_trials;
    bool need_oracle = false;
    for (const auto& s : scenario.schemes)
        need_oracle = need_oracle || scheme_selects_polar_codeword(s.id);

    ExperimentReport report;
    report.scenario_name = scenario.name;
    report.sweep_variable = sweep_variable_name(scenario.sweep);
    report.scenario_json = scenario_to_json_text(scenario);

    for (double value : values) {
        EffectiveSetup setup = apply_sweep(scenario, value);
        TrainingCodebooks books = build_training_codebooks(setup.config, setup.train);

        std::vector<TrialCell> cells(static_cast<std::size_t>(n_schemes) * n_trials);
        auto cell = [&](int scheme, int trial) -> TrialCell& {
            return cells[static_cast<std::size_t>(scheme) * n_trials + trial];
        };

        auto work = [&](int first_trial, int stride) {
            for (int t = first_trial; t < n_trials; t += stride) {
                Rng channel_rng(
                    derive_seed(scenario.master_seed, "channel", value, t));
                UserLocation loc;
                loc.range_m = setup.user.range_m.draw(channel_rng);
                loc.spatial_angle = setup.user.angle.draw(channel_rng);
                if (setup.user.snap_angle_to_grid) {
                    const AngularGrid& grid = books.dft.grid;
                    loc.spatial_angle =
                        grid.angle(grid.wrap_index(grid.index_of(loc.spatial_angle)));
                }
                Channel ch = make_channel(setup.config, loc, channel_rng);

                long oracle = need_oracle ? oracle_polar_index(ch, books.polar) : 0;

                for (int si = 0; si < n_schemes; ++si) {
                    const SchemeSpec& spec = scenario.schemes[si];
                    Rng scheme_rng(
                        derive_seed(scenario.master_seed, spec.id, value, t));
                    TrainingOutcome outcome = run_scheme(spec, setup.config,
                                                         setup.train, books, ch,
                                                         &scheme_rng);
                    TrialCell& c = cell(si, t);
                    c.rate = achievable_rate(ch, outcome.chosen, setup.config);
                    c.eff = (1.0 - outcome.pilots_used * scenario.timing.t_symbol_s /
                                       scenario.timing.t_total_s) *
                            c.rate;
                    c.pilots = static_cast<double>(outcome.pilots_used);
                    c.match = (scheme_selects_polar_codeword(spec.id) &&
                               outcome.chosen.index == oracle)
                                  ? 1.0
                                  : 0.0;
                }
            }
        };

        if (threads == 1 || n_trials == 1) {
            work(0, 1);
        } else {
            std::vector<std::thread> pool;
            int n_workers = std::min(threads, n_trials);
            pool.reserve(n_workers);
            for (int w = 0; w < n_workers; ++w)
                pool.emplace_back(work, w, n_workers);
            for (auto& th : pool)
                th.join();
        }

        for (int si = 0; si < n_schemes; ++si) {
            ReportRow row;
            row.scheme = scenario.schemes[si].id;
            row.sweep_value = value;
            row.trials = n_trials;
            double sum_rate = 0, sum_eff = 0, sum_pilots = 0, sum_match = 0;
            for (int t = 0; t < n_trials; ++t) {
                const TrialCell& c = cell(si, t);
                sum_rate += c.rate;
                sum_eff += c.eff;
                sum_pilots += c.pilots;
                sum_match += c.match;
            }
            row.mean_rate_bpshz = sum_rate / n_trials;
            row.mean_eff_rate_bpshz = sum_eff / n_trials;
            row.mean_pilots = sum_pilots / n_trials;
            if (scheme_selects_polar_codeword(row.scheme))
                row.accuracy_vs_oracle = sum_match / n_trials;
            if (n_trials > 1) {
                double ss = 0.0;
                for (int t = 0; t < n_trials; ++t) {
                    double d = cell(si, t).rate - row.mean_rate_bpshz;
                    ss += d * d;
                }
                row.ci95 = 1.96 * std::sqrt(ss / (n_trials - 1)) /
                           std::sqrt(static_cast<double>(n_trials));
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

namespace {
std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}
} // namespace

std::string report_to_csv_text(const ExperimentReport& report) {
    std::string out = "scheme,sweep_variable,sweep_value,mean_rate_bpshz,"
                      "mean_eff_rate_bpshz,mean_pilots,accuracy_vs_oracle,ci95\n";
    for (const auto& r : report.rows) {
        out += r.scheme + ',' + report.sweep_variable + ',' + fmt_double(r.sweep_value) +
               ',' + fmt_double(r.mean_rate_bpshz) + ',' +
               fmt_double(r.mean_eff_rate_bpshz) + ',' + fmt_double(r.mean_pilots) +
               ',' + (r.accuracy_vs_oracle ? fmt_double(*r.accuracy_vs_oracle) : "") +
               ',' + fmt_double(r.ci95) + '\n';
    }
    return out;
}

std::string report_to_json_text(const ExperimentReport& report) {
    json j;
    j["scenario"] = json::parse(report.scenario_json);
    j["sweep_variable"] = report.sweep_variable;
    auto& rows = j["rows"] = json::array();
    for (const auto& r : report.rows) {
        json e{{"scheme", r.scheme},
               {"sweep_value", r.sweep_value},
               {"mean_rate_bpshz", r.mean_rate_bpshz},
               {"mean_eff_rate_bpshz", r.mean_eff_rate_bpshz},
               {"mean_pilots", r.mean_pilots},
               {"ci95", r.ci95},
               {"trials", r.trials}};
        if (r.accuracy_vs_oracle)
            e["accuracy_vs_oracle"] = *r.accuracy_vs_oracle;
        else
            e["accuracy_vs_oracle"] = nullptr;
        rows.push_back(std::move(e));
    }
    return j.dump(2);
}

ExperimentReport report_from_json_text(const std::string& text) {
    json j = json::parse(text);
    ExperimentReport report;
    report.scenario_json = j.at("scenario").dump(2);
    report.scenario_name = j.at("scenario").value("name", "scenario");
    report.sweep_variable = j.at("sweep_variable").get<std::string>();
    for (const auto& e : j.at("rows")) {
        ReportRow r;
        r.scheme = e.at("scheme").get<std::string>();
        r.sweep_value = e.at("sweep_value").get<double>();
        r.mean_rate_bpshz = e.at("mean_rate_bpshz").get<double>();
        r.mean_eff_rate_bpshz = e.at("mean_eff_rate_bpshz").get<double>();
        r.mean_pilots = e.at("mean_pilots").get<double>();
        r.ci95 = e.at("ci95").get<double>();
        r.trials = e.at("trials").get<long>();
        if (!e.at("accuracy_vs_oracle").is_null())
            r.accuracy_vs_oracle = e.at("accuracy_vs_oracle").get<double>();
        report.rows.push_back(std::move(r));
    }
    return report;
}

namespace {
void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open output file '" + path + "'");
    out << text;
    if (!out)
        throw std::runtime_error("write failed for '" + path + "'");
}
} // namespace

void emit_csv(const ExperimentReport& report, const std::string& path) {
    write_file(path, report_to_csv_text(report));
}

void emit_json(const ExperimentReport& report, const std::string& path) {
    write_file(path, report_to_json_text(report));
}

} // namespace nfbt
