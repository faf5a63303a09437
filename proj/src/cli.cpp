// SPDX-License-Identifier: Apache-2.0

#include "nfbt/cli.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>

#include <CLI11.hpp>

#include "nfbt/harness.hpp"
#include "nfbt/numerics.hpp"

namespace nfbt::cli {

namespace {

int cmd_run(const std::string& scenario_path, const std::string& out_path,
            const std::string& format, long long seed_override, int trials_override,
            int threads, std::ostream& out) {
    Scenario sc = load_scenario(scenario_path);
    if (seed_override >= 0)
        sc.master_seed = static_cast<std::uint64_t>(seed_override);
    if (trials_override > 0)
        sc.n_trials = trials_override;

    ExperimentReport report = run(sc, threads);
    std::string text =
        format == "json" ? report_to_json_text(report) : report_to_csv_text(report);
    if (out_path.empty()) {
        out << text;
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot open output file '" + out_path + "'");
        f << text;
    }
    return 0;
}

int cmd_optimal_u(int antennas, int ranges, std::ostream& out) {
    int u = optimal_interval(antennas, ranges);
    out << "U = " << u << "\n";
    out << "T(3P) = " << overhead_three_phase(antennas, u, ranges, 1) << " pilots\n";
    return 0;
}

int cmd_overhead(int antennas, int interval, int ranges, int k, std::ostream& out) {
    long t3 = overhead_three_phase(antennas, interval, ranges, k);
    long tex = overhead_exhaustive(antennas, interval, ranges);
    long t2 = overhead_two_phase(antennas, interval, ranges, k);
    long tfar = overhead_far_field(antennas, interval);
    long tls = overhead_ls(antennas);
    out << "three_phase " << t3 << "\n";
    out << "exhaustive " << tex << "\n";
    out << "two_phase " << t2 << "\n";
    out << "far_field " << tfar << "\n";
    out << "ls " << tls << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * (1.0 - double(t3) / double(tex)));
    out << "reduction_vs_exhaustive " << buf << "%\n";
    return 0;
}

int cmd_pattern(double range_m, double angle, int interval, bool closed_form,
                int antennas, double freq_ghz, int samples, const std::string& out_path,
                std::ostream& out) {
    SystemConfig cfg =
        SystemConfig::make(antennas, freq_ghz * 1e9, 30.0, -80.0, -62.0, 30.0, 0);
    UserLocation loc{range_m, angle};
    int q = sparse_element_count(antennas, interval);

    std::ostream* sink = &out;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file)
            throw std::runtime_error("cannot open output file '" + out_path + "'");
        sink = &file;
    }

    *sink << (closed_form ? "theta,pattern,closed_form\n" : "theta,pattern\n");
    const double period = 2.0 / interval;
    char buf[160];
    for (int i = 0; i < samples; ++i) {
        double theta = -1.0 + 2.0 * i / samples;
        double f = beam_pattern(cfg, loc, theta, interval);
        if (closed_form) {
            // the closed-form model describes one period of the (periodic)
            // pattern, so fold the offset into [-1/U, 1/U)
            double delta = theta - angle;
            delta -= period * std::floor((delta + period / 2.0) / period);
            BetaParams bp = beta_params(range_m, angle, delta, q, interval,
                                        cfg.antenna_spacing_m);
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", theta, f,
                          closed_form_pattern(bp));
        } else {
            std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", theta, f);
        }
        *sink << buf;
    }
    return 0;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
    CLI::App app{"near-field beam training simulator for XL antenna arrays"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "run a Monte Carlo scenario");
    std::string scenario_path, out_path, format = "csv";
    long long seed_override = -1;
    int trials_override = 0, threads = 0;
    run_cmd->add_option("scenario", scenario_path, "scenario file")->required();
    run_cmd->add_option("--out", out_path, "output path (default: stdout)");
    run_cmd->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    run_cmd->add_option("--seed", seed_override, "override the master seed");
    run_cmd->add_option("--trials", trials_override, "override the trial count");
    run_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");

    // optimal-u
    auto* opt_cmd = app.add_subcommand("optimal-u",
                                       "overhead-minimizing activation interval");
    int antennas = 0, ranges = 5;
    opt_cmd->add_option("--antennas", antennas, "number of antennas N")->required();
    opt_cmd->add_option("--ranges", ranges, "polar range samples V")->required();

    // pattern
    auto* pat_cmd = app.add_subcommand("pattern", "emit received beam-pattern samples");
    double pr = 20.0, pangle = 0.0;
    int pinterval = 16, pantennas = 257, psamples = 2001;
    double pfreq = 30.0;
    bool pclosed = false;
    std::string pout;
    pat_cmd->add_option("--range", pr, "user range in meters")->required();
    pat_cmd->add_option("--angle", pangle, "user spatial angle in (-1, 1)")->required();
    pat_cmd->add_option("--interval", pinterval, "activation interval U")->required();
    pat_cmd->add_flag("--closed-form", pclosed, "add the closed-form column");
    pat_cmd->add_option("--antennas", pantennas, "number of antennas N");
    pat_cmd->add_option("--freq-ghz", pfreq, "carrier frequency in GHz");
    pat_cmd->add_option("--samples", psamples, "number of angle samples");
    pat_cmd->add_option("--out", pout, "output path (default: stdout)");

    // overhead
    auto* ovh_cmd = app.add_subcommand("overhead", "pilot counts of every scheme");
    int oantennas = 0, ointerval = 0, oranges = 0, ok = 1;
    ovh_cmd->add_option("--antennas", oantennas, "number of antennas N")->required();
    ovh_cmd->add_option("--interval", ointerval, "activation interval U")->required();
    ovh_cmd->add_option("--ranges", oranges, "polar range samples V")->required();
    ovh_cmd->add_option("--k", ok, "middle-K candidate count");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            out << app.help();
            return 0;
        }
        err << e.what() << "\n" << app.help();
        return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
    }

    try {
        if (run_cmd->parsed())
            return cmd_run(scenario_path, out_path, format, seed_override,
                           trials_override, threads, out);
        if (opt_cmd->parsed())
            return cmd_optimal_u(antennas, ranges, out);
        if (pat_cmd->parsed())
            return cmd_pattern(pr, pangle, pinterval, pclosed, pantennas, pfreq,
                               psamples, pout, out);
        if (ovh_cmd->parsed())
            return cmd_overhead(oantennas, ointerval, oranges, ok, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << app.help();
    return 1;
}

} // namespace nfbt::cli
