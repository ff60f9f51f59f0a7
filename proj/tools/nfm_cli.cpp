// SPDX-License-Identifier: Apache-2.0
//
// nfmotion - near-field motion parameter estimation for large linear arrays
// Copyright (C) 2026 The nfmotion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// nfm: command-line front end.
//
//   nfm simulate  [--config F] [--seed S] [--snr dB] [--distorted] --out snap.bin
//   nfm admap     --in snap.bin --out map.csv
//   nfm tables build   [--config F] --out table.bin [--csv table.csv]
//   nfm tables inspect --in table.bin
//   nfm estimate  --in snap.bin [--config F] [--methods LIST] [--out results.csv]
//   nfm sweep     [--config F] [--seed S] [--methods LIST] [--snr dB,...] [--iters N] [--out nmse.csv]
//   nfm selftest
//
// Exit status: 0 success, 1 estimation failure, 2 configuration or usage error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nfm/config_file.hpp"
#include "nfm/errors.hpp"
#include "nfm/harness.hpp"
#include "nfm/selftest.hpp"
#include "nfm/spectrum.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEstimation = 1;
constexpr int kExitConfig = 2;

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string methods;
    std::vector<double> snr;
    std::optional<int> iters;
    std::string out;
    std::string in;
};

nfm::ExperimentConfig resolve_config(const CommonOptions& o)
{
    nfm::ExperimentConfig cfg =
        o.config.empty() ? nfm::ExperimentConfig::reference_defaults() : nfm::load_experiment_config(o.config);
    if (o.seed)
        cfg.seed = *o.seed;
    if (!o.methods.empty())
        cfg.methods = nfm::parse_method_list(o.methods);
    if (!o.snr.empty())
        cfg.snr_db = o.snr;
    if (o.iters)
        cfg.iterations = *o.iters;
    cfg.validate();
    return cfg;
}

int cmd_simulate(const CommonOptions& o, bool distorted)
{
    const nfm::ExperimentConfig cfg = resolve_config(o);
    const double snr = cfg.snr_db.front();
    const nfm::TrialSnapshots snaps = nfm::synthesize_trial(cfg, snr, nfm::trial_seed(cfg.seed, 0, 0));
    const nfm::SpaceTimeSnapshot& s = distorted ? snaps.distorted : snaps.perfect;
    if (o.out.size() > 4 && o.out.ends_with(".csv"))
        nfm::write_snapshot_csv(s, o.out);
    else
        nfm::write_snapshot(s, o.out);
    const nfm::TargetState t = cfg.resolved_target();
    std::cout << "wrote " << o.out << ": N=" << s.num_elements() << " M=" << s.num_symbols() << " theta=" << t.theta
              << " r=" << t.range << " v_r=" << t.v_r << " v_theta=" << t.v_theta << " element SNR " << snr
              << " dB (processed " << snr + cfg.processing_gain_db() << " dB)"
              << (distorted ? ", calibration errors applied" : "") << '\n';
    return kExitOk;
}

int cmd_admap(const CommonOptions& o, int oversample_a, int oversample_d)
{
    nfm::SpaceTimeSnapshot s = nfm::read_snapshot(o.in);
    if (!o.config.empty())
        s.scenario = resolve_config(o).array;
    const nfm::ADMap map = nfm::ad_transform(s, oversample_a, oversample_d);
    nfm::write_admap_csv(map, o.out);
    Eigen::Index row = 0, col = 0;
    map.power.maxCoeff(&row, &col);
    std::cout << "wrote " << o.out << ": " << map.power.rows() << " x " << map.power.cols() << ", peak at sin(theta)="
              << map.angle_axis[row] << " omega=" << map.doppler_axis[col] << '\n';
    return kExitOk;
}

int cmd_tables_build(const CommonOptions& o, const std::string& csv)
{
    const nfm::ExperimentConfig cfg = resolve_config(o);
    const nfm::AngleRangeTable t = nfm::build_angle_table(cfg.array, cfg.table_angle_grid(), cfg.table_range_grid(),
                                                          cfg.oversample_a, cfg.oversample_d);
    nfm::save_table(t, o.out);
    if (!csv.empty())
        nfm::write_table_csv(t, csv);
    std::cout << "wrote " << o.out << ": " << t.angle_grid.size() << " angles x " << t.range_grid.size()
              << " ranges, " << t.regularized_cells << " cells regularized\n";
    return kExitOk;
}

template <typename Table>
void print_table_summary(const Table& t, const char* kind, std::size_t rows, std::size_t cols)
{
    std::cout << "kind: " << kind << "\nrows x cols: " << rows << " x " << cols << "\nfingerprint: 0x" << std::hex
              << t.fingerprint << std::dec << "\noversampling: " << t.oversample_a << " x " << t.oversample_d
              << "\nwidth range: [" << t.width.minCoeff() << ", " << t.width.maxCoeff() << "]"
              << "\nregularized cells: " << t.regularized_cells << '\n';
}

int cmd_tables_inspect(const CommonOptions& o)
{
    try {
        const nfm::AngleRangeTable t = nfm::load_angle_table(o.in);
        print_table_summary(t, "angle/range", t.angle_grid.size(), t.range_grid.size());
        return kExitOk;
    } catch (const std::runtime_error&) {
    }
    const nfm::VelocityTable t = nfm::load_velocity_table(o.in);
    print_table_summary(t, "velocity", t.vr_grid.size(), t.vtheta_grid.size());
    std::cout << "conditioned at theta=" << t.cond_theta << " r=" << t.cond_range << '\n';
    return kExitOk;
}

int cmd_estimate(const CommonOptions& o)
{
    const nfm::ExperimentConfig cfg = resolve_config(o);
    nfm::SpaceTimeSnapshot s = nfm::read_snapshot(o.in);
    // The file carries only N and M; the rest of the scenario comes from the config.
    if (s.num_elements() != cfg.array.num_elements || s.num_symbols() != cfg.array.num_symbols)
        throw nfm::ConfigError("snapshot is " + std::to_string(s.num_elements()) + " x " +
                               std::to_string(s.num_symbols()) + " but the config describes " +
                               std::to_string(cfg.array.num_elements) + " x " +
                               std::to_string(cfg.array.num_symbols));
    s.scenario = cfg.array;
    const nfm::ExperimentContext ctx(cfg);
    const auto outcomes = nfm::estimate_methods(ctx, s, s, cfg.seed);

    std::ofstream csv;
    if (!o.out.empty()) {
        csv.open(o.out);
        if (!csv)
            throw std::runtime_error("cannot write " + o.out);
        csv << "method,theta_rad,range_m,v_r,v_theta,failed,flags\n" << std::setprecision(12);
    }
    bool any_failed = false;
    std::cout << std::left << std::setw(10) << "method" << std::setw(14) << "theta[deg]" << std::setw(12) << "r[m]"
              << std::setw(12) << "v_r[m/s]" << std::setw(14) << "v_theta[m/s]" << "flags\n";
    for (const nfm::MethodOutcome& m : outcomes) {
        const nfm::EstimationResult& e = m.estimate;
        std::string flags;
        if (e.window_saturated)
            flags += "window_saturated ";
        if (e.range_unresolved)
            flags += "range_unresolved ";
        if (e.degenerate_spectrum)
            flags += "degenerate ";
        const std::string name = nfm::method_name(m.method);
        if (m.failed) {
            any_failed = true;
            std::cout << std::setw(10) << name << "failed: " << m.error << '\n';
        } else {
            std::cout << std::setw(10) << name << std::setw(14) << e.theta * 180.0 / nfm::kPi << std::setw(12)
                      << e.range << std::setw(12) << e.v_r << std::setw(14) << e.v_theta << flags << '\n';
        }
        if (csv.is_open())
            csv << name << ',' << e.theta << ',' << e.range << ',' << e.v_r << ',' << e.v_theta << ','
                << (m.failed ? 1 : 0) << ',' << flags << '\n';
    }
    return any_failed ? kExitEstimation : kExitOk;
}

int cmd_sweep(const CommonOptions& o)
{
    const nfm::ExperimentConfig cfg = resolve_config(o);
    const nfm::ExperimentContext ctx(cfg);
    const nfm::NMSEReport report = nfm::run_sweep(ctx);
    if (o.out.empty())
        report.write_csv(std::cout);
    else
        report.write_csv(o.out);
    std::cerr << "sweep: " << report.rows.size() << " rows in " << report.wall_seconds << " s\n";
    return kExitOk;
}

int cmd_selftest()
{
    return nfm::print_selftest(nfm::run_selftest(), std::cout) ? kExitOk : kExitEstimation;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Near-field target localization and velocity estimation"};
    app.require_subcommand(1);

    CommonOptions o;
    auto add_config = [&](CLI::App* sub) { sub->add_option("--config", o.config, "experiment file")->check(CLI::ExistingFile); };
    auto add_run = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--methods", o.methods, "comma-separated methods (DFT-PC,DFT-CE,MUSIC-PC,MUSIC-CE,ML,PolarCB)");
    };

    bool distorted = false;
    auto* simulate = app.add_subcommand("simulate", "synthesize one snapshot file");
    add_config(simulate);
    add_run(simulate);
    simulate->add_option("--snr", o.snr, "per-element SNR in dB (first value used)");
    simulate->add_option("--out", o.out, "output path (.bin, or .csv for text)")->required();
    simulate->add_flag("--distorted", distorted, "apply a drawn calibration error");

    int oa = 4, od = 4;
    auto* admap = app.add_subcommand("admap", "angle-Doppler map of a snapshot");
    add_config(admap);
    admap->add_option("--in", o.in, "snapshot file")->required()->check(CLI::ExistingFile);
    admap->add_option("--out", o.out, "output CSV")->required();
    admap->add_option("--oversample-a", oa, "angular oversampling")->check(CLI::PositiveNumber);
    admap->add_option("--oversample-d", od, "Doppler oversampling")->check(CLI::PositiveNumber);

    auto* tables = app.add_subcommand("tables", "lookup tables");
    tables->require_subcommand(1);
    std::string csv;
    auto* build = tables->add_subcommand("build", "build the angle/range table");
    add_config(build);
    build->add_option("--out", o.out, "table file")->required();
    build->add_option("--csv", csv, "also write the table as CSV");
    auto* inspect = tables->add_subcommand("inspect", "summarize a table file");
    inspect->add_option("--in", o.in, "table file")->required()->check(CLI::ExistingFile);

    auto* estimate = app.add_subcommand("estimate", "run the selected methods on one snapshot");
    add_config(estimate);
    add_run(estimate);
    estimate->add_option("--in", o.in, "snapshot file")->required()->check(CLI::ExistingFile);
    estimate->add_option("--out", o.out, "results CSV");

    auto* sweep = app.add_subcommand("sweep", "Monte-Carlo NMSE sweep");
    add_config(sweep);
    add_run(sweep);
    sweep->add_option("--snr", o.snr, "per-element SNR list in dB")->delimiter(',');
    sweep->add_option("--iters", o.iters, "trials per SNR point")->check(CLI::PositiveNumber);
    sweep->add_option("--out", o.out, "NMSE CSV (stdout when omitted)");

    auto* selftest = app.add_subcommand("selftest", "run the invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitConfig;
    }

    try {
        if (*simulate)
            return cmd_simulate(o, distorted);
        if (*admap)
            return cmd_admap(o, oa, od);
        if (*build)
            return cmd_tables_build(o, csv);
        if (*inspect)
            return cmd_tables_inspect(o);
        if (*estimate)
            return cmd_estimate(o);
        if (*sweep)
            return cmd_sweep(o);
        if (*selftest)
            return cmd_selftest();
    } catch (const nfm::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const nfm::EstimationFailed& e) {
        std::cerr << "estimation failed: " << e.what() << " [" << e.diagnostics() << "]\n";
        return kExitEstimation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    std::cerr << app.help();
    return kExitConfig;
}
