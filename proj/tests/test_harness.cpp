// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "nfm/config_file.hpp"
#include "nfm/errors.hpp"
#include "nfm/harness.hpp"

using namespace nfm;

namespace {

ExperimentConfig small_experiment()
{
    ExperimentConfig cfg;
    cfg.array = ArrayConfig::make(64, 28e9, 5e3, 16);
    cfg.target = {0.2, 1.2, 5.0, 4.0};
    cfg.snr_db = {0.0, 10.0};
    cfg.iterations = 3;
    cfg.seed = 21;
    cfg.angle_points = 24;
    cfg.range_points = 12;
    cfg.range_min = 0.7;
    cfg.range_max = 3.0;
    cfg.polar_points = 400;
    cfg.refinement = RefinementConfig::defaults(cfg.array);
    cfg.refinement.grid_points = 128;
    cfg.gradient.restarts = 1;
    cfg.gradient.max_iters = 30;
    return cfg;
}

std::string csv_of(const NMSEReport& r)
{
    std::ostringstream os;
    r.write_csv(os);
    return os.str();
}

ExperimentConfig parse(const std::string& text)
{
    std::istringstream is(text);
    return parse_experiment_config(is);
}

}  // namespace

TEST_CASE("nmse arithmetic")
{
    CHECK(nmse({1.0, 2.0}, {0.0, 0.0}).db == Catch::Approx(0.0).margin(1e-12));
    CHECK(nmse({1.0, 1.0}, {1.01, 0.99}).db == Catch::Approx(-40.0).margin(1e-9));
    CHECK(nmse({3.0, -4.0}, {3.0, -4.0}).db == kNmseFloorDb);
    CHECK_FALSE(nmse({3.0}, {3.1}).mse_fallback);

    const NmseValue mse = nmse({0.0, 0.0}, {0.1, -0.1});
    CHECK(mse.mse_fallback);
    CHECK(mse.db == Catch::Approx(-20.0).margin(1e-9));

    CHECK_THROWS_AS(nmse({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(nmse({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("method names")
{
    for (Method m : kAllMethods)
        CHECK(parse_method(method_name(m)) == m);
    CHECK_FALSE(parse_method("FFT").has_value());
    const auto list = parse_method_list("MUSIC-PC, ML,PolarCB");
    REQUIRE(list.size() == 3);
    CHECK(list[0] == Method::music_pc);
    CHECK(list[2] == Method::polar_cb);
    CHECK_THROWS_AS(parse_method_list("MUSIC-PC, Capon"), ConfigError);
    CHECK_THROWS_AS(parse_method_list(""), ConfigError);
}

TEST_CASE("experiment config parsing")
{
    const ExperimentConfig d = parse("");
    CHECK(d.array.num_elements == 256);
    CHECK(d.iterations == 1000);
    CHECK(d.processing_gain_db() == Catch::Approx(10.0 * std::log10(256.0 * 32.0)));
    CHECK(d.processing_gain_db() == Catch::Approx(39.13).margin(0.005));
    CHECK(d.resolved_target().range == Catch::Approx(d.array.rayleigh_distance() / 50.0));

    const ExperimentConfig c = parse("; comment\n[array]\nelements = 64\nsymbols = 16\n"
                                     "[target]\ntheta_deg = 30\nrange_m = 1.5\n"
                                     "[noise]\nsnr_db = -5, 5\niterations = 7\nseed = 99\n"
                                     "[methods]\nlist = DFT-PC, ML\n"
                                     "[grids]\nrange_min_m = 0.8\nrange_max_m = 2.5\nrange_points = 5\n");
    CHECK(c.array.num_elements == 64);
    CHECK(c.target.theta == Catch::Approx(kPi / 6.0));
    CHECK(c.target.range == 1.5);
    CHECK(c.snr_db == std::vector<double>{-5.0, 5.0});
    CHECK(c.iterations == 7);
    CHECK(c.seed == 99);
    CHECK(c.methods.size() == 2);
    const auto grid = c.table_range_grid();
    REQUIRE(grid.size() == 5);
    CHECK(grid.front() == Catch::Approx(0.8));
    CHECK(grid.back() == Catch::Approx(2.5));

    const ExperimentConfig p = parse("[noise]\nsnr_processed_db = 40\n");
    CHECK(p.snr_db[0] == Catch::Approx(40.0 - p.processing_gain_db()));

    CHECK_THROWS_AS(parse("[arrays]\nelements = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse("[array]\nelement = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse("[array]\nelements = four\n"), ConfigError);
    CHECK_THROWS_AS(parse("[array]\nelements = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse("[target]\ntheta_deg = 10\ntheta_rad = 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[noise]\nsnr_db = 1\nsnr_processed_db = 40\n"), ConfigError);
    CHECK_THROWS_AS(parse("[noise]\niterations = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse("[grids]\nrange_min_m = 5\nrange_max_m = 2\n"), ConfigError);
    CHECK_THROWS_AS(load_experiment_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("config description round-trips")
{
    ExperimentConfig c = small_experiment();
    const std::string text = describe_config(c);
    const ExperimentConfig back = parse(text);
    CHECK(describe_config(back) == text);
    CHECK(back.array.fingerprint() == c.array.fingerprint());
    CHECK(back.table_range_grid().front() == Catch::Approx(0.7));
}

TEST_CASE("trial seeds and synthesis")
{
    std::set<std::uint64_t> seeds;
    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t i = 0; i < 250; ++i)
            seeds.insert(trial_seed(7, s, i));
    CHECK(seeds.size() == 1000);
    CHECK(trial_seed(7, 1, 2) == trial_seed(7, 1, 2));
    CHECK(trial_seed(7, 1, 2) != trial_seed(8, 1, 2));

    const ExperimentConfig cfg = small_experiment();
    const TrialSnapshots a = synthesize_trial(cfg, 10.0, 5);
    const TrialSnapshots b = synthesize_trial(cfg, 10.0, 5);
    CHECK(a.perfect.data == b.perfect.data);
    CHECK(a.distorted.data == b.distorted.data);
    // One noise draw shared by both snapshots.
    const CMatrix noise_p = a.perfect.data - clean_signal(cfg.array, cfg.resolved_target(),
                                                          CalibrationProfile::identity(64), cfg.xi()).data;
    const CMatrix noise_d =
        a.distorted.data - clean_signal(cfg.array, cfg.resolved_target(), a.calibration, cfg.xi()).data;
    CHECK((noise_p - noise_d).cwiseAbs().maxCoeff() < 1e-12);
    // Element SNR: per-sample signal power xi/N over the noise variance.
    const double measured = noise_p.squaredNorm() / noise_p.size();
    CHECK(10.0 * std::log10(cfg.xi() / 64 / measured) == Catch::Approx(10.0).margin(0.3));

    for (int i = 0; i < 64; ++i) {
        CHECK(std::abs(std::arg(a.calibration.weight(i))) <= cfg.calib_max_phase + 1e-15);
        CHECK(std::abs(20.0 * std::log10(std::abs(a.calibration.weight(i)))) <= cfg.calib_max_amp_db + 1e-12);
    }
}

TEST_CASE("sweep reproducibility and method independence")
{
    const ExperimentConfig cfg = small_experiment();
    const ExperimentContext ctx(cfg);
    const NMSEReport r1 = run_sweep(ctx);
    const NMSEReport r2 = run_sweep(ctx);
    const std::string csv = csv_of(r1);
    CHECK(csv == csv_of(r2));
    CHECK(csv.find("nan") == std::string::npos);
    CHECK(csv.find("inf") == std::string::npos);
    CHECK(csv.rfind("# ", 0) == 0);
    CHECK(csv.find("method,parameter,snr_db_processed,snr_db_element,nmse_db,trials,failures\n") !=
          std::string::npos);
    CHECK(r1.rows.size() == cfg.snr_db.size() * cfg.methods.size() * 4);

    const NmseRow* row = r1.find("MUSIC-PC", "theta", 10.0);
    REQUIRE(row != nullptr);
    CHECK(row->trials == 3);
    CHECK(row->snr_db_processed == Catch::Approx(10.0 + cfg.processing_gain_db()));

    ExperimentConfig only = cfg;
    only.methods = {Method::music_pc};
    const NMSEReport r3 = run_sweep(ExperimentContext(only));
    const NmseRow* alone = r3.find("MUSIC-PC", "theta", 10.0);
    REQUIRE(alone != nullptr);
    CHECK(alone->nmse_db == row->nmse_db);
    CHECK(r3.find("ML", "theta", 10.0) == nullptr);
}

TEST_CASE("single-iteration sweep equals run_trial")
{
    ExperimentConfig cfg = small_experiment();
    cfg.iterations = 1;
    cfg.snr_db = {20.0};
    cfg.methods = {Method::dft_pc, Method::music_pc, Method::polar_cb};
    const ExperimentContext ctx(cfg);
    const NMSEReport report = run_sweep(ctx);
    const TrialOutcome trial = run_trial(ctx, 20.0, trial_seed(cfg.seed, 0, 0));
    const TargetState truth = cfg.resolved_target();
    const char* names[] = {"theta", "range", "v_r", "v_theta"};
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        const MethodOutcome& mo = trial.methods[m];
        REQUIRE_FALSE(mo.failed);
        const auto err = parameter_errors(mo.estimate, truth);
        const double tv[] = {truth.theta, truth.range, truth.v_r, truth.v_theta};
        for (int k = 0; k < 4; ++k) {
            const NmseRow* row = report.find(method_name(cfg.methods[m]), names[k], 20.0);
            REQUIRE(row != nullptr);
            const double expect = std::max(kNmseFloorDb, 10.0 * std::log10(err[k] * err[k] / (tv[k] * tv[k])));
            CHECK(row->nmse_db == Catch::Approx(expect).margin(1e-9));
        }
    }
}

TEST_CASE("empty NMSE cell writes a blank field")
{
    NMSEReport r;
    NmseRow row;
    row.method = "ML";
    row.parameter = "theta";
    row.trials = 2;
    row.failures = 2;
    row.empty = true;
    r.rows.push_back(row);
    const std::string csv = csv_of(r);
    CHECK(csv.find("ML,theta,0.0000,0.0000,,2,2\n") != std::string::npos);
}

TEST_CASE("experiment config validation")
{
    ExperimentConfig c = small_experiment();
    CHECK_NOTHROW(c.validate());
    c.methods.clear();
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_experiment();
    c.snr_db.clear();
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_experiment();
    c.xi_override = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_experiment();
    c.calib_max_phase = -0.1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_experiment();
    c.link = RadarLink{2.0, 10.0, 0.5};
    CHECK(c.xi() > 0.0);
}
