// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

fs::path scratch()
{
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "nfm_test_cli";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Run nfm(const std::string& args)
{
    const fs::path log = scratch() / "stdout.txt";
    const std::string cmd = std::string("\"") + NFM_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream is(log);
    std::ostringstream ss;
    ss << is.rdbuf();
    r.out = ss.str();
    return r;
}

std::string read_file(const fs::path& p)
{
    std::ifstream is(p);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text)
{
    const fs::path p = scratch() / name;
    std::ofstream(p) << text;
    return p;
}

const std::string kStatic = "[array]\nelements = 64\nsymbols = 16\n"
                            "[target]\ntheta_deg = 0\nrange_m = 2.5\nv_r = 0\nv_theta = 0\n"
                            "[noise]\nsnr_db = 40\niterations = 2\nseed = 4\n"
                            "[methods]\nlist = DFT-PC, MUSIC-PC\n"
                            "[grids]\nangle_points = 16\nrange_points = 8\nrange_min_m = 0.7\nrange_max_m = 3.0\n"
                            "refine_points = 64\n";

}  // namespace

TEST_CASE("help and usage errors")
{
    CHECK(nfm("--help").code == 0);
    const Run none = nfm("frobnicate");
    CHECK(none.code == 2);
    CHECK(nfm("sweep --iters 0").code == 2);
    CHECK(nfm("simulate").code == 2);
    CHECK(nfm("estimate --in /nonexistent.bin").code == 2);
}

TEST_CASE("selftest exits cleanly")
{
    const Run r = nfm("selftest");
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("PASS parseval") != std::string::npos);
}

TEST_CASE("bad configuration exits with 2")
{
    const fs::path bad = write_config("bad.cfg", "[array]\nelements = many\n");
    const Run r = nfm("sweep --config " + bad.string());
    CHECK(r.code == 2);
    CHECK(r.out.find("elements") != std::string::npos);
    const fs::path unknown = write_config("unknown.cfg", "[radar]\npower = 1\n");
    CHECK(nfm("sweep --config " + unknown.string()).code == 2);
}

TEST_CASE("simulate, admap and estimate on a static broadside target")
{
    const fs::path cfg = write_config("static.cfg", kStatic);
    const fs::path snap = scratch() / "snap.bin";
    REQUIRE(nfm("simulate --config " + cfg.string() + " --seed 3 --out " + snap.string()).code == 0);
    REQUIRE(fs::exists(snap));

    const fs::path map = scratch() / "map.csv";
    const Run a = nfm("admap --config " + cfg.string() + " --in " + snap.string() + " --out " + map.string());
    REQUIRE(a.code == 0);
    CHECK(a.out.find("peak at sin(theta)=0 omega=0") != std::string::npos);
    CHECK(fs::file_size(map) > 0);

    const fs::path res = scratch() / "est.csv";
    const Run e = nfm("estimate --config " + cfg.string() + " --in " + snap.string() + " --out " + res.string());
    CHECK(e.code == 0);
    const std::string csv = read_file(res);
    CHECK(csv.find("DFT-PC") != std::string::npos);
    CHECK(csv.find("MUSIC-PC") != std::string::npos);

    // A snapshot of another array is rejected.
    const fs::path other = write_config("other.cfg", "[array]\nelements = 32\nsymbols = 16\n");
    CHECK(nfm("estimate --config " + other.string() + " --in " + snap.string()).code == 2);
}

TEST_CASE("tables build and inspect")
{
    const fs::path cfg = write_config("tables.cfg", kStatic);
    const fs::path table = scratch() / "angle.bin";
    const fs::path csv = scratch() / "angle.csv";
    REQUIRE(nfm("tables build --config " + cfg.string() + " --out " + table.string() + " --csv " + csv.string())
                .code == 0);
    CHECK(read_file(csv).rfind("theta_rad,range_m,width_sin", 0) == 0);
    const Run r = nfm("tables inspect --in " + table.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("16") != std::string::npos);
    const fs::path junk = write_config("junk.bin", "garbage");
    CHECK(nfm("tables inspect --in " + junk.string()).code != 0);
}

TEST_CASE("sweep echoes its configuration and is reproducible")
{
    const fs::path cfg = write_config("sweep.cfg", kStatic);
    const fs::path a = scratch() / "a.csv";
    const fs::path b = scratch() / "b.csv";
    REQUIRE(nfm("sweep --config " + cfg.string() + " --seed 9 --iters 2 --snr 20,30 --out " + a.string()).code == 0);
    REQUIRE(nfm("sweep --config " + cfg.string() + " --seed 9 --iters 2 --snr 20,30 --out " + b.string()).code == 0);
    const std::string text = read_file(a);
    CHECK(text == read_file(b));
    CHECK(text.rfind("# ", 0) == 0);
    CHECK(text.find("# elements = 64") != std::string::npos);
    CHECK(text.find("# seed = 9") != std::string::npos);
    CHECK(text.find("MUSIC-PC,theta[mse]") != std::string::npos);
    CHECK(text.find("nan") == std::string::npos);

    const Run s = nfm("sweep --config " + cfg.string() + " --iters 1 --snr 30 --methods DFT-PC");
    CHECK(s.code == 0);
    CHECK(s.out.find("DFT-PC,range") != std::string::npos);
    CHECK(nfm("sweep --config " + cfg.string() + " --methods Capon").code == 2);
}

TEST_CASE("shipped configs parse")
{
    const fs::path small = fs::path(NFM_CONFIG_DIR) / "small.cfg";
    const Run r = nfm("sweep --config " + small.string() + " --iters 1 --snr 10 --methods DFT-PC");
    CHECK(r.code == 0);
    CHECK(r.out.find("DFT-PC,theta") != std::string::npos);
}
