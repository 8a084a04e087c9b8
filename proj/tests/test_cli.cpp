// Drives the installed CLI binary end to end: exit codes, output files,
// and byte-identical reruns.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string quoted(const std::string& s) { return "'" + s + "'"; }

int run_cli(const std::string& args) {
    const std::string cmd = std::string(TOLLSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path temp_dir(const char* tag) {
    const fs::path dir = fs::temp_directory_path() / (std::string("tollsim_cli_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_config(const fs::path& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

} // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("run --config /missing.cfg --out /tmp/nowhere") == 2);
    CHECK(run_cli("run") == 2);
}

TEST_CASE("run produces the documented bundle and is deterministic") {
    const fs::path dir = temp_dir("run");
    const fs::path cfg = dir / "lower.cfg";
    write_config(cfg,
                 "scenario = lower_bound\n"
                 "horizon = 120\n"
                 "seeds = 2\n"
                 "policies = online, reactive\n");
    const std::string out1 = (dir / "out1").string();
    const std::string out2 = (dir / "out2").string();
    REQUIRE(run_cli("run --config " + quoted(cfg.string()) + " --out " + quoted(out1)) == 0);
    REQUIRE(run_cli("run --config " + quoted(cfg.string()) + " --out " + quoted(out2)) == 0);

    for (const char* policy : {"online", "reactive"}) {
        for (const char* seed : {"seed_1", "seed_2"}) {
            const fs::path trace = fs::path(out1) / policy / seed / "trace.csv";
            REQUIRE(fs::exists(trace));
            // header plus one row per period
            std::ifstream in(trace);
            std::string line;
            int rows = -1;
            while (std::getline(in, line))
                if (!line.empty()) ++rows;
            CHECK(rows == 120);
        }
    }
    CHECK(fs::exists(fs::path(out1) / "metrics.csv"));
    CHECK(fs::exists(fs::path(out1) / "summary.csv"));
    CHECK(fs::exists(fs::path(out1) / "metadata.txt"));

    // reruns are byte-identical
    CHECK(slurp(fs::path(out1) / "metrics.csv") == slurp(fs::path(out2) / "metrics.csv"));
    CHECK(slurp(fs::path(out1) / "online" / "seed_1" / "trace.csv") ==
          slurp(fs::path(out2) / "online" / "seed_1" / "trace.csv"));

    // trace.csv round-trips through a parser: numeric columns, fixed order
    std::ifstream in(fs::path(out1) / "online" / "seed_1" / "trace.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "period,system_cost,oracle_cost,oracle_ok,travel_time,toll_revenue,"
          "outside_users,toll_sum,toll_max,max_excess");
    std::string first;
    std::getline(in, first);
    CHECK(first.substr(0, 2) == "1,");
}

TEST_CASE("sweep fits slopes over the horizon grid") {
    const fs::path dir = temp_dir("sweep");
    const fs::path cfg = dir / "lower.cfg";
    write_config(cfg,
                 "scenario = lower_bound\n"
                 "seeds = 3\n"
                 "policies = online\n"
                 "toll_log = none\n");
    const std::string out = (dir / "out").string();
    REQUIRE(run_cli("sweep --config " + quoted(cfg.string()) +
                    " --horizons 100,400,1600 --out " + quoted(out)) == 0);
    REQUIRE(fs::exists(fs::path(out) / "slopes.csv"));
    const std::string slopes = slurp(fs::path(out) / "slopes.csv");
    CHECK(slopes.find("online,violation_linf,") != std::string::npos);
    const std::string values = slurp(fs::path(out) / "sweep_values.csv");
    int rows = -1;
    std::istringstream stream(values);
    std::string line;
    while (std::getline(stream, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);

    CHECK(run_cli("sweep --config " + quoted(cfg.string()) + " --horizons 100,400 --out " +
                  quoted(out)) == 2);
}

TEST_CASE("verify --fast runs the invariant suite") {
    // the fast suite exercises every check at reduced scale
    CHECK(run_cli("verify --fast") == 0);
}
