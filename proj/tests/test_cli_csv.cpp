#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "aoi/csv.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("aoi_cli_test_" + std::to_string(std::rand()) + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
    std::string cmd = std::string(AOI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct Csv {
    std::string provenance;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Csv read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    Csv out;
    std::string line;
    REQUIRE(std::getline(in, line));
    out.provenance = line;
    REQUIRE(std::getline(in, line));
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) out.header.push_back(cell);
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::stringstream rs(line);
        while (std::getline(rs, cell, ',')) row.push_back(cell);
        if (!row.empty()) out.rows.push_back(row);
    }
    return out;
}

}  // namespace

TEST_CASE("numeric formatting round-trips at 12 significant digits") {
    for (double v : {1.0, 1.0 / 3.0, 6.674598712345, 1e-9, 12345.678901234, 0.0, -2.75}) {
        std::string s = aoi::CsvWriter::num(v);
        double back = std::strtod(s.c_str(), nullptr);
        CHECK(std::abs(back - v) <= 1e-11 * std::max(1.0, std::abs(v)));
    }
}

TEST_CASE("writer emits provenance, header, and parseable rows") {
    TempDir tmp;
    fs::path f = tmp.path / "out.csv";
    {
        aoi::CsvWriter w(f.string(), "test-artifact | seed=1", {"a", "b"});
        w.numeric_row({1.5, 2.0 / 3.0});
    }
    Csv csv = read_csv(f);
    CHECK(csv.provenance == "# test-artifact | seed=1");
    CHECK(csv.header == std::vector<std::string>{"a", "b"});
    REQUIRE(csv.rows.size() == 1);
    CHECK(std::strtod(csv.rows[0][1].c_str(), nullptr) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-11));
}

TEST_CASE("analyze on the stateless toy reports an overall mean of 3") {
    TempDir tmp;
    int rc = run_cli("analyze --scenario toy-a --p 0.5 --out-dir " + tmp.path.string());
    REQUIRE(rc == 0);
    Csv csv = read_csv(tmp.path / "analyze.csv");
    CHECK(csv.provenance.rfind("# aoi-toolkit", 0) == 0);
    CHECK(csv.provenance.find("cmd=analyze") != std::string::npos);
    CHECK(csv.provenance.find("seed=") != std::string::npos);
    REQUIRE(!csv.rows.empty());
    auto& last = csv.rows.back();
    CHECK(last[0] == "overall");
    CHECK(std::strtod(last[1].c_str(), nullptr) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("config errors exit with code 2") {
    TempDir tmp;
    // Empty policy list.
    CHECK(run_cli("simulate --scenario toy-a --slots 100 --out-dir " + tmp.path.string()) == 2);
    // Unreadable spec file.
    CHECK(run_cli("analyze --spec-file /nonexistent/spec.json --out-dir " + tmp.path.string()) ==
          2);
    // Unknown policy name.
    CHECK(run_cli("simulate --scenario toy-a --policy bogus --slots 100 --out-dir " +
                  tmp.path.string()) == 2);
    // Unknown subcommand.
    CHECK(run_cli("frobnicate") == 2);
}

TEST_CASE("invalid model files are rejected with named fields") {
    TempDir tmp;
    fs::path bad = tmp.path / "bad.json";
    {
        std::ofstream out(bad);
        out << R"({"sensors": {"count": 1, "channel": [1.0]},
                   "sources": [{"transition": [[0.5, 0.4]], "obs_prob": [[0.5, 0.5]]}]})";
    }
    CHECK(run_cli("analyze --spec-file " + bad.string() + " --out-dir " + tmp.path.string()) ==
          2);
}

TEST_CASE("motivating trace reproduces the published round total") {
    TempDir tmp;
    int rc = run_cli(
        "simulate --scenario motivating --policy myopic --slots 6 --no-burn-in "
        "--deterministic-init --runs 1 --trace trace.csv --out-dir " +
        tmp.path.string());
    REQUIRE(rc == 0);
    Csv csv = read_csv(tmp.path / "trace.csv");
    REQUIRE(csv.rows.size() == 6);
    int total = 0;
    for (const auto& row : csv.rows)
        for (int k = 1; k <= 3; ++k) total += std::atoi(row[k].c_str());
    CHECK(total == 38);
}

TEST_CASE("sweep emits one row per grid point and policy") {
    TempDir tmp;
    int rc = run_cli(
        "sweep --scenario toy-a --param p --values 0.3,0.5,0.7 --policy random "
        "--policy myopic --slots 2000 --burn-in 200 --runs 2 --out-dir " +
        tmp.path.string());
    REQUIRE(rc == 0);
    Csv csv = read_csv(tmp.path / "sweep.csv");
    CHECK(csv.header == std::vector<std::string>{"p", "policy", "mean_aoi", "std_error"});
    CHECK(csv.rows.size() == 6);
}

TEST_CASE("solve emits a convergence trace and a policy dump") {
    TempDir tmp;
    int rc = run_cli("solve --scenario toy-b --p 0.6 --alpha 0.4 --Q 6 --out-dir " +
                     tmp.path.string());
    REQUIRE(rc == 0);
    Csv trace = read_csv(tmp.path / "solve.csv");
    CHECK(trace.header ==
          std::vector<std::string>{"iteration", "delta_lower", "delta_upper", "lambda"});
    REQUIRE(trace.rows.size() >= 2);
    const auto& last = trace.rows.back();
    double lo = std::strtod(last[1].c_str(), nullptr);
    double hi = std::strtod(last[2].c_str(), nullptr);
    CHECK(hi - lo <= 1e-6);

    Csv policy = read_csv(tmp.path / "policy.csv");
    CHECK(policy.rows.size() == 2 * 2 * 6 * 6);
    for (const auto& row : policy.rows) {
        int a = std::atoi(row.back().c_str());
        CHECK(a >= 1);
        CHECK(a <= 2);
    }
}

TEST_CASE("policy-map emits the full action grid") {
    TempDir tmp;
    int rc = run_cli(
        "policy-map --scenario toy-a --p 0.9 --policy myopic --aoi-min 1 --aoi-max 10 "
        "--out-dir " +
        tmp.path.string());
    REQUIRE(rc == 0);
    Csv csv = read_csv(tmp.path / "policy_map.csv");
    CHECK(csv.rows.size() == 100);
}
