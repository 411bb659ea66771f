#include "doctest.h"

#include "json.hpp"
#include "mdsenbd/cli/commands.hpp"
#include "mdsenbd/cli/config.hpp"
#include "mdsenbd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

using namespace mdsenbd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code{0};
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    Run r;
    r.code = cli::run_command(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "mdsenbd_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_text(const fs::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const char* kSingleLine =
    "[model]\n"
    "family = SE_NBD\n"
    "baseline_mean = 1\n"
    "dispersion_shape = 2\n"
    "decay = 0.5\n"
    "interaction_scale = 4\n";

const char* kTwoLine =
    "[model]\n"
    "family = MD_SE_NBD\n"
    "baseline_mean = 1, 1\n"
    "dispersion_shape = 0.5, 0.5\n"
    "decay = 0.5, 0.5\n"
    "interaction = 0.3, 0.1; 0.2, 0.3\n"
    "sector_names = alpha, beta\n";

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("exit codes per category") {
        CHECK(cli::exit_code(ErrorCategory::usage) == 2);
        CHECK(cli::exit_code(ErrorCategory::config) == 3);
        CHECK(cli::exit_code(ErrorCategory::io) == 4);
        CHECK(cli::exit_code(ErrorCategory::schema) == 5);
        CHECK(cli::exit_code(ErrorCategory::domain) == 6);
        CHECK(cli::exit_code(ErrorCategory::nonstationary) == 7);
        CHECK(cli::exit_code(ErrorCategory::convergence) == 8);
    }

    TEST_CASE("unknown subcommand is a usage error") {
        const auto r = run({"explode"});
        CHECK(r.code == 2);
        CHECK(r.err.rfind("error: usage: ", 0) == 0);
        CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
    }

    TEST_CASE("impact on a one-line model reports total 1.0") {
        const auto dir = scratch_dir("impact");
        const auto cfg = write_text(dir / "model.ini", kSingleLine);
        const auto r = run({"impact", "-c", cfg.string(), "-o", (dir / "out").string()});
        REQUIRE(r.code == 0);
        const auto doc = json::parse(r.out);
        CHECK(doc["command"] == "impact");
        CHECK(doc["version"] == "0.1.0");
        const double total = doc["result"]["per_source"][0]["total"].get<double>();
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fs::exists(dir / "out" / "result.json"));
        CHECK(fs::exists(dir / "out" / "impact.csv"));
        CHECK(fs::exists(dir / "out" / "ranking.csv"));
        CHECK(json::parse(slurp(dir / "out" / "result.json")) == doc);
    }

    TEST_CASE("simulate with rho 1.2 fails as nonstationary") {
        const auto dir = scratch_dir("nonstationary");
        const auto cfg = write_text(dir / "model.ini",
                                    "[model]\nfamily = HAWKES\nbaseline_mean = 1\ndecay = 0.5\ninteraction = 1.2\n");
        const auto r = run({"simulate", "-c", cfg.string(), "--seed", "3"});
        CHECK(r.code == 7);
        CHECK(r.err.rfind("error: nonstationary: ", 0) == 0);
        const auto ok = run({"simulate", "-c", cfg.string(), "--seed", "3", "--allow-nonstationary",
                             "--set", "simulate.horizon=20"});
        CHECK(ok.code == 0);
    }

    TEST_CASE("stochastic commands need a seed") {
        const auto dir = scratch_dir("seedless");
        const auto cfg = write_text(dir / "model.ini", kSingleLine);
        const auto r = run({"simulate", "-c", cfg.string()});
        CHECK(r.code == 3);
        CHECK(r.err.rfind("error: config: ", 0) == 0);
    }

    TEST_CASE("config errors") {
        const auto dir = scratch_dir("config");
        const auto cfg = write_text(dir / "model.ini", std::string(kSingleLine) + "mystery = 4\n");
        CHECK(run({"impact", "-c", cfg.string()}).code == 3);
        const auto missing = run({"impact", "-c", (dir / "nope.ini").string()});
        CHECK(missing.code != 0);
        const auto bad = run({"impact", "-c", write_text(dir / "m2.ini", kSingleLine).string(), "--set", "nonsense"});
        CHECK(bad.code == 3);
    }

    TEST_CASE("missing input file is an io error and bad cells are schema errors") {
        const auto dir = scratch_dir("io");
        CHECK(run({"fit", "-i", (dir / "missing.csv").string(), "--seed", "1"}).code == 4);
        const auto csv = write_text(dir / "bad.csv", "a\n1\n-1\n");
        const auto r = run({"fit", "-i", csv.string(), "--seed", "1"});
        CHECK(r.code == 5);
        CHECK(r.err.find("row 3") != std::string::npos);
    }

    TEST_CASE("network export and simulate result fields") {
        const auto dir = scratch_dir("network");
        const auto cfg = write_text(dir / "model.ini", kTwoLine);
        const auto net = run({"network", "-c", cfg.string(), "-o", dir.string()});
        REQUIRE(net.code == 0);
        CHECK(slurp(dir / "network.csv") ==
              "source,target,weight\nalpha,alpha,0.3\nalpha,beta,0.2\nbeta,alpha,0.1\nbeta,beta,0.3\n");
        const auto sim = run({"simulate", "-c", cfg.string(), "--seed", "9", "--set", "simulate.horizon=50"});
        REQUIRE(sim.code == 0);
        const auto doc = json::parse(sim.out);
        CHECK(doc["result"]["spectral_radius"].get<double>() == doctest::Approx(0.3 + std::sqrt(0.02)));
        CHECK(doc["result"]["steady"] == true);
    }

    TEST_CASE("branching command") {
        const auto r = run({"branching", "--set", "branching.mean=2"});
        REQUIRE(r.code == 0);
        const auto doc = json::parse(r.out);
        CHECK(std::abs(doc["result"]["extinction_probability"].get<double>() - 0.203188) < 1e-6);
    }

    TEST_CASE("full runs are byte-identical across thread counts") {
        const auto dir = scratch_dir("determinism");
        const auto cfg = write_text(dir / "model.ini", kTwoLine);
        REQUIRE(run({"synth", "-c", cfg.string(), "--seed", "5", "--set", "synth.horizon=400", "-o", dir.string()}).code == 0);
        const auto csv = (dir / "synthetic.csv").string();
        const std::vector<std::string> base{"fit", "-i", csv, "--seed", "11", "--set", "fit.multistart=3"};
        auto one = base;
        one.insert(one.end(), {"--threads", "1", "-o", (dir / "t1").string()});
        auto three = base;
        three.insert(three.end(), {"--threads", "3", "-o", (dir / "t3").string()});
        const auto a = run(one);
        const auto b = run(three);
        REQUIRE(a.code == 0);
        REQUIRE(b.code == 0);
        CHECK(a.out == b.out);
        CHECK(slurp(dir / "t1" / "result.json") == slurp(dir / "t3" / "result.json"));
        CHECK(slurp(dir / "t1" / "parameters.csv") == slurp(dir / "t3" / "parameters.csv"));
        const auto sim1 = run({"simulate", "-c", cfg.string(), "--seed", "5"});
        const auto sim2 = run({"simulate", "-c", cfg.string(), "--seed", "5"});
        CHECK(sim1.out == sim2.out);
    }

    TEST_CASE("aic-table golden run") {
        const auto dir = scratch_dir("aic");
        const auto cfg = write_text(dir / "model.ini", kTwoLine);
        REQUIRE(run({"synth", "-c", cfg.string(), "--seed", "21", "--set", "synth.horizon=600", "-o", dir.string()}).code == 0);
        const auto r = run({"aic-table", "-i", (dir / "synthetic.csv").string(), "--seed", "4", "--set",
                            "aic-table.multistart=4", "-o", dir.string()});
        REQUIRE(r.code == 0);
        const auto split_rows = [](const std::string& text) {
            std::vector<std::vector<std::string>> rows;
            std::istringstream lines(text);
            std::string line;
            while (std::getline(lines, line)) {
                std::vector<std::string> cells;
                std::stringstream ss(line);
                std::string c;
                while (std::getline(ss, c, ',')) {
                    cells.push_back(c);
                }
                rows.push_back(cells);
            }
            return rows;
        };
        const auto rows = split_rows(slurp(dir / "aic_table.csv"));
        const auto golden = split_rows(slurp(fs::path(MDSENBD_TEST_DATA_DIR) / "aic_table_golden.csv"));
        REQUIRE(rows.size() == 6);
        REQUIRE(golden.size() == rows.size());
        CHECK(rows[0] == std::vector<std::string>{"rank", "family", "edge_selection", "aic", "log_likelihood",
                                                  "n_params", "status"});
        std::vector<double> aics;
        for (std::size_t k = 1; k < rows.size(); ++k) {
            REQUIRE(rows[k].size() == 7);
            CHECK(rows[k][6] == "ok");
            aics.push_back(std::stod(rows[k][3]));
            // text columns exactly, numeric columns to a relative tolerance
            for (std::size_t c : {0u, 1u, 2u, 5u, 6u}) {
                CHECK(rows[k][c] == golden[k][c]);
            }
            for (std::size_t c : {3u, 4u}) {
                CHECK(std::stod(rows[k][c]) == doctest::Approx(std::stod(golden[k][c])).epsilon(1e-9));
            }
        }
        CHECK(aics.size() == 5);
        CHECK(std::is_sorted(aics.begin(), aics.end()));
    }

    TEST_CASE("format_number") {
        CHECK(cli::format_number(0.1) == "0.1");
        CHECK(cli::format_number(1.0 / 3.0) == "0.333333333333");
        CHECK(cli::format_number(std::numeric_limits<double>::infinity()) == "inf");
    }
}
