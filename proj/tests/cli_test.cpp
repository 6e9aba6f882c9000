#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "scenfuzz/campaign.hpp"
#include "scenfuzz/runlog.hpp"

using namespace scenfuzz;

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(SCENFUZZ_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return {};
  CliResult result;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) {
    result.output.append(buf.data(), n);
  }
  int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

// One temp workspace per test with a small schema and a cheap campaign.
struct Workspace {
  fs::path dir;
  fs::path config;

  explicit Workspace(const std::string& tag) {
    dir = fs::temp_directory_path() / ("cli_test_" + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::ofstream(dir / "schema.json") << R"({
      "map_id": "straight_road",
      "ego_route": [[-50, -1.75], [50, -1.75]],
      "pedestrian_0": {
        "setup": {"type": [0, 3, "int"], "location": {"x": [-10, 10], "y": [-10, 10]},
                  "yaw": [0, 360]},
        "trigger_event": {"trigger_distance": [10, 50], "target_speed": [0, 4],
                          "distance_to_travel": [0, 50]}
      }
    })";
    config = dir / "config.json";
    std::ofstream(config) << R"({
      "schema_path": "schema.json",
      "method": "RANDOM",
      "seed_collection": {"method": "RANDOM", "budget": 10},
      "budget": 20,
      "rng_seed": 5,
      "population_size": 10
    })";
  }
  ~Workspace() { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST(Cli, RunWritesTheRunBundle) {
  Workspace ws("run");
  CliResult r = run_cli("run --config " + ws.config.string() + " --out-dir " + ws.path("out"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("RANDOM: unique violations per repetition ="), std::string::npos)
      << r.output;

  // single repetition: files live at the top of the out dir
  EXPECT_TRUE(fs::exists(ws.path("out/runlog.jsonl")));
  EXPECT_TRUE(fs::exists(ws.path("out/archive.json")));
  EXPECT_TRUE(fs::exists(ws.path("out/stats.json")));
  EXPECT_TRUE(fs::exists(ws.path("out/curves.csv")));

  std::vector<RunLogRecord> log = read_runlog(ws.path("out/runlog.jsonl"));
  EXPECT_EQ(log.size(), 30u);  // 10 seed-collection + 20 main simulations

  RunSummary summary = read_run_summary(ws.path("out/stats.json"));
  EXPECT_EQ(summary.method, "RANDOM");
  ASSERT_EQ(summary.unique_counts.size(), 1u);
}

TEST(Cli, RepetitionsGetTheirOwnDirectories) {
  Workspace ws("reps");
  CliResult r = run_cli("run --config " + ws.config.string() + " --out-dir " + ws.path("out") +
                        " --method GA-UN --repetitions 2");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("GA-UN: unique violations per repetition ="), std::string::npos);

  EXPECT_TRUE(fs::exists(ws.path("out/rep_000/runlog.jsonl")));
  EXPECT_TRUE(fs::exists(ws.path("out/rep_000/archive.json")));
  EXPECT_TRUE(fs::exists(ws.path("out/rep_001/runlog.jsonl")));
  EXPECT_TRUE(fs::exists(ws.path("out/stats.json")));

  RunSummary summary = read_run_summary(ws.path("out/stats.json"));
  EXPECT_EQ(summary.method, "GA-UN");
  EXPECT_EQ(summary.unique_counts.size(), 2u);
}

TEST(Cli, SameSeedSameBytes) {
  Workspace ws("seed");
  std::string base = "run --config " + ws.config.string() + " --out-dir ";
  ASSERT_EQ(run_cli(base + ws.path("a")).exit_code, 0);
  ASSERT_EQ(run_cli(base + ws.path("b")).exit_code, 0);
  EXPECT_EQ(slurp(ws.path("a/runlog.jsonl")), slurp(ws.path("b/runlog.jsonl")));
  EXPECT_EQ(slurp(ws.path("a/archive.json")), slurp(ws.path("b/archive.json")));

  CliResult r = run_cli(base + ws.path("c") + " --seed 6");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(slurp(ws.path("a/runlog.jsonl")), slurp(ws.path("c/runlog.jsonl")));
}

TEST(Cli, ErrorPathsUseDistinctExitCodes) {
  Workspace ws("err");
  EXPECT_EQ(run_cli("run --config " + ws.path("nope.json")).exit_code, 3);

  std::ofstream(ws.path("broken.json")) << "{ not json";
  EXPECT_EQ(run_cli("run --config " + ws.path("broken.json")).exit_code, 2);

  std::ofstream(ws.path("zero.json")) << R"({"schema_path": "schema.json", "budget": 0})";
  EXPECT_EQ(run_cli("run --config " + ws.path("zero.json")).exit_code, 2);

  EXPECT_EQ(run_cli("run --config " + ws.config.string() + " --method NO-SUCH").exit_code, 2);
  EXPECT_NE(run_cli("run --config " + ws.config.string() + " --bogus-flag").exit_code, 0);
  EXPECT_NE(run_cli("").exit_code, 0);  // a subcommand is required
}

TEST(Cli, CompareReplayReportSweepChain) {
  Workspace ws("chain");
  std::string base = "run --config " + ws.config.string() + " --out-dir ";
  ASSERT_EQ(run_cli(base + ws.path("ra")).exit_code, 0);
  ASSERT_EQ(run_cli(base + ws.path("rb") + " --method GA-UN --seed 7").exit_code, 0);

  CliResult cmp = run_cli("compare " + ws.path("ra") + " " + ws.path("rb") + " --out " +
                          ws.path("cmp.json"));
  ASSERT_EQ(cmp.exit_code, 0) << cmp.output;
  EXPECT_NE(cmp.output.find("RANDOM vs GA-UN"), std::string::npos) << cmp.output;
  EXPECT_TRUE(fs::exists(ws.path("cmp.json")));

  CliResult rep = run_cli("replay --config " + ws.config.string() + " --log " +
                          ws.path("ra/runlog.jsonl") + " --index 0 --out " +
                          ws.path("trace.json"));
  ASSERT_EQ(rep.exit_code, 0) << rep.output;
  EXPECT_NE(rep.output.find("record 0:"), std::string::npos);
  EXPECT_TRUE(fs::exists(ws.path("trace.json")));

  CliResult oob = run_cli("replay --config " + ws.config.string() + " --log " +
                          ws.path("ra/runlog.jsonl") + " --index 9999 --out " +
                          ws.path("trace2.json"));
  EXPECT_EQ(oob.exit_code, 3);

  CliResult report = run_cli("report " + ws.path("ra") + " " + ws.path("rb") + " --out " +
                             ws.path("all_curves.csv"));
  ASSERT_EQ(report.exit_code, 0) << report.output;
  std::string csv = slurp(ws.path("all_curves.csv"));
  EXPECT_EQ(csv.rfind("simulation,", 0), 0u) << csv.substr(0, 80);

  CliResult sweep = run_cli("sweep-thresholds --config " + ws.config.string() + " --log " +
                            ws.path("ra/runlog.jsonl") + " --out " + ws.path("sweep.csv"));
  ASSERT_EQ(sweep.exit_code, 0) << sweep.output;
  std::ifstream in(ws.path("sweep.csv"));
  int lines = 0;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) ++lines;
  }
  EXPECT_EQ(lines, 10);  // header + 3x3 grid
}
