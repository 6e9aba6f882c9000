// Command-line front end: runs fuzzing campaigns against the built-in
// simulator, compares finished runs, replays logged scenarios and sweeps the
// uniqueness thresholds over a recorded violation stream.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scenfuzz/campaign.hpp"
#include "scenfuzz/errors.hpp"
#include "scenfuzz/map.hpp"
#include "scenfuzz/runlog.hpp"

namespace fs = std::filesystem;
using namespace scenfuzz;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct RunFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::string> method;
  std::optional<int> budget;
  std::optional<std::uint64_t> seed;
  std::optional<double> th1;
  std::optional<double> th2;
  std::optional<std::string> accounting;
  std::optional<int> repetitions;
  std::optional<int> threads;
};

CampaignConfig apply_overrides(CampaignConfig config, const RunFlags& flags) {
  if (flags.method) {
    config.method = *flags.method;
    if (!search_variant_from_string(config.method) && !baseline_from_string(config.method)) {
      throw SchemaError("unknown method: " + config.method);
    }
  }
  if (flags.budget) config.budget = *flags.budget;
  if (flags.seed) config.rng_seed = *flags.seed;
  if (flags.th1) config.uniqueness.th1_percent = *flags.th1;
  if (flags.th2) config.uniqueness.th2_percent = *flags.th2;
  if (flags.accounting) {
    auto acc = accounting_from_string(*flags.accounting);
    if (!acc) throw SchemaError("unknown accounting: " + *flags.accounting);
    config.accounting = *acc;
  }
  if (flags.repetitions) config.repetitions = *flags.repetitions;
  if (flags.threads) config.threads = *flags.threads;
  if (config.budget <= 0) throw SchemaError("budget must be positive");
  if (config.repetitions < 1) throw SchemaError("repetitions must be >= 1");
  return config;
}

int cmd_run(const RunFlags& flags) {
  CampaignConfig config = apply_overrides(load_campaign_config(flags.config_path), flags);
  SearchSpaceSchema schema = load_search_space(config.schema_path);

  CampaignResult result = run_campaign(schema, config);

  fs::create_directories(flags.out_dir);
  std::vector<std::pair<std::string, std::vector<int>>> curves;
  for (std::size_t r = 0; r < result.repetitions.size(); ++r) {
    fs::path dir = flags.out_dir;
    if (result.repetitions.size() > 1) {
      char name[16];
      std::snprintf(name, sizeof(name), "rep_%03zu", r);
      dir /= name;
      fs::create_directories(dir);
    }
    const RepetitionResult& rep = result.repetitions[r];
    write_runlog((dir / "runlog.jsonl").string(), rep.log);
    ViolationArchive archive(&schema, config.uniqueness);
    for (const ArchiveEntry& e : rep.archive) archive.insert_if_unique(e);
    write_archive((dir / "archive.json").string(), archive);
    curves.emplace_back("rep_" + std::to_string(r), rep.curve);
  }
  RunSummary summary = summarize(config, result);
  write_run_summary((fs::path(flags.out_dir) / "stats.json").string(), summary);
  write_curves_csv((fs::path(flags.out_dir) / "curves.csv").string(), curves);

  std::cout << summary.method << ": unique violations per repetition =";
  for (int c : summary.unique_counts) std::cout << ' ' << c;
  std::cout << '\n';
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out_path,
                std::uint64_t seed) {
  std::vector<RunSummary> summaries;
  summaries.reserve(dirs.size());
  for (const std::string& dir : dirs) {
    summaries.push_back(read_run_summary((fs::path(dir) / "stats.json").string()));
  }
  ComparisonReport report = compare_summaries(summaries, seed);
  write_comparison(out_path, report);
  for (const PairComparison& p : report.pairs) {
    std::cout << p.method_a << " vs " << p.method_b << ": p=" << p.p_value
              << " A12=" << p.a12.estimate << " CI=[" << p.a12.lo << ", " << p.a12.hi << "]\n";
  }
  return kExitOk;
}

int cmd_replay(const std::string& config_path, const std::string& log_path, int index,
               const std::string& out_path) {
  CampaignConfig config = load_campaign_config(config_path);
  SearchSpaceSchema schema = load_search_space(config.schema_path);
  std::vector<RunLogRecord> log = read_runlog(log_path);
  if (index < 0 || static_cast<std::size_t>(index) >= log.size()) {
    throw IoError(log_path + ": record " + std::to_string(index) + " out of range (log has " +
                  std::to_string(log.size()) + " records)");
  }
  const RunLogRecord& record = log[static_cast<std::size_t>(index)];
  SimulationOutcome outcome = run(schema, record.vector, config.sim);
  write_trace(out_path, outcome);
  std::cout << "record " << index << ": " << to_string(outcome.termination);
  if (outcome.violation) std::cout << " (" << to_string(outcome.violation->type) << ")";
  std::cout << ", " << outcome.steps << " steps, trace written to " << out_path << '\n';
  return kExitOk;
}

// Collects the runlogs under a run directory: either a single top-level
// runlog.jsonl or one per rep_xxx subdirectory.
std::vector<std::pair<std::string, std::string>> find_runlogs(const std::string& dir) {
  std::vector<std::pair<std::string, std::string>> found;
  fs::path top = fs::path(dir) / "runlog.jsonl";
  if (fs::exists(top)) {
    found.emplace_back(fs::path(dir).filename().string(), top.string());
    return found;
  }
  std::vector<fs::path> reps;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "runlog.jsonl")) {
        reps.push_back(entry.path());
      }
    }
  }
  std::sort(reps.begin(), reps.end());
  for (const fs::path& rep : reps) {
    found.emplace_back(fs::path(dir).filename().string() + "/" + rep.filename().string(),
                       (rep / "runlog.jsonl").string());
  }
  if (found.empty()) throw IoError("no runlog.jsonl under " + dir);
  return found;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out_path) {
  std::vector<std::pair<std::string, std::vector<int>>> series;
  for (const std::string& dir : dirs) {
    for (const auto& [label, path] : find_runlogs(dir)) {
      series.emplace_back(label, curve_from_log(read_runlog(path)));
    }
  }
  write_curves_csv(out_path, series);
  std::cout << "wrote " << series.size() << " series to " << out_path << '\n';
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& log_path,
              const std::string& out_path, std::vector<double> th2_grid,
              std::vector<double> th1_grid) {
  CampaignConfig config = load_campaign_config(config_path);
  SearchSpaceSchema schema = load_search_space(config.schema_path);
  std::vector<RunLogRecord> log = read_runlog(log_path);
  if (th2_grid.empty()) th2_grid = {5, 10, 20};
  if (th1_grid.empty()) th1_grid = {25, 50, 75};
  std::vector<SweepCell> cells =
      sweep_thresholds(schema, log, config.violation_mode, th2_grid, th1_grid);
  write_sweep_csv(out_path, cells);
  for (const SweepCell& c : cells) {
    std::cout << "th2=" << c.th2 << " th1=" << c.th1 << " -> " << c.unique_count << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario fuzzing campaigns on the built-in traffic simulator"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "execute one campaign");
  run_cmd->add_option("--config", run_flags.config_path, "campaign config JSON")->required();
  run_cmd->add_option("--out-dir", run_flags.out_dir, "output directory");
  run_cmd->add_option("--method", run_flags.method, "override the configured method");
  run_cmd->add_option("--budget", run_flags.budget, "override the search budget");
  run_cmd->add_option("--seed", run_flags.seed, "override the rng seed");
  run_cmd->add_option("--th1", run_flags.th1, "override th1 (percent of fields)");
  run_cmd->add_option("--th2", run_flags.th2, "override th2 (percent of range)");
  run_cmd->add_option("--accounting", run_flags.accounting,
                      "include_seed_stage | exclude_seed_stage");
  run_cmd->add_option("--repetitions", run_flags.repetitions, "override repetition count");
  run_cmd->add_option("--threads", run_flags.threads, "worker threads");

  std::vector<std::string> compare_dirs;
  std::string compare_out = "comparison.json";
  std::uint64_t compare_seed = 0;
  CLI::App* compare_cmd = app.add_subcommand("compare", "compare finished run directories");
  compare_cmd->add_option("dirs", compare_dirs, "run directories (>= 2)")
      ->required()
      ->expected(2, -1);
  compare_cmd->add_option("--out", compare_out, "report path");
  compare_cmd->add_option("--seed", compare_seed, "bootstrap seed");

  std::string replay_config, replay_log, replay_out = "trace.json";
  int replay_index = 0;
  CLI::App* replay_cmd = app.add_subcommand("replay", "re-simulate one logged scenario");
  replay_cmd->add_option("--config", replay_config, "campaign config JSON")->required();
  replay_cmd->add_option("--log", replay_log, "runlog.jsonl path")->required();
  replay_cmd->add_option("--index", replay_index, "record index within the log")->required();
  replay_cmd->add_option("--out", replay_out, "trace output path");

  std::vector<std::string> report_dirs;
  std::string report_out = "curves.csv";
  CLI::App* report_cmd = app.add_subcommand("report", "aggregate unique-count curves as CSV");
  report_cmd->add_option("dirs", report_dirs, "run directories")->required()->expected(1, -1);
  report_cmd->add_option("--out", report_out, "CSV output path");

  std::string sweep_config, sweep_log, sweep_out = "sweep.csv";
  std::vector<double> sweep_th2, sweep_th1;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep-thresholds", "replay a log through the uniqueness grid");
  sweep_cmd->add_option("--config", sweep_config, "campaign config JSON")->required();
  sweep_cmd->add_option("--log", sweep_log, "runlog.jsonl path")->required();
  sweep_cmd->add_option("--out", sweep_out, "CSV output path");
  sweep_cmd->add_option("--th2", sweep_th2, "th2 grid values");
  sweep_cmd->add_option("--th1", sweep_th1, "th1 grid values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_flags);
    if (compare_cmd->parsed()) return cmd_compare(compare_dirs, compare_out, compare_seed);
    if (replay_cmd->parsed()) {
      return cmd_replay(replay_config, replay_log, replay_index, replay_out);
    }
    if (report_cmd->parsed()) return cmd_report(report_dirs, report_out);
    if (sweep_cmd->parsed()) {
      return cmd_sweep(sweep_config, sweep_log, sweep_out, sweep_th2, sweep_th1);
    }
  } catch (const SchemaError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConstraintUnsatisfiableError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
