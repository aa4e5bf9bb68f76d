#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "tvmpo/config.hpp"
#include "tvmpo/runner.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string output_dir;
  std::string backend;
  std::uint64_t seed = 0;
  int workers = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Path to the JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--output-dir", flags.output_dir, "Override the configured output directory");
  cmd->add_option("--seed", flags.seed, "Override the configured RNG seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--workers", flags.workers, "Override the configured worker count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--backend", flags.backend, "Backend: vmc, exact or meanfield")
      ->check(CLI::IsMember({"vmc", "exact", "meanfield"}));
}

tvmpo::RunConfig load_with_overrides(const CommonFlags& flags) {
  tvmpo::RunConfig cfg = tvmpo::parse_config(flags.config_path);
  if (!flags.output_dir.empty()) cfg.output_dir = flags.output_dir;
  if (flags.seed_set) cfg.seed = flags.seed;
  if (flags.workers > 0) cfg.workers = flags.workers;
  if (!flags.backend.empty()) cfg.backend = tvmpo::backend_from_name(flags.backend);
  return cfg;
}

int report_summary(const tvmpo::RunSummary& summary, const std::string& output_dir) {
  if (!summary.ok) {
    std::fprintf(stderr, "error: %s\n", summary.error.c_str());
    return 1;
  }
  std::printf("done: %ld steps, %ld rows, %.2f s -> %s\n", summary.steps, summary.rows,
              summary.wall_seconds, output_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"t-VMC dynamics of open spin lattices with an MPO ansatz"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* cmd_run = app.add_subcommand("run", "Execute a configured simulation");
  add_common(cmd_run, run_flags);

  CommonFlags resume_flags;
  std::string checkpoint_path;
  CLI::App* cmd_resume = app.add_subcommand("resume", "Continue a run from a checkpoint");
  add_common(cmd_resume, resume_flags);
  cmd_resume->add_option("--checkpoint", checkpoint_path,
                         "Checkpoint .bin file (default: <output_dir>/checkpoint_latest.bin)");

  std::string dir_a, dir_b, report_path;
  double tolerance = 0.02;
  CLI::App* cmd_compare = app.add_subcommand("compare", "Compare two run output directories");
  cmd_compare->add_option("dir_a", dir_a, "First run output directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd_compare->add_option("dir_b", dir_b, "Second run output directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd_compare->add_option("--tolerance", tolerance, "Max absolute deviation allowed per stream");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      const tvmpo::RunConfig cfg = load_with_overrides(run_flags);
      return report_summary(tvmpo::run(cfg), cfg.output_dir);
    }
    if (cmd_resume->parsed()) {
      const tvmpo::RunConfig cfg = load_with_overrides(resume_flags);
      std::string ckpt = checkpoint_path;
      if (ckpt.empty()) ckpt = cfg.output_dir + "/checkpoint_latest.bin";
      return report_summary(tvmpo::resume(cfg, ckpt), cfg.output_dir);
    }
    if (cmd_compare->parsed()) {
      const tvmpo::CompareReport report = tvmpo::compare_runs(dir_a, dir_b, tolerance);
      for (const tvmpo::CompareEntry& e : report.entries) {
        std::printf("%-28s max %.6g  mean %.6g  (%ld points)\n", e.stream.c_str(), e.max_dev,
                    e.mean_dev, e.points);
      }
      std::printf("tolerance %.6g: %s\n", tolerance, report.pass ? "PASS" : "FAIL");
      return report.pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
