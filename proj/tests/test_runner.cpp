#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvmpo/config.hpp"
#include "tvmpo/errors.hpp"
#include "tvmpo/runner.hpp"

using namespace tvmpo;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tvmpo_runner_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Parsed CSV stream: (t, value) rows.
std::vector<std::pair<double, double>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::pair<double, double>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string t, v;
    std::getline(ss, t, ',');
    std::getline(ss, v, ',');
    rows.emplace_back(std::stod(t), std::stod(v));
  }
  return rows;
}

RunConfig tiny_vmc_config(const fs::path& dir) {
  json j = json::parse(R"({
    "model": {"lattice": {"kind": "ring", "n": 2}, "couplings": [{"J": 0.5}],
              "h": 1.0, "gamma": 1.0},
    "ansatz": {"chi": 2, "init_bloch": [0.0, 0.0, 1.0]},
    "sampler": {"n_samples": 100, "sweeps_between": 2, "burn_in": 2},
    "integrator": {"scheme": "euler", "tau": 0.05},
    "t_end": 0.2,
    "observables": [{"kind": "magnetization", "axis": "z"}],
    "seed": 7
  })");
  RunConfig cfg = parse_config_json(j);
  cfg.output_dir = dir.string();
  return cfg;
}

}  // namespace

TEST_CASE("mean-field backend holds the polarized fixed point") {
  const fs::path dir = scratch_dir("meanfield");
  json j = json::parse(R"({
    "model": {"lattice": {"kind": "ring", "n": 8},
              "couplings": [{"J": 0.5, "alpha": 1.0}],
              "h": 0.5, "gamma": 1.0, "jump": "z_minus_y", "kac": true,
              "sign": "main_text_minus"},
    "ansatz": {"init_bloch": [1.0, 0.0, 0.0]},
    "t_end": 0.5,
    "observables": [{"kind": "magnetization", "axis": "x"},
                    {"kind": "magnetization", "axis": "y"},
                    {"kind": "magnetization", "axis": "z"}],
    "cadence": 10,
    "backend": "meanfield",
    "oracle_dt": 0.01
  })");
  RunConfig cfg = parse_config_json(j);
  cfg.output_dir = dir.string();

  const RunSummary summary = run(cfg);
  CHECK(summary.ok);
  CHECK(summary.steps == 50);
  CHECK(summary.rows == 6);  // steps 0, 10, ..., 50

  const auto mx = read_csv(dir / "magnetization_x.csv");
  const auto my = read_csv(dir / "magnetization_y.csv");
  const auto mz = read_csv(dir / "magnetization_z.csv");
  REQUIRE(mx.size() == 6);
  for (size_t k = 0; k < mx.size(); ++k) {
    CHECK(mx[k].second == 1.0);
    CHECK(my[k].second == 0.0);
    CHECK(mz[k].second == 0.0);
  }

  const json meta = json::parse(slurp(dir / "metadata.json"));
  CHECK(meta.at("status") == "ok");
  CHECK(meta.at("backend") == "meanfield");
  CHECK(meta.contains("config_hash"));
  CHECK(meta.at("iterations") == 50);
}

TEST_CASE("exact backend reproduces single-site decay") {
  const fs::path dir = scratch_dir("exact_decay");
  json j = json::parse(R"({
    "model": {"lattice": {"kind": "ring", "n": 1}, "couplings": [{"J": 0.0}],
              "h": 0.0, "gamma": 1.0},
    "ansatz": {"init_bloch": [0.0, 0.0, 1.0]},
    "t_end": 1.0,
    "observables": [{"kind": "magnetization", "axis": "z"}],
    "cadence": 100,
    "backend": "exact",
    "oracle_dt": 0.001
  })");
  RunConfig cfg = parse_config_json(j);
  cfg.output_dir = dir.string();

  const RunSummary summary = run(cfg);
  CHECK(summary.ok);
  const auto mz = read_csv(dir / "magnetization_z.csv");
  REQUIRE(mz.size() == 11);
  for (const auto& [t, v] : mz) {
    CHECK(std::abs(v - (2.0 * std::exp(-t) - 1.0)) < 1e-8);
  }
}

TEST_CASE("variational runs are bitwise deterministic") {
  const fs::path dir_a = scratch_dir("det_a");
  const fs::path dir_b = scratch_dir("det_b");
  RunConfig cfg_a = tiny_vmc_config(dir_a);
  RunConfig cfg_b = tiny_vmc_config(dir_b);
  cfg_a.workers = 2;
  cfg_b.workers = 2;

  CHECK(run(cfg_a).ok);
  CHECK(run(cfg_b).ok);
  CHECK(slurp(dir_a / "magnetization_z.csv") == slurp(dir_b / "magnetization_z.csv"));
  CHECK(slurp(dir_a / "diagnostics.csv") == slurp(dir_b / "diagnostics.csv"));
  CHECK(slurp(dir_a / "checkpoint_latest.bin") == slurp(dir_b / "checkpoint_latest.bin"));
}

TEST_CASE("resume continues a run bitwise") {
  const fs::path dir_full = scratch_dir("resume_full");
  RunConfig cfg = tiny_vmc_config(dir_full);
  cfg.t_end = 0.4;  // 8 Euler steps
  cfg.checkpoint_every = 2;
  CHECK(run(cfg).ok);

  // Rebuild the state of the run as of step 4 in a second directory: the
  // stream prefixes plus the numbered checkpoint.
  const fs::path dir_part = scratch_dir("resume_part");
  for (const char* name : {"magnetization_z.csv", "diagnostics.csv"}) {
    std::istringstream in(slurp(dir_full / name));
    std::ofstream out(dir_part / name, std::ios::binary);
    std::string line;
    for (int k = 0; k < 6 && std::getline(in, line); ++k) {  // header + 5 rows
      out << line << '\n';
    }
  }

  RunConfig cfg_resume = cfg;
  cfg_resume.output_dir = dir_part.string();
  const RunSummary summary =
      resume(cfg_resume, (dir_full / "checkpoint_step000004.bin").string());
  CHECK(summary.ok);
  CHECK(summary.steps == 4);  // the remaining half

  CHECK(slurp(dir_part / "magnetization_z.csv") == slurp(dir_full / "magnetization_z.csv"));
  CHECK(slurp(dir_part / "diagnostics.csv") == slurp(dir_full / "diagnostics.csv"));
  CHECK(slurp(dir_part / "checkpoint_latest.bin") == slurp(dir_full / "checkpoint_latest.bin"));

  const json meta = json::parse(slurp(dir_part / "metadata.json"));
  CHECK(meta.at("resumed_from") == "checkpoint");
}

TEST_CASE("resume validates the checkpoint shape") {
  const fs::path dir = scratch_dir("resume_shape");
  RunConfig cfg = tiny_vmc_config(dir);
  CHECK(run(cfg).ok);

  RunConfig mismatched = cfg;
  mismatched.ansatz.chi = 4;
  CHECK_THROWS_AS(resume(mismatched, (dir / "checkpoint_latest.bin").string()),
                  InvalidInputError);

  RunConfig exact_cfg = cfg;
  exact_cfg.backend = Backend::exact;
  CHECK_THROWS_AS(resume(exact_cfg, (dir / "checkpoint_latest.bin").string()),
                  InvalidInputError);
}

TEST_CASE("compare_runs on identical output reports zero deviation") {
  const fs::path dir = scratch_dir("cmp_self");
  RunConfig cfg = tiny_vmc_config(dir);
  CHECK(run(cfg).ok);

  const CompareReport report = compare_runs(dir.string(), dir.string(), 0.0);
  CHECK(report.pass);
  REQUIRE(report.entries.size() == 1);
  CHECK(report.entries[0].stream == "magnetization_z");
  CHECK(report.entries[0].max_dev == 0.0);
  CHECK(report.entries[0].mean_dev == 0.0);
}

TEST_CASE("compare_runs interpolates and applies the tolerance") {
  const fs::path a = scratch_dir("cmp_a");
  const fs::path b = scratch_dir("cmp_b");
  {
    std::ofstream fa(a / "magnetization_z.csv");
    fa << "t,value,im_residual\n0,0,0\n0.5,0.5,0\n1,1,0\n";
    std::ofstream fb(b / "magnetization_z.csv");
    fb << "t,value,im_residual\n0,0.05,0\n1,1.05,0\n";  // coarser, offset 0.05
  }
  const CompareReport report = compare_runs(a.string(), b.string(), 0.1);
  CHECK(report.pass);
  REQUIRE(report.entries.size() == 1);
  CHECK(report.entries[0].max_dev == doctest::Approx(0.05));
  CHECK(report.entries[0].points == 2);  // coarser grid wins

  const CompareReport tight = compare_runs(a.string(), b.string(), 0.01);
  CHECK(!tight.pass);
}

TEST_CASE("compare_runs error cases") {
  const fs::path a = scratch_dir("cmp_err_a");
  const fs::path b = scratch_dir("cmp_err_b");
  {
    std::ofstream fa(a / "magnetization_z.csv");
    fa << "t,value,im_residual\n0,0,0\n1,1,0\n";
    std::ofstream fb(b / "other_stream.csv");
    fb << "t,value,im_residual\n0,0,0\n1,1,0\n";
  }
  CHECK_THROWS_AS(compare_runs(a.string(), b.string(), 0.1), InvalidInputError);

  {
    std::ofstream fb(b / "magnetization_z.csv");
    fb << "t,value,im_residual\n2,0,0\n3,1,0\n";  // disjoint times
  }
  CHECK_THROWS_AS(compare_runs(a.string(), b.string(), 0.1), InvalidInputError);

  {
    std::ofstream fb(b / "magnetization_z.csv", std::ios::trunc);
    fb << "t,value,im_residual\n";  // header only
  }
  CHECK_THROWS_AS(compare_runs(a.string(), b.string(), 0.1), InvalidInputError);
}
