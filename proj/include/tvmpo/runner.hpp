#ifndef TVMPO_RUNNER_HPP
#define TVMPO_RUNNER_HPP

#include <string>
#include <vector>

#include "tvmpo/config.hpp"

namespace tvmpo {

struct RunSummary {
  long rows = 0;        // recorded observable rows
  long steps = 0;       // accepted integrator / oracle steps
  double wall_seconds = 0.0;
  bool ok = true;
  std::string error;
};

// Executes the configured backend and writes one CSV per observable stream
// (header: t,value,im_residual), a diagnostics CSV, binary ansatz checkpoints
// and a JSON metadata file into cfg.output_dir. Backend errors are captured
// in the summary and metadata after flushing partial output.
RunSummary run(const RunConfig& cfg);

// Continues a variational run from a binary checkpoint plus its JSON sidecar
// (same path with .json extension). Appends to the CSV streams in
// cfg.output_dir; given identical config and seed the continuation matches
// the uninterrupted run bitwise.
RunSummary resume(const RunConfig& cfg, const std::string& checkpoint_path);

struct CompareEntry {
  std::string stream;
  double max_dev = 0.0;
  double mean_dev = 0.0;
  long points = 0;
};

struct CompareReport {
  std::vector<CompareEntry> entries;
  double tolerance = 0.0;
  bool pass = false;
};

// Compares the common observable streams of two run output directories on
// the coarser of the two time grids (linear interpolation over the
// overlapping range).
CompareReport compare_runs(const std::string& dir_a, const std::string& dir_b, double tolerance);

}  // namespace tvmpo

#endif
