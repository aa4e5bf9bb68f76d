#include "tvmpo/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "tvmpo/errors.hpp"
#include "tvmpo/exact.hpp"
#include "tvmpo/observables.hpp"

namespace tvmpo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Shortest-round-trip formatting keeps the CSV output bitwise deterministic.
std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

class StreamWriter {
 public:
  StreamWriter(const fs::path& path, bool append) {
    const bool fresh = !append || !fs::exists(path) || fs::file_size(path) == 0;
    out_.open(path, append ? std::ios::app : std::ios::trunc);
    if (!out_) throw InvalidInputError("run: cannot open output file " + path.string());
    if (fresh) out_ << "t,value,im_residual\n";
  }

  void row(double t, double value, double im_residual) {
    out_ << format_double(t) << ',' << format_double(value) << ',' << format_double(im_residual)
         << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

class DiagnosticsWriter {
 public:
  DiagnosticsWriter(const fs::path& path, bool append) {
    const bool fresh = !append || !fs::exists(path) || fs::file_size(path) == 0;
    out_.open(path, append ? std::ios::app : std::ios::trunc);
    if (!out_) throw InvalidInputError("run: cannot open " + path.string());
    if (fresh) out_ << "t,tau,err,l2_per_site,metric_min_eig,acceptance,step_index\n";
  }

  void row(const StepInfo& info, int n_sites) {
    out_ << format_double(info.t) << ',' << format_double(info.tau) << ','
         << format_double(info.err) << ',' << format_double(info.l2 / n_sites) << ','
         << format_double(info.metric_min_eig) << ',' << format_double(info.acceptance) << ','
         << info.step_index << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

ObservableValue eval_mpo_observable(const ObservableRequest& req, const MpoAnsatz& ansatz,
                                    double l2) {
  switch (req.kind) {
    case ObservableRequest::Kind::magnetization:
      return magnetization(ansatz, req.axis);
    case ObservableRequest::Kind::correlator:
      return correlator(ansatz, req.axis, req.distance, req.connected);
    case ObservableRequest::Kind::structure_factor:
      return structure_factor(ansatz, 2.0 * M_PI * req.q_index / ansatz.n_sites());
    case ObservableRequest::Kind::renyi2:
      return {renyi2(ansatz), 0.0};
    case ObservableRequest::Kind::purity:
      return {purity(ansatz), 0.0};
    case ObservableRequest::Kind::min_eigenvalue:
      return {min_eigenvalue(ansatz), 0.0};
    case ObservableRequest::Kind::rho_dot_cost:
      return {rho_dot_cost(l2, ansatz.n_sites()), 0.0};
  }
  throw InvalidInputError("run: unhandled observable kind");
}

Matrix dense_pair_matrix(const DenseState& state, char axis, Complex tr) {
  const int n = state.n_sites;
  const Matrix op = pauli_by_axis(axis);
  Matrix corr(n, n);
  for (int a = 1; a <= n; ++a) {
    corr(a - 1, a - 1) = dense_expectation(state, {{a, op}, {a, op}}) / tr;
    for (int b = a + 1; b <= n; ++b) {
      const Complex v = dense_expectation(state, {{a, op}, {b, op}}) / tr;
      corr(a - 1, b - 1) = v;
      corr(b - 1, a - 1) = v;
    }
  }
  return corr;
}

ObservableValue eval_dense_observable(const ObservableRequest& req, const DenseState& state) {
  const int n = state.n_sites;
  const Complex tr = dense_trace(state);
  if (std::abs(tr) < kAmplitudeFloor) {
    throw DegenerateTraceError("run: dense state trace vanished");
  }
  auto as_real = [](Complex v) { return ObservableValue{v.real(), std::abs(v.imag())}; };
  switch (req.kind) {
    case ObservableRequest::Kind::magnetization: {
      const Matrix op = pauli_by_axis(req.axis);
      Complex sum = 0.0;
      for (int j = 1; j <= n; ++j) sum += dense_expectation(state, {{j, op}});
      return as_real(sum / (tr * static_cast<double>(n)));
    }
    case ObservableRequest::Kind::correlator: {
      const Matrix corr = dense_pair_matrix(state, req.axis, tr);
      Complex sum = 0.0;
      if (req.connected) {
        const Matrix op = pauli_by_axis(req.axis);
        Vector mags(n);
        for (int j = 1; j <= n; ++j) mags(j - 1) = dense_expectation(state, {{j, op}}) / tr;
        for (int a = 0; a < n; ++a) {
          const int b = (a + req.distance) % n;
          sum += corr(a, b) - mags(a) * mags(b);
        }
      } else {
        for (int a = 0; a < n; ++a) sum += corr(a, (a + req.distance) % n);
      }
      return as_real(sum / static_cast<double>(n));
    }
    case ObservableRequest::Kind::structure_factor: {
      const double q = 2.0 * M_PI * req.q_index / n;
      const Matrix corr = dense_pair_matrix(state, 'z', tr);
      Complex sum = 0.0;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) sum += std::exp(Complex(0.0, q * (a - b))) * corr(a, b);
      }
      return as_real(sum / static_cast<double>(n) / static_cast<double>(n));
    }
    case ObservableRequest::Kind::purity: {
      const Matrix rho = dense_to_matrix(state) / tr;
      return {(rho * rho).trace().real(), 0.0};
    }
    case ObservableRequest::Kind::renyi2: {
      const Matrix rho = dense_to_matrix(state) / tr;
      const double p = (rho * rho).trace().real();
      if (p <= 0.0) throw NumericalError("run: dense purity non-positive");
      return {-std::log(p), 0.0};
    }
    case ObservableRequest::Kind::min_eigenvalue: {
      const Matrix rho = dense_to_matrix(state) / tr;
      Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (rho + rho.adjoint())));
      return {es.eigenvalues().minCoeff(), 0.0};
    }
    case ObservableRequest::Kind::rho_dot_cost:
      throw InvalidInputError("run: rho_dot_cost unavailable on the exact backend");
  }
  throw InvalidInputError("run: unhandled observable kind");
}

// Total coupling sum_{j != i} J~_ij entering the mean-field equations.
double meanfield_total_coupling(const ModelParams& m) {
  double jsum = 0.0;
  for (const CouplingParams& c : m.couplings) {
    const double k = kac_factor(c.alpha, m.lattice);
    jsum += m.kac ? c.J[2] : c.J[2] * k;
  }
  return jsum;
}

void write_checkpoint_pair(const MpoAnsatz& ansatz, const fs::path& stem, double t, double tau,
                           std::uint64_t eval_counter, long step_index) {
  save_checkpoint(ansatz, stem.string() + ".bin");
  json side;
  side["t"] = t;
  side["tau"] = tau;
  side["eval_counter"] = eval_counter;
  side["step_index"] = step_index;
  std::ofstream out(stem.string() + ".json");
  out << side.dump(2) << '\n';
}

struct CheckpointSidecar {
  double t = 0.0;
  double tau = 0.0;
  std::uint64_t eval_counter = 0;
  long step_index = 0;
};

CheckpointSidecar read_sidecar(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("resume: cannot open sidecar " + path.string());
  json j = json::parse(in);
  CheckpointSidecar s;
  s.t = j.at("t").get<double>();
  s.tau = j.at("tau").get<double>();
  s.eval_counter = j.at("eval_counter").get<std::uint64_t>();
  s.step_index = j.at("step_index").get<long>();
  return s;
}

void write_metadata(const RunConfig& cfg, const RunSummary& summary,
                    const std::string& resumed_from = {}) {
  const json resolved = resolved_config_json(cfg);
  json meta;
  meta["config"] = resolved;
  std::ostringstream h;
  h << std::hex << fnv1a(resolved.dump());
  meta["config_hash"] = h.str();
  meta["backend"] = backend_name(cfg.backend);
  meta["seed"] = cfg.seed;
  meta["workers"] = cfg.workers;
  meta["versions"] = {{"artifact", kVersion},
                      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION)}};
  meta["iterations"] = summary.steps;
  meta["rows"] = summary.rows;
  meta["wall_seconds"] = summary.wall_seconds;
  meta["wall_seconds_per_iteration"] =
      summary.steps > 0 ? summary.wall_seconds / summary.steps : 0.0;
  meta["status"] = summary.ok ? "ok" : "error";
  if (!summary.ok) meta["error"] = summary.error;
  if (!resumed_from.empty()) meta["resumed_from"] = resumed_from;
  std::ofstream out(fs::path(cfg.output_dir) / "metadata.json");
  out << meta.dump(2) << '\n';
}

struct VmcRestore {
  bool active = false;
  MpoAnsatz ansatz{1, 1, 2, 1};
  CheckpointSidecar state;
};

RunSummary run_vmc(const RunConfig& cfg, const VmcRestore& restore) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  const bool append = restore.active;

  LindbladianSpec spec = build_model(cfg.model);
  MpoAnsatz ansatz =
      restore.active
          ? restore.ansatz
          : MpoAnsatz::product_state(cfg.model.lattice.n_sites(), effective_period(cfg),
                                     cfg.ansatz.chi, bloch_density(cfg.ansatz.init_bloch));

  EngineConfig ecfg;
  ecfg.sampler = cfg.sampler;
  ecfg.regularization = cfg.regularization;
  ecfg.integrator = cfg.integrator;
  ecfg.workers = cfg.workers;
  ecfg.seed = cfg.seed;
  TdvpEngine engine(std::move(spec), ecfg);
  double t_start = 0.0;
  if (restore.active) {
    engine.set_eval_counter(restore.state.eval_counter);
    engine.set_current_tau(restore.state.tau);
    engine.set_step_index(restore.state.step_index);
    t_start = restore.state.t;
  }

  std::vector<std::unique_ptr<StreamWriter>> streams;
  for (const ObservableRequest& req : cfg.observables) {
    streams.push_back(std::make_unique<StreamWriter>(dir / (req.stream_name() + ".csv"), append));
  }
  DiagnosticsWriter diag(dir / "diagnostics.csv", append);

  RunSummary summary;
  const auto t0 = std::chrono::steady_clock::now();
  const int n_sites = cfg.model.lattice.n_sites();

  auto observer = [&](const StepInfo& info, const MpoAnsatz& a) {
    if (info.tau > 0.0) {
      ++summary.steps;
      diag.row(info, n_sites);
    } else if (!append) {
      diag.row(info, n_sites);
    }
    if (info.step_index % cfg.cadence == 0) {
      for (size_t k = 0; k < cfg.observables.size(); ++k) {
        const ObservableValue v = eval_mpo_observable(cfg.observables[k], a, info.l2);
        streams[k]->row(info.t, v.value, v.im_residual);
      }
      ++summary.rows;
    }
    if (cfg.checkpoint_every > 0 && info.tau > 0.0 &&
        info.step_index % cfg.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "checkpoint_step%06ld", info.step_index);
      write_checkpoint_pair(a, dir / name, info.t, engine.current_tau(), engine.eval_counter(),
                            info.step_index);
    }
    write_checkpoint_pair(a, dir / "checkpoint_latest", info.t, engine.current_tau(),
                          engine.eval_counter(), info.step_index);
  };

  try {
    engine.run_to_time(ansatz, t_start, cfg.t_end, observer, !restore.active);
  } catch (const std::exception& e) {
    summary.ok = false;
    summary.error = e.what();
  }
  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_metadata(cfg, summary, restore.active ? "checkpoint" : std::string());
  return summary;
}

RunSummary run_exact(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  LindbladianSpec spec = build_model(cfg.model);
  DenseState state = dense_product_state(cfg.model.lattice.n_sites(),
                                         bloch_density(cfg.ansatz.init_bloch));

  std::vector<std::unique_ptr<StreamWriter>> streams;
  for (const ObservableRequest& req : cfg.observables) {
    streams.push_back(std::make_unique<StreamWriter>(dir / (req.stream_name() + ".csv"), false));
  }

  RunSummary summary;
  const auto t0 = std::chrono::steady_clock::now();
  long step = 0;
  try {
    rk4_evolve(spec, state, cfg.t_end, cfg.oracle_dt, [&](double t, const DenseState& s) {
      if (step % cfg.cadence == 0) {
        for (size_t k = 0; k < cfg.observables.size(); ++k) {
          const ObservableValue v = eval_dense_observable(cfg.observables[k], s);
          streams[k]->row(t, v.value, v.im_residual);
        }
        ++summary.rows;
      }
      ++step;
    });
    summary.steps = step > 0 ? step - 1 : 0;
  } catch (const std::exception& e) {
    summary.ok = false;
    summary.error = e.what();
  }
  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_metadata(cfg, summary);
  return summary;
}

RunSummary run_meanfield(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  const double jsum = meanfield_total_coupling(cfg.model);
  MeanFieldState m{cfg.ansatz.init_bloch[0], cfg.ansatz.init_bloch[1], cfg.ansatz.init_bloch[2]};

  std::vector<std::unique_ptr<StreamWriter>> streams;
  for (const ObservableRequest& req : cfg.observables) {
    streams.push_back(std::make_unique<StreamWriter>(dir / (req.stream_name() + ".csv"), false));
  }

  RunSummary summary;
  const auto t0 = std::chrono::steady_clock::now();
  long step = 0;
  try {
    meanfield_evolve(m, jsum, cfg.model.h, cfg.model.gamma, cfg.t_end, cfg.oracle_dt,
                     [&](double t, const MeanFieldState& s) {
                       if (step % cfg.cadence == 0) {
                         for (size_t k = 0; k < cfg.observables.size(); ++k) {
                           const char axis = cfg.observables[k].axis;
                           const double v = axis == 'x' ? s.mx : axis == 'y' ? s.my : s.mz;
                           streams[k]->row(t, v, 0.0);
                         }
                         ++summary.rows;
                       }
                       ++step;
                     });
    summary.steps = step > 0 ? step - 1 : 0;
  } catch (const std::exception& e) {
    summary.ok = false;
    summary.error = e.what();
  }
  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_metadata(cfg, summary);
  return summary;
}

std::vector<std::pair<double, double>> read_series(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("compare: cannot open " + path.string());
  std::vector<std::pair<double, double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    double vals[2];
    for (int k = 0; k < 2; ++k) {
      if (!std::getline(ss, tok, ',')) {
        throw InvalidInputError("compare: malformed row in " + path.string());
      }
      vals[k] = std::stod(tok);
    }
    rows.emplace_back(vals[0], vals[1]);
  }
  return rows;
}

double interpolate(const std::vector<std::pair<double, double>>& series, double t) {
  auto it = std::lower_bound(series.begin(), series.end(), t,
                             [](const auto& row, double x) { return row.first < x; });
  if (it == series.begin()) return it->second;
  if (it == series.end()) return series.back().second;
  const auto& [t1, v1] = *it;
  const auto& [t0, v0] = *(it - 1);
  if (t1 == t0) return v1;
  const double w = (t - t0) / (t1 - t0);
  return v0 + w * (v1 - v0);
}

}  // namespace

RunSummary run(const RunConfig& cfg) {
  switch (cfg.backend) {
    case Backend::vmc: return run_vmc(cfg, VmcRestore{});
    case Backend::exact: return run_exact(cfg);
    case Backend::meanfield: return run_meanfield(cfg);
  }
  throw InvalidInputError("run: unknown backend");
}

RunSummary resume(const RunConfig& cfg, const std::string& checkpoint_path) {
  if (cfg.backend != Backend::vmc) {
    throw InvalidInputError("resume: only the vmc backend supports checkpoints");
  }
  VmcRestore restore;
  restore.active = true;
  restore.ansatz = load_checkpoint(checkpoint_path);
  fs::path sidecar(checkpoint_path);
  sidecar.replace_extension(".json");
  restore.state = read_sidecar(sidecar);
  if (restore.ansatz.n_sites() != cfg.model.lattice.n_sites() ||
      restore.ansatz.bond_dim() != cfg.ansatz.chi ||
      restore.ansatz.period() != effective_period(cfg)) {
    throw InvalidInputError("resume: checkpoint shape does not match the configuration");
  }
  return run_vmc(cfg, restore);
}

CompareReport compare_runs(const std::string& dir_a, const std::string& dir_b, double tolerance) {
  auto streams_of = [](const std::string& dir) {
    std::set<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".csv") continue;
      const std::string stem = entry.path().stem().string();
      if (stem == "diagnostics") continue;
      names.insert(stem);
    }
    return names;
  };
  const std::set<std::string> a = streams_of(dir_a);
  const std::set<std::string> b = streams_of(dir_b);
  std::vector<std::string> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  if (common.empty()) throw InvalidInputError("compare: no common observable streams");

  CompareReport report;
  report.tolerance = tolerance;
  report.pass = true;
  for (const std::string& name : common) {
    auto sa = read_series(fs::path(dir_a) / (name + ".csv"));
    auto sb = read_series(fs::path(dir_b) / (name + ".csv"));
    if (sa.empty() || sb.empty()) throw InvalidInputError("compare: empty stream " + name);
    const double lo = std::max(sa.front().first, sb.front().first);
    const double hi = std::min(sa.back().first, sb.back().first);
    if (lo > hi) throw InvalidInputError("compare: disjoint time ranges for " + name);
    // Evaluate on the coarser grid restricted to the overlap.
    const auto& coarse = sa.size() <= sb.size() ? sa : sb;
    const auto& other = sa.size() <= sb.size() ? sb : sa;
    CompareEntry entry;
    entry.stream = name;
    double sum = 0.0;
    for (const auto& [t, v] : coarse) {
      if (t < lo - 1e-12 || t > hi + 1e-12) continue;
      const double dev = std::abs(v - interpolate(other, t));
      entry.max_dev = std::max(entry.max_dev, dev);
      sum += dev;
      ++entry.points;
    }
    if (entry.points == 0) throw InvalidInputError("compare: no overlapping points for " + name);
    entry.mean_dev = sum / entry.points;
    if (entry.max_dev > tolerance) report.pass = false;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace tvmpo
