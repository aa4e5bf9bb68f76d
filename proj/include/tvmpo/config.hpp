#ifndef TVMPO_CONFIG_HPP
#define TVMPO_CONFIG_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvmpo/liouvillian.hpp"
#include "tvmpo/sampler.hpp"
#include "tvmpo/tdvp.hpp"

namespace tvmpo {

enum class Backend { vmc, exact, meanfield };

std::string backend_name(Backend b);
Backend backend_from_name(const std::string& name);

struct ObservableRequest {
  enum class Kind {
    magnetization,
    correlator,
    structure_factor,
    renyi2,
    purity,
    min_eigenvalue,
    rho_dot_cost
  };
  Kind kind = Kind::magnetization;
  char axis = 'z';
  int distance = 1;       // correlator
  bool connected = true;  // correlator
  int q_index = 0;        // structure_factor: q = 2*pi*q_index/N

  // File stem of the observable's CSV stream, e.g. "magnetization_x".
  std::string stream_name() const;
};

struct AnsatzConfig {
  int chi = 8;
  int period = 0;  // 0: use the lattice unit cell
  std::array<double, 3> init_bloch{0.0, 0.0, 1.0};  // rho_1 = (I + b.sigma)/2
};

struct RunConfig {
  ModelParams model;
  AnsatzConfig ansatz;
  SamplerConfig sampler;
  RegularizationConfig regularization;
  IntegratorConfig integrator;
  double t_end = 1.0;
  std::vector<ObservableRequest> observables;
  int cadence = 1;  // record every k-th accepted step (or oracle step)
  int workers = 1;
  std::uint64_t seed = 0;
  long checkpoint_every = 0;  // 0: only the final checkpoint
  std::string output_dir = "out";
  Backend backend = Backend::vmc;
  double oracle_dt = 1e-3;  // RK4 / mean-field step
};

// Parses and validates a JSON run configuration. Unknown keys are hard
// errors; missing keys take the documented defaults.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_json(const nlohmann::json& j);

// Fully resolved configuration; re-parsing it yields an identical RunConfig.
nlohmann::json resolved_config_json(const RunConfig& cfg);

// Effective MPO unit cell for a config (ansatz period or lattice default).
int effective_period(const RunConfig& cfg);

// Single-site density matrix from the Bloch vector.
Matrix bloch_density(const std::array<double, 3>& b);

}  // namespace tvmpo

#endif
