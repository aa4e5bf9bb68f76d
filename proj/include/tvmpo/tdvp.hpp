#ifndef TVMPO_TDVP_HPP
#define TVMPO_TDVP_HPP

#include <cstdint>
#include <functional>

#include "tvmpo/liouvillian.hpp"
#include "tvmpo/mpo.hpp"
#include "tvmpo/sampler.hpp"

namespace tvmpo {

// L_loc(x) = <x|L|rho>/<x|rho>: diagonal part evaluated exactly, span terms
// contracted through the cached partial products.
Complex local_estimator(const LindbladianSpec& spec, const MpoAnsatz& ansatz,
                        const Sample& sample);

// Running Monte Carlo sums for the metric tensor, forces, force covariance,
// and E[|L_loc|^2]. Samples are buffered in blocks and folded in with matrix
// products. Accumulators merge by addition.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(long n_params, long block_size = 256);

  void add(const LogDerivative& delta, Complex lloc);
  void merge(MomentAccumulator& other);
  long count() const { return count_; }
  long n_params() const { return sum_f_.size(); }

  // Raw sums (flushes pending samples first).
  const Matrix& sum_outer();      // sum of conj(Delta) Delta^T
  const Vector& sum_force();      // sum of conj(Delta) * L_loc
  const Matrix& sum_force_outer();  // sum of (conj(Delta) L_loc)(...)^dagger
  double sum_l2() const { return sum_l2_; }

 private:
  void flush();

  Matrix sum_sd_;
  Vector sum_f_;
  Matrix sum_ff_;
  double sum_l2_ = 0.0;
  long count_ = 0;

  Matrix buffer_;       // pending Delta columns
  Vector buffer_lloc_;
  long buffered_ = 0;
};

struct AssembledMoments {
  Matrix metric;     // Hermitian S
  Vector force;      // f
  Matrix force_cov;  // E[g g^dagger] - f f^dagger
  double l2 = 0.0;   // E[|L_loc|^2]
  long count = 0;
};

AssembledMoments assemble(MomentAccumulator& acc);

struct RegularizationConfig {
  double eps_shift = 1e-8;
  double eps_snr = 1e-8;
};

struct SolveDiagnostics {
  double metric_min_eig = 0.0;  // before the diagonal shift
  double metric_max_eig = 0.0;
};

// Eigendecomposes S + eps_shift*I and applies the signal-to-noise damped
// pseudo-inverse to obtain the parameter velocity.
Vector regularized_solve(const Matrix& metric, const Vector& force,
                         const Matrix& force_cov, const RegularizationConfig& cfg,
                         long n_samples, SolveDiagnostics* diag = nullptr);

struct IntegratorConfig {
  enum class Scheme { euler, heun_adaptive };
  Scheme scheme = Scheme::heun_adaptive;
  double tau = 0.01;       // fixed Euler step
  double eps_tol = 0.01;   // Heun tolerance
  double tau_init = 1e-8;
  double tau_max = 0.1;
  double tau_floor = 1e-12;
};

// a <- a + tau * adot, followed by trace renormalization.
void euler_step(MpoAnsatz& ansatz, const Vector& adot, double tau);

struct EngineConfig {
  SamplerConfig sampler;
  RegularizationConfig regularization;
  IntegratorConfig integrator;
  int workers = 1;
  std::uint64_t seed = 0;
};

struct GradientResult {
  Vector adot;
  double l2 = 0.0;            // E[|L_loc|^2]
  double metric_min_eig = 0.0;
  double acceptance = 0.0;
  long sample_count = 0;
};

struct StepInfo {
  double t = 0.0;
  double tau = 0.0;     // step just taken (0 for the initial observation)
  double err = 0.0;     // Heun error estimate
  double l2 = 0.0;
  double metric_min_eig = 0.0;
  double acceptance = 0.0;
  long step_index = 0;
};

// Drives the sample -> accumulate -> assemble -> solve -> step -> renormalize
// loop. Worker RNG streams are derived from (seed, worker, eval_counter), so a
// run can be resumed bit-exactly from (ansatz, t, tau, eval_counter).
class TdvpEngine {
 public:
  using Observer = std::function<void(const StepInfo&, const MpoAnsatz&)>;

  TdvpEngine(LindbladianSpec spec, EngineConfig cfg);

  GradientResult evaluate(const MpoAnsatz& ansatz);

  // Integrates from t_start to t_end, invoking the observer after each
  // accepted step (and once at t_start when observe_initial is set).
  void run_to_time(MpoAnsatz& ansatz, double t_start, double t_end,
                   const Observer& observer, bool observe_initial = true);

  std::uint64_t eval_counter() const { return eval_counter_; }
  void set_eval_counter(std::uint64_t c) { eval_counter_ = c; }
  double current_tau() const { return tau_; }
  void set_current_tau(double tau) { tau_ = tau; }
  long step_index() const { return step_index_; }
  void set_step_index(long s) { step_index_ = s; }

  const LindbladianSpec& spec() const { return spec_; }
  const EngineConfig& config() const { return cfg_; }

 private:
  LindbladianSpec spec_;
  EngineConfig cfg_;
  std::uint64_t eval_counter_ = 0;
  double tau_ = 0.0;
  long step_index_ = 0;
};

}  // namespace tvmpo

#endif
