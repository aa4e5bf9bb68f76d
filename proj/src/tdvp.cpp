#include "tvmpo/tdvp.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "tvmpo/errors.hpp"
#include "tvmpo/rng.hpp"

namespace tvmpo {

namespace {

// tr(A*B) without forming the product.
Complex trace_of_product(const Matrix& a, const Matrix& b) {
  return (a.transpose().cwiseProduct(b)).sum();
}

// M^{x_p} = sum_v B[x_p][v] A_p^v for a factor site.
void contracted_factor(const MpoAnsatz& ansatz, const Matrix& op, int site, int xp,
                       Matrix& out) {
  const int d2 = ansatz.vec_dim();
  out.setZero();
  for (int v = 0; v < d2; ++v) {
    const Complex b = op(xp, v);
    if (b != Complex(0.0, 0.0)) out += b * ansatz.site_tensor(site, v);
  }
}

}  // namespace

Complex local_estimator(const LindbladianSpec& spec, const MpoAnsatz& ansatz,
                        const Sample& sample) {
  const int n = ansatz.n_sites();
  const int chi = ansatz.bond_dim();
  if (std::abs(sample.amp) < kAmplitudeFloor) {
    throw DegenerateAmplitudeError("local_estimator: amplitude underflow");
  }
  Complex total = spec.diagonal.evaluate(sample.x);

  Matrix m(chi, chi), prod(chi, chi), tmp(chi, chi);
  Complex span_sum{0.0, 0.0};
  for (const SpanTerm& term : spec.span_terms) {
    const int j = term.anchor;
    const int width = term.span();
    Complex value;
    if (j + width - 1 <= n) {
      prod = sample.pp.left[j - 1];
      size_t fi = 0;
      for (int o = 0; o < width; ++o) {
        const int site = j + o;
        if (fi < term.factors.size() && term.factors[fi].offset == o) {
          contracted_factor(ansatz, term.factors[fi].op, site, sample.x[site - 1], m);
          ++fi;
          tmp.noalias() = prod * m;
        } else {
          tmp.noalias() = prod * ansatz.site_tensor(site, sample.x[site - 1]);
        }
        prod.swap(tmp);
      }
      value = trace_of_product(prod, sample.pp.right[j + width]);
    } else {
      // Term wraps through the periodic boundary: full cyclic product with
      // contracted factors substituted at the wrapped sites.
      std::vector<const Matrix*> factor_at(n + 1, nullptr);
      for (const SpanFactor& f : term.factors) {
        factor_at[(j - 1 + f.offset) % n + 1] = &f.op;
      }
      prod = Matrix::Identity(chi, chi);
      for (int site = 1; site <= n; ++site) {
        if (factor_at[site] != nullptr) {
          contracted_factor(ansatz, *factor_at[site], site, sample.x[site - 1], m);
          tmp.noalias() = prod * m;
        } else {
          tmp.noalias() = prod * ansatz.site_tensor(site, sample.x[site - 1]);
        }
        prod.swap(tmp);
      }
      value = prod.trace();
    }
    span_sum += term.coefficient * value;
  }
  total += span_sum / sample.amp;
  return total;
}

MomentAccumulator::MomentAccumulator(long n_params, long block_size)
    : sum_sd_(Matrix::Zero(n_params, n_params)),
      sum_f_(Vector::Zero(n_params)),
      sum_ff_(Matrix::Zero(n_params, n_params)),
      buffer_(n_params, std::max<long>(1, block_size)),
      buffer_lloc_(std::max<long>(1, block_size)) {}

void MomentAccumulator::add(const LogDerivative& delta, Complex lloc) {
  if (delta.delta.size() != sum_f_.size()) {
    throw InvalidInputError("MomentAccumulator::add: shape mismatch");
  }
  buffer_.col(buffered_) = delta.delta;
  buffer_lloc_[buffered_] = lloc;
  ++buffered_;
  ++count_;
  sum_l2_ += std::norm(lloc);
  if (buffered_ == buffer_.cols()) flush();
}

void MomentAccumulator::flush() {
  if (buffered_ == 0) return;
  const auto block = buffer_.leftCols(buffered_);
  const auto llocs = buffer_lloc_.head(buffered_);
  const Matrix conj_block = block.conjugate();
  sum_sd_.noalias() += conj_block * block.transpose();
  sum_f_.noalias() += conj_block * llocs;
  const Matrix g = conj_block * llocs.asDiagonal();
  sum_ff_.noalias() += g * g.adjoint();
  buffered_ = 0;
}

void MomentAccumulator::merge(MomentAccumulator& other) {
  if (other.sum_f_.size() != sum_f_.size()) {
    throw InvalidInputError("MomentAccumulator::merge: shape mismatch");
  }
  flush();
  other.flush();
  sum_sd_ += other.sum_sd_;
  sum_f_ += other.sum_f_;
  sum_ff_ += other.sum_ff_;
  sum_l2_ += other.sum_l2_;
  count_ += other.count_;
}

const Matrix& MomentAccumulator::sum_outer() {
  flush();
  return sum_sd_;
}

const Vector& MomentAccumulator::sum_force() {
  flush();
  return sum_f_;
}

const Matrix& MomentAccumulator::sum_force_outer() {
  flush();
  return sum_ff_;
}

AssembledMoments assemble(MomentAccumulator& acc) {
  if (acc.count() == 0) throw EmptyBatchError("assemble: empty batch");
  const double inv = 1.0 / static_cast<double>(acc.count());
  AssembledMoments out;
  out.count = acc.count();
  out.metric = acc.sum_outer() * inv;
  out.metric = 0.5 * (out.metric + out.metric.adjoint()).eval();
  out.force = acc.sum_force() * inv;
  out.force_cov = acc.sum_force_outer() * inv - out.force * out.force.adjoint();
  out.l2 = acc.sum_l2() * inv;
  return out;
}

Vector regularized_solve(const Matrix& metric, const Vector& force,
                         const Matrix& force_cov, const RegularizationConfig& cfg,
                         long n_samples, SolveDiagnostics* diag) {
  constexpr double eps_floor = 1e-30;
  Matrix shifted = metric;
  shifted.diagonal().array() += cfg.eps_shift;
  Eigen::SelfAdjointEigenSolver<Matrix> es(shifted);
  if (es.info() != Eigen::Success) {
    throw NumericalError("regularized_solve: eigendecomposition failed, |S| = " +
                         std::to_string(metric.norm()));
  }
  const auto& lambda = es.eigenvalues();
  const Matrix& v = es.eigenvectors();
  if (diag) {
    diag->metric_min_eig = lambda.minCoeff() - cfg.eps_shift;
    diag->metric_max_eig = lambda.maxCoeff() - cfg.eps_shift;
  }
  const Vector rotated = v.adjoint() * force;
  // Per-mode variance of the rotated force estimate.
  const Matrix cov_v = force_cov * v;
  Vector coeffs = Vector::Zero(force.size());
  for (Eigen::Index k = 0; k < force.size(); ++k) {
    if (lambda[k] <= eps_floor) continue;
    const double var = std::max(0.0, (v.col(k).adjoint() * cov_v.col(k))[0].real());
    const double noise = std::sqrt(var / static_cast<double>(std::max<long>(1, n_samples)) +
                                   eps_floor);
    const double snr = std::abs(rotated[k]) / noise;
    double damping = 1.0;
    if (cfg.eps_snr > 0.0) {
      damping = snr > 0.0 ? 1.0 / (1.0 + std::pow(cfg.eps_snr / snr, 6)) : 0.0;
    }
    coeffs[k] = rotated[k] / lambda[k] * damping;
  }
  return v * coeffs;
}

void euler_step(MpoAnsatz& ansatz, const Vector& adot, double tau) {
  Vector params = ansatz.parameters();
  params += tau * adot;
  ansatz.set_parameters(params);
  renormalize_trace(ansatz);
}

TdvpEngine::TdvpEngine(LindbladianSpec spec, EngineConfig cfg)
    : spec_(std::move(spec)), cfg_(cfg), tau_(cfg.integrator.tau_init) {
  if (cfg_.workers < 1) throw InvalidInputError("TdvpEngine: workers must be >= 1");
}

GradientResult TdvpEngine::evaluate(const MpoAnsatz& ansatz) {
  const std::uint64_t eval_id = eval_counter_++;
  const int workers = cfg_.workers;
  const long n_params = ansatz.n_params();

  std::vector<MomentAccumulator> accs;
  accs.reserve(workers);
  for (int w = 0; w < workers; ++w) accs.emplace_back(n_params);
  std::vector<SweepStats> stats(workers);
  std::vector<std::exception_ptr> errors(workers);

  auto work = [&](int w) {
    try {
      std::mt19937_64 rng = make_rng(cfg_.seed, static_cast<std::uint64_t>(w), eval_id);
      Sample init = random_initial_sample(ansatz, rng);
      draw_batch(ansatz, cfg_.sampler, std::move(init), rng,
                 [&](const Sample& sample) {
                   const Complex lloc = local_estimator(spec_, ansatz, sample);
                   const LogDerivative delta = log_derivative(ansatz, sample.x, sample.pp);
                   accs[w].add(delta, lloc);
                 },
                 &stats[w]);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  for (int w = 1; w < workers; ++w) accs[0].merge(accs[w]);
  AssembledMoments moments = assemble(accs[0]);

  SolveDiagnostics diag;
  GradientResult result;
  result.adot = regularized_solve(moments.metric, moments.force, moments.force_cov,
                                  cfg_.regularization, moments.count, &diag);
  result.l2 = moments.l2;
  result.metric_min_eig = diag.metric_min_eig;
  result.sample_count = moments.count;
  long proposals = 0, accepted = 0;
  for (const SweepStats& s : stats) {
    proposals += s.proposals;
    accepted += s.accepted;
  }
  result.acceptance = proposals > 0 ? static_cast<double>(accepted) / proposals : 0.0;
  return result;
}

void TdvpEngine::run_to_time(MpoAnsatz& ansatz, double t_start, double t_end,
                             const Observer& observer, bool observe_initial) {
  double t = t_start;
  if (observe_initial && observer) {
    StepInfo info;
    info.t = t;
    info.step_index = step_index_;
    observer(info, ansatz);
  }
  if (t_end <= t_start) return;
  const double t_eps = 1e-12 * std::max(1.0, std::abs(t_end));

  if (cfg_.integrator.scheme == IntegratorConfig::Scheme::euler) {
    while (t < t_end - t_eps) {
      const GradientResult grad = evaluate(ansatz);
      const double tau = std::min(cfg_.integrator.tau, t_end - t);
      euler_step(ansatz, grad.adot, tau);
      t += tau;
      ++step_index_;
      if (observer) {
        StepInfo info;
        info.t = t;
        info.tau = tau;
        info.l2 = grad.l2;
        info.metric_min_eig = grad.metric_min_eig;
        info.acceptance = grad.acceptance;
        info.step_index = step_index_;
        observer(info, ansatz);
      }
    }
    return;
  }

  // Adaptive Heun: predictor with the current gradient, corrector with a
  // fresh, independent gradient evaluation at the predictor point.
  const double eps_tol = cfg_.integrator.eps_tol;
  if (tau_ <= 0.0) tau_ = cfg_.integrator.tau_init;
  while (t < t_end - t_eps) {
    const GradientResult grad1 = evaluate(ansatz);
    const Vector params = ansatz.parameters();
    const double param_scale = std::max(params.norm(), 1.0);
    for (;;) {
      const double tau_try = std::min(tau_, t_end - t);
      MpoAnsatz predictor = ansatz;
      predictor.set_parameters(params + tau_try * grad1.adot);
      const GradientResult grad2 = evaluate(predictor);
      const Vector half_sum = 0.5 * (grad1.adot + grad2.adot);
      const double err =
          (tau_try * (half_sum - grad1.adot)).norm() / param_scale;
      double factor = 2.0;
      if (err > 0.0) {
        factor = std::clamp(0.9 * std::sqrt(eps_tol / err), 0.2, 2.0);
      }
      const double tau_next =
          std::min(cfg_.integrator.tau_max, std::max(cfg_.integrator.tau_floor, tau_try * factor));
      if (err <= eps_tol) {
        ansatz.set_parameters(params + tau_try * half_sum);
        renormalize_trace(ansatz);
        t += tau_try;
        tau_ = tau_next;
        ++step_index_;
        if (observer) {
          StepInfo info;
          info.t = t;
          info.tau = tau_try;
          info.err = err;
          info.l2 = grad1.l2;
          info.metric_min_eig = grad1.metric_min_eig;
          info.acceptance = grad1.acceptance;
          info.step_index = step_index_;
          observer(info, ansatz);
        }
        break;
      }
      if (tau_next <= cfg_.integrator.tau_floor) {
        throw StalledIntegrationError("run_to_time: adaptive step underflow at t = " +
                                      std::to_string(t));
      }
      tau_ = tau_next;
    }
  }
}

}  // namespace tvmpo
