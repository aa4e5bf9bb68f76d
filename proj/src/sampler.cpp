#include "tvmpo/sampler.hpp"

#include <cmath>

#include "tvmpo/errors.hpp"

namespace tvmpo {

Sample make_sample(const MpoAnsatz& ansatz, SpinConfiguration x) {
  Sample s;
  s.pp = partial_products(ansatz, x);
  s.amp = s.pp.left[ansatz.n_sites()].trace();
  s.x = std::move(x);
  return s;
}

Sample random_initial_sample(const MpoAnsatz& ansatz, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(0, ansatz.vec_dim() - 1);
  for (int attempt = 0; attempt < 100; ++attempt) {
    SpinConfiguration x(ansatz.n_sites());
    for (int& xi : x) xi = dist(rng);
    Sample s = make_sample(ansatz, std::move(x));
    if (std::abs(s.amp) >= kAmplitudeFloor) return s;
  }
  throw DegenerateDistributionError(
      "random_initial_sample: no configuration with nonzero amplitude in 100 draws");
}

void metropolis_sweep(const MpoAnsatz& ansatz, Sample& state, std::mt19937_64& rng,
                      SweepDirection direction, SweepStats* stats) {
  const int n = ansatz.n_sites();
  const int chi = ansatz.bond_dim();
  std::uniform_int_distribution<int> propose(0, ansatz.vec_dim() - 1);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Complex q = state.amp;
  long zero_streak = 0;
  Matrix scratch(chi, chi);
  Matrix candidate(chi, chi);

  auto visit = [&](int j) {
    const int xj_new = propose(rng);
    // q' = tr(L_{j-1} A^{x_j'} R_{j+1}); both cached products are valid for
    // the sites they cover at this point in the sweep.
    scratch.noalias() = state.pp.left[j - 1] * ansatz.site_tensor(j, xj_new);
    candidate.noalias() = scratch * state.pp.right[j + 1];
    const Complex q_new = candidate.trace();
    const double u = uniform(rng);
    const double aq = std::abs(q), aq_new = std::abs(q_new);
    bool accept;
    if (aq == 0.0) {
      accept = aq_new > 0.0;
      if (!accept && ++zero_streak > 10L * n) {
        throw DegenerateDistributionError("metropolis_sweep: stuck at zero amplitude");
      }
    } else {
      const double ratio = (aq_new / aq) * (aq_new / aq);
      accept = ratio >= 1.0 || u < ratio;
    }
    if (stats) {
      ++stats->proposals;
      if (accept) ++stats->accepted;
    }
    if (accept) {
      state.x[j - 1] = xj_new;
      q = q_new;
      zero_streak = 0;
    }
  };

  if (direction == SweepDirection::forward) {
    for (int j = 1; j <= n; ++j) {
      visit(j);
      state.pp.left[j].noalias() = state.pp.left[j - 1] * ansatz.site_tensor(j, state.x[j - 1]);
    }
    state.amp = state.pp.left[n].trace();
  } else {
    for (int j = n; j >= 1; --j) {
      visit(j);
      state.pp.right[j].noalias() = ansatz.site_tensor(j, state.x[j - 1]) * state.pp.right[j + 1];
    }
    state.pp.right[0] = state.pp.right[1];
    state.amp = state.pp.right[1].trace();
  }
}

void draw_batch(const MpoAnsatz& ansatz, const SamplerConfig& cfg, Sample init,
                std::mt19937_64& rng, const std::function<void(const Sample&)>& on_sample,
                SweepStats* stats) {
  if (cfg.n_samples < 1 || cfg.sweeps_between < 1) {
    throw InvalidInputError("draw_batch: n_samples and sweeps_between must be >= 1");
  }
  Sample state = std::move(init);
  SweepDirection dir = SweepDirection::forward;
  auto flip = [](SweepDirection d) {
    return d == SweepDirection::forward ? SweepDirection::reverse : SweepDirection::forward;
  };
  for (int sweep = 0; sweep < cfg.burn_in; ++sweep) {
    metropolis_sweep(ansatz, state, rng, dir, stats);
    dir = flip(dir);
  }
  for (long k = 0; k < cfg.n_samples; ++k) {
    for (int sweep = 0; sweep < cfg.sweeps_between; ++sweep) {
      metropolis_sweep(ansatz, state, rng, dir, stats);
      dir = flip(dir);
    }
    // Refresh both product sets from scratch so the estimator can use either.
    state = make_sample(ansatz, std::move(state.x));
    on_sample(state);
  }
}

}  // namespace tvmpo
