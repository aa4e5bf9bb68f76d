#ifndef TVMPO_SAMPLER_HPP
#define TVMPO_SAMPLER_HPP

#include <cstdint>
#include <functional>
#include <random>

#include "tvmpo/mpo.hpp"

namespace tvmpo {

struct SamplerConfig {
  long n_samples = 5000;   // samples per gradient evaluation (per worker)
  int sweeps_between = 5;  // decorrelation sweeps between yielded samples
  int burn_in = 5;         // initial discarded sweeps
  std::uint64_t seed = 0;
};

struct Sample {
  SpinConfiguration x;
  Complex amp{0.0, 0.0};
  PartialProducts pp;
};

struct SweepStats {
  long proposals = 0;
  long accepted = 0;
};

enum class SweepDirection { forward, reverse };

// Builds a consistent Sample (amplitude plus both partial-product sets) from x.
Sample make_sample(const MpoAnsatz& ansatz, SpinConfiguration x);

// Uniformly random initial chain state; redraws up to 100 times if the
// amplitude underflows.
Sample random_initial_sample(const MpoAnsatz& ansatz, std::mt19937_64& rng);

// One sequential Metropolis sweep over sites 1..N (forward) or N..1 (reverse),
// with uniform single-site proposals and acceptance min(1, |q'/q|^2).
// A forward sweep consumes the cached {R_j} and leaves fresh {L_j}; a reverse
// sweep does the opposite. The amplitude is updated from the fresh products.
void metropolis_sweep(const MpoAnsatz& ansatz, Sample& state, std::mt19937_64& rng,
                      SweepDirection direction = SweepDirection::forward,
                      SweepStats* stats = nullptr);

// Runs burn_in sweeps, then yields n_samples samples separated by
// sweeps_between alternating-direction sweeps. Each yielded sample carries
// freshly recomputed partial products on both sides. Deterministic given
// (rng state, ansatz, init).
void draw_batch(const MpoAnsatz& ansatz, const SamplerConfig& cfg, Sample init,
                std::mt19937_64& rng, const std::function<void(const Sample&)>& on_sample,
                SweepStats* stats = nullptr);

}  // namespace tvmpo

#endif
