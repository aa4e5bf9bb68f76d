#ifndef TVMPO_RNG_HPP
#define TVMPO_RNG_HPP

#include <cstdint>
#include <random>

namespace tvmpo {

// splitmix64 mixing step, used to derive independent seeds from
// (seed, worker, counter) tuples so that parallel workers and restarted
// runs draw from reproducible, non-overlapping streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t worker,
                                        std::uint64_t counter) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ splitmix64(worker + 0x123456789abcdefULL));
  s = splitmix64(s ^ splitmix64(counter + 0xfedcba9876543210ULL));
  return s;
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t worker,
                                std::uint64_t counter) {
  return std::mt19937_64(derive_stream_seed(seed, worker, counter));
}

}  // namespace tvmpo

#endif
