#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace lgdp {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for an independent substream identified by a path of integers,
/// e.g. {chain, stream_kind, country}. Equal paths give equal seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (auto p : path) h = splitmix64(h ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
  return h;
}

inline Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  return Engine(derive_seed(seed, path));
}

/// Fresh distribution objects per call: no cached state outside the engine.
inline double draw_normal(Engine& eng) { return std::normal_distribution<double>(0.0, 1.0)(eng); }

inline double draw_uniform(Engine& eng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(eng);
}

/// Open interval (0, 1).
inline double draw_open_uniform(Engine& eng) {
  double u = 0.0;
  do {
    u = draw_uniform(eng);
  } while (u <= 0.0);
  return u;
}

/// Gamma(shape, rate). Underflow to zero is bumped to the smallest normal
/// double so precisions stay strictly positive.
inline double draw_gamma(Engine& eng, double shape, double rate) {
  const double g = std::gamma_distribution<double>(shape, 1.0 / rate)(eng);
  return g > 0.0 ? g : std::numeric_limits<double>::min();
}

}  // namespace lgdp
