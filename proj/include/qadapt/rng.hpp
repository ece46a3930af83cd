#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qadapt {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seeds form a tree: derive_seed(parent, {a, b}) is a pure function,
// so results never depend on how trials are scheduled across workers.
inline std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(parent);
  for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

inline Rng make_rng(std::uint64_t parent, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(parent, path));
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline bool fair_coin(Rng& rng) { return (rng() >> 63) != 0; }

double laplace(Rng& rng, double scale);

}  // namespace qadapt
