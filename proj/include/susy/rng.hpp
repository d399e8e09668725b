#pragma once

// Per-path random streams. Every path owns an independent std::mt19937_64
// whose seed is a splitmix64 hash of (master seed, stream, path index), so a
// path's draws do not depend on which thread simulates it.

#include <cstdint>
#include <random>

namespace susy {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream tags keep SDE, OU and auxiliary draws disjoint for one master seed.
enum class Stream : std::uint64_t {
  sde = 1,
  ou = 2,
  super_estimate = 3,
  wong_zakai = 4,
  time_reversal = 5,
};

inline std::uint64_t path_seed(std::uint64_t master, Stream stream, std::uint64_t index) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ static_cast<std::uint64_t>(stream));
  return splitmix64(s ^ splitmix64(index));
}

class PathRng {
 public:
  PathRng(std::uint64_t master, Stream stream, std::uint64_t index)
      : engine_(path_seed(master, stream, index)) {}

  double normal() { return normal_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace susy
