#pragma once

// Seeded, chunked normal stream. Chunk seeds are derived from the master
// seed by splitmix64 so results do not depend on how draws are scheduled.

#include <cstdint>
#include <random>

namespace pathint {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed, std::uint64_t chunk = 0) {
    std::uint64_t s = seed ^ (0xa076bc9d2df0f1c5ULL * (chunk + 1));
    std::uint64_t mixed = splitmix64(s);
    engine_.seed(mixed);
  }

  double operator()() { return dist_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace pathint
