#pragma once

// Seeded random streams for reproducible simulation runs.
//
// Each replication owns two independent streams derived from
// (master_seed, replication_index): one for the environment's loss draws
// and one for the policy's sampling. Keeping them disjoint means a change
// in policy randomness never perturbs the environment realization, so
// paired comparisons across policies are exact.

#include <cstdint>
#include <random>
#include <stdexcept>

namespace csb {

// splitmix64 finalizer; used only to spread correlated seed inputs.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication,
                                 std::uint64_t role) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ splitmix64(replication + 0x1000ULL));
  s = splitmix64(s ^ splitmix64(role + 0x2000ULL));
  return s;
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  double uniform01() {
    // 53-bit mantissa draw in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  double gamma(double shape) {
    std::gamma_distribution<double> d(shape, 1.0);
    return d(engine_);
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    const double s = x + y;
    return s > 0.0 ? x / s : 0.5;
  }

  // uniform integer in [0, n)
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// The two named sub-streams a single replication consumes.
struct ReplicationRng {
  RngStream environment;
  RngStream policy;

  static ReplicationRng make(std::uint64_t master_seed, std::uint64_t replication) {
    return ReplicationRng{RngStream(derive_seed(master_seed, replication, 0xE17ULL)),
                          RngStream(derive_seed(master_seed, replication, 0xAC7ULL))};
  }
};

}  // namespace csb
