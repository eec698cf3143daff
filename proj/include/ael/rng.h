#pragma once

#include <cstdint>
#include <initializer_list>

namespace ael {

// xoshiro256++ with splitmix64 seeding. Independent streams are derived by
// hashing a seed with a list of integer tags, so that every (experiment,
// cell, replication) coordinate owns a reproducible generator regardless
// of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static std::uint64_t derive_seed(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> tags);
  static Rng stream(std::uint64_t seed,
                    std::initializer_list<std::uint64_t> tags) {
    return Rng(derive_seed(seed, tags));
  }

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  double normal();  // standard normal via inverse CDF
  double normal(double mu, double sigma) { return mu + sigma * normal(); }
  double exponential(double rate = 1.0);
  // Marsaglia-Tsang squeeze method; shapes below one use the boost
  // transformation gamma(a) = gamma(a + 1) * U^(1/a).
  double gamma(double shape, double scale = 1.0);
  double chi_square(double df) { return gamma(0.5 * df, 2.0); }
  int poisson(double mean);

 private:
  std::uint64_t s_[4];
};

}  // namespace ael
