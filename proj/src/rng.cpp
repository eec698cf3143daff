#include "ael/rng.h"

#include "ael/distributions.h"
#include "ael/types.h"

#include <cmath>

namespace ael {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t Rng::derive_seed(std::uint64_t seed,
                               std::initializer_list<std::uint64_t> tags) {
  std::uint64_t sm = seed;
  std::uint64_t out = splitmix64(sm);
  for (std::uint64_t tag : tags) {
    sm = out ^ (tag + 0xD1B54A32D192ED03ULL);
    out = splitmix64(sm);
  }
  return out;
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  // 53-bit mantissa shifted to the midpoint of each cell: strictly in (0,1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire-style rejection keeps the distribution exactly uniform.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < n) {
    const std::uint64_t threshold = -n % n;
    while (lo < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * n;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::normal() { return normal_quantile(uniform()); }

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw InputError("exponential rate must be positive");
  return -std::log(uniform()) / rate;
}

double Rng::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw InputError("gamma shape and scale must be positive");
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v * scale;
  }
}

int Rng::poisson(double mean) {
  if (!(mean >= 0.0)) throw InputError("poisson mean must be nonnegative");
  if (mean == 0.0) return 0;
  if (mean > 60.0) {
    // Rounded-normal tail guard; means that large never occur in the
    // configured populations.
    const double v = std::round(mean + std::sqrt(mean) * normal());
    return v < 0.0 ? 0 : static_cast<int>(v);
  }
  const double u = uniform();
  int k = 0;
  double p = std::exp(-mean);
  double cum = p;
  while (u > cum && k < 10000) {
    ++k;
    p *= mean / k;
    cum += p;
  }
  return k;
}

}  // namespace ael
