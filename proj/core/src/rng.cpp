#include "simart/rng.hpp"

#include <cmath>

#include "simart/error.hpp"

namespace simart {

std::uint64_t Stream::next_below(std::uint64_t bound) {
  require(bound > 0, "next_below: bound must be positive");
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    while (lo < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * bound;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

namespace {

std::uint64_t poisson_small(Stream& stream, double mean) {
  double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double prod = stream.next_unit();
  while (prod > limit) {
    ++k;
    prod *= stream.next_unit();
  }
  return k;
}

// Transformed rejection with squeeze (Hormann 1993), valid for mean >= 10;
// used from 30 where its setup cost amortizes.
std::uint64_t poisson_ptrs(Stream& stream, double mean) {
  double log_mean = std::log(mean);
  double b = 0.931 + 2.53 * std::sqrt(mean);
  double a = -0.059 + 0.02483 * b;
  double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    double u = stream.next_unit() - 0.5;
    double v = stream.next_unit();
    double us = 0.5 - std::fabs(u);
    double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    double accept = kf * log_mean - mean - std::lgamma(kf + 1.0);
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <= accept) {
      return static_cast<std::uint64_t>(kf);
    }
  }
}

}  // namespace

std::uint64_t poisson(Stream& stream, double mean) {
  require(mean >= 0.0 && std::isfinite(mean), "poisson: mean must be finite and non-negative");
  if (mean == 0.0) return 0;
  if (mean < 30.0) return poisson_small(stream, mean);
  return poisson_ptrs(stream, mean);
}

}  // namespace simart
