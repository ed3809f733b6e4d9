#include "occupancy/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace occupancy {

double Rng::exponential() { return -std::log(1.0 - uniform01()); }

double Rng::normal() {
  if (has_normal_cache_) {
    has_normal_cache_ = false;
    return normal_cache_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  normal_cache_ = r * std::sin(a);
  has_normal_cache_ = true;
  return r * std::cos(a);
}

// Marsaglia-Tsang; shape < 1 boosted through shape + 1.
double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
  if (shape < 1.0) {
    const double u = uniform_pos();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
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
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  return x / (x + y);
}

// Inversion by uniform products for small mean, Hormann's PTRS otherwise.
std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean < 12.0) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = uniform01();
    while (prod > limit) {
      ++k;
      prod *= uniform01();
    }
    return k;
  }
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    double u = uniform01() - 0.5;
    double v = uniform01();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (kf < 0.0) continue;
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
    if (us < 0.013 && v > us) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * log_mean - mean - std::lgamma(kf + 1.0)) {
      return static_cast<std::uint64_t>(kf);
    }
  }
}

}  // namespace occupancy
