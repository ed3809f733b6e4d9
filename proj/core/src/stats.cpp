#include "occupancy/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace occupancy {

double log_choose(double n, double k) {
  if (k < 0.0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

namespace {

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 500; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double gamma_q(double a, double x) { return 1.0 - gamma_p(a, x); }

double chi_square_pvalue(double stat, double df) {
  if (stat <= 0.0) return 1.0;
  return gamma_q(df / 2.0, stat / 2.0);
}

SampleMoments sample_moments(std::span<const double> xs) {
  SampleMoments m;
  m.count = xs.size();
  if (xs.empty()) return m;
  KahanSum s;
  for (double x : xs) s.add(x);
  m.mean = s.value() / static_cast<double>(xs.size());
  KahanSum s2, s3, s4;
  for (double x : xs) {
    const double d = x - m.mean;
    s2.add(d * d);
    s3.add(d * d * d);
    s4.add(d * d * d * d);
  }
  const double n = static_cast<double>(xs.size());
  if (xs.size() > 1) m.variance = s2.value() / (n - 1.0);
  const double m2 = s2.value() / n;
  if (m2 > 0.0) {
    m.skewness = (s3.value() / n) / std::pow(m2, 1.5);
    m.excess_kurtosis = (s4.value() / n) / (m2 * m2) - 3.0;
  }
  return m;
}

double anderson_darling_adjusted(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 8) throw std::invalid_argument("anderson_darling: need at least 8 samples");
  const SampleMoments m = sample_moments(xs);
  const double sd = std::sqrt(m.variance);
  if (!(sd > 0.0)) throw std::invalid_argument("anderson_darling: degenerate sample");
  std::vector<double> z(xs.begin(), xs.end());
  for (double& v : z) v = (v - m.mean) / sd;
  std::sort(z.begin(), z.end());
  KahanSum acc;
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lo = normal_cdf(z[i]);
    double hi = normal_cdf(z[n - 1 - i]);
    lo = std::clamp(lo, 1e-300, 1.0 - 1e-16);
    hi = std::clamp(hi, 1e-300, 1.0 - 1e-16);
    acc.add((2.0 * static_cast<double>(i) + 1.0) * (std::log(lo) + std::log1p(-hi)));
  }
  const double a2 = -dn - acc.value() / dn;
  return a2 * (1.0 + 0.75 / dn + 2.25 / (dn * dn));
}

namespace {

double directed_hausdorff(std::span<const double> from, std::span<const double> to) {
  double worst = 0.0;
  for (double x : from) {
    auto it = std::lower_bound(to.begin(), to.end(), x);
    double best = std::numeric_limits<double>::infinity();
    if (it != to.end()) best = std::min(best, *it - x);
    if (it != to.begin()) best = std::min(best, x - *(it - 1));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double hausdorff_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff_distance: empty set");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median: empty");
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  std::nth_element(xs.begin(), xs.begin() + mid - 1, xs.begin() + mid);
  return 0.5 * (hi + xs[mid - 1]);
}

}  // namespace occupancy
