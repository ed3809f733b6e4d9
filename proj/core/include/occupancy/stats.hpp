#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace occupancy {

/// Compensated (Kahan) accumulator. Deterministic for a fixed add order.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

double log_choose(double n, double k);
double normal_cdf(double z);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);
/// Upper-tail p-value of a chi-square statistic with df degrees of freedom.
double chi_square_pvalue(double stat, double df);

struct SampleMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

SampleMoments sample_moments(std::span<const double> xs);

/// Anderson-Darling normality statistic for the "case 3" situation where
/// mean and variance are estimated from the sample. Returns the
/// small-sample adjusted statistic A^2 * (1 + 0.75/n + 2.25/n^2), to be
/// compared against 1.035 for a test at the 1% level.
double anderson_darling_adjusted(std::span<const double> xs);

inline constexpr double kAndersonDarling1pcCritical = 1.035;

/// Hausdorff distance between two finite nonempty point sets in [0, 1].
/// Inputs must be sorted ascending.
double hausdorff_distance(std::span<const double> a, std::span<const double> b);

double median(std::vector<double> xs);

}  // namespace occupancy
