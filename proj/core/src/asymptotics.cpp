#include "occupancy/asymptotics.hpp"

#include <cmath>

namespace occupancy {

double SlowVariationSpec::operator()(double y) const {
  if (!(C > 0.0)) throw ParameterError("SlowVariationSpec: need C > 0");
  if (beta == 0.0) return C;
  if (!(y > 1.0)) throw ParameterError("SlowVariationSpec: log-power factor needs y > 1");
  return C * std::pow(std::log(y), beta);
}

SlowVariationSpec de_bruijn_conjugate(const SlowVariationSpec& ell) {
  if (!(ell.C > 0.0)) throw ParameterError("de_bruijn_conjugate: need C > 0");
  return {1.0 / ell.C, -ell.beta};
}

RegularVariationSpec RegularVariationSpec::make(double alpha, SlowVariationSpec ell) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ParameterError("RegularVariationSpec: need 0 <= alpha <= 1");
  }
  if (!(ell.C > 0.0)) throw ParameterError("RegularVariationSpec: need C > 0");
  RegularVariationSpec s;
  s.alpha = alpha;
  s.ell = ell;
  s.regime = alpha == 0.0 ? Regime::kSlow : alpha == 1.0 ? Regime::kRapid : Regime::kProper;
  return s;
}

SlowVariationSpec RegularVariationSpec::ell_one() const {
  if (regime != Regime::kRapid) {
    throw UnsupportedError("ell_one: defined for the rapid regime only");
  }
  if (!(ell.beta < -1.0)) {
    throw UnsupportedError("ell_one: integral diverges unless beta < -1");
  }
  return {ell.C / (-ell.beta - 1.0), ell.beta + 1.0};
}

SlowVariationSpec RegularVariationSpec::ell_zero() const {
  if (regime != Regime::kSlow) {
    throw UnsupportedError("ell_zero: defined for the slow regime only");
  }
  if (!(ell.beta > 0.0)) {
    throw UnsupportedError("ell_zero: need beta > 0 so the companion is positive");
  }
  return {ell.C * ell.beta, ell.beta - 1.0};
}

SlowVariationSpec RegularVariationSpec::ell_star() const {
  if (regime != Regime::kProper) {
    throw UnsupportedError("ell_star: proper regime only");
  }
  const double a = alpha;
  return {std::pow(ell.C, 1.0 / a) * std::pow(a, -ell.beta / a), ell.beta / a};
}

double predict_mean(const RegularVariationSpec& spec, double t, int r) {
  if (r < 0) throw ParameterError("predict_mean: need r >= 0");
  if (!(t > 1.0)) throw ParameterError("predict_mean: need t > 1");
  const double a = spec.alpha;
  switch (spec.regime) {
    case Regime::kProper: {
      const double base = std::tgamma(1.0 - a) * std::pow(t, a) * spec.ell(t);
      if (r == 0) return base;
      return ratio_limit(a, r) * base;
    }
    case Regime::kRapid: {
      if (r <= 1) return t * spec.ell_one()(t);
      return t * spec.ell(t) / (static_cast<double>(r) * (r - 1.0));
    }
    case Regime::kSlow: {
      if (r == 0) return spec.ell(t);
      return spec.ell_zero()(t) / static_cast<double>(r);
    }
  }
  throw ParameterError("predict_mean: bad regime");
}

double ratio_limit(double alpha, int r) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("ratio_limit: need 0 < alpha < 1");
  if (r < 1) throw ParameterError("ratio_limit: need r >= 1");
  return alpha * std::exp(std::lgamma(r - alpha) - std::lgamma(r + 1.0) - std::lgamma(1.0 - alpha));
}

double asymptotic_inverse(const std::function<double(double)>& h, double y, double y_min) {
  if (!(y_min > 0.0)) throw ParameterError("asymptotic_inverse: need y_min > 0");
  double lo = y_min;
  double flo = h(lo);
  if (flo > y) throw AccuracyError("asymptotic_inverse: target below h(y_min)");
  double hi = lo;
  double fhi = flo;
  for (int i = 0; fhi < y; ++i) {
    if (i >= 990 || hi > 1e290) {
      throw AccuracyError("asymptotic_inverse: no bracket below overflow cap");
    }
    lo = hi;
    hi *= 2.0;
    fhi = h(hi);
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double ell_star(const RegularVariationSpec& spec, double k) {
  const SlowVariationSpec star = spec.ell_star();
  return star.is_constant() ? star.C : star(k);
}

double predict_discovery(const RegularVariationSpec& spec, double k) {
  if (spec.regime != Regime::kProper) {
    throw UnsupportedError("predict_discovery: proper regime only");
  }
  if (!(k >= 1.0)) throw ParameterError("predict_discovery: need k >= 1");
  const double a = spec.alpha;
  return std::pow(k / std::tgamma(1.0 - a), 1.0 / a) / ell_star(spec, k);
}

double predict_unseen(const RegularVariationSpec& spec, double n) {
  if (spec.regime != Regime::kProper) {
    throw UnsupportedError("predict_unseen: proper regime only");
  }
  if (!(n > 1.0)) throw ParameterError("predict_unseen: need n > 1");
  const double a = spec.alpha;
  return a * std::tgamma(1.0 - a) * std::pow(n, a - 1.0) * spec.ell(n);
}

double predict_residual(const RegularVariationSpec& spec, double k) {
  if (spec.regime != Regime::kProper) {
    throw UnsupportedError("predict_residual: proper regime only");
  }
  if (!(k >= 1.0)) throw ParameterError("predict_residual: need k >= 1");
  const double a = spec.alpha;
  return a * std::pow(std::tgamma(1.0 - a), 1.0 / a) * std::pow(k, 1.0 - 1.0 / a) *
         ell_star(spec, k);
}

double residual_ratio_constant(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParameterError("residual_ratio_constant: need 0 < alpha < 1");
  }
  return std::pow(std::tgamma(2.0 - alpha), 1.0 / alpha) *
         std::pow(1.0 - alpha, 1.0 - 1.0 / alpha);
}

PowerLawPredictions power_law_predictions(double D, double alpha, double n, double k, int r) {
  if (!(D > 0.0)) throw ParameterError("power_law_predictions: need D > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParameterError("power_law_predictions: need 0 < alpha < 1");
  }
  if (r < 1) throw ParameterError("power_law_predictions: need r >= 1");
  if (!(n > 1.0) || !(k >= 1.0)) throw ParameterError("power_law_predictions: need n > 1, k >= 1");
  PowerLawPredictions out;
  out.D = D;
  out.alpha = alpha;
  out.k_n = D * std::pow(n, alpha);
  out.coeff_r = ratio_limit(alpha, r);
  out.k_nr = out.coeff_r * out.k_n;
  out.nu_bar_coeff = D / std::tgamma(1.0 - alpha);
  out.freq_coeff = std::pow(out.nu_bar_coeff, 1.0 / alpha);
  out.p_j = out.freq_coeff * std::pow(k, -1.0 / alpha);
  out.residual_k = alpha * std::pow(D, 1.0 / alpha) * std::pow(k, 1.0 - 1.0 / alpha);
  return out;
}

LimitCovariance limit_covariance(double alpha, int r_max) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("limit_covariance: need 0 < alpha < 1");
  if (r_max < 1) throw ParameterError("limit_covariance: need r_max >= 1");
  LimitCovariance cov;
  cov.alpha = alpha;
  cov.r_max = r_max;
  cov.sigma.assign(r_max, std::vector<double>(r_max, 0.0));
  for (int r = 1; r <= r_max; ++r) {
    for (int s = 1; s <= r_max; ++s) {
      double v = -alpha * std::exp(std::lgamma(r + s - alpha) - std::lgamma(r + 1.0) -
                                   std::lgamma(s + 1.0) + (alpha - r - s) * std::log(2.0));
      if (r == s) {
        v += alpha * std::exp(std::lgamma(r - alpha) - std::lgamma(r + 1.0));
      }
      cov.sigma[r - 1][s - 1] = v;
    }
  }
  return cov;
}

double estimate_alpha(const OccupancyState& state) {
  if (state.K == 0) throw ParameterError("estimate_alpha: empty sample");
  return static_cast<double>(state.k_r(1)) / static_cast<double>(state.K);
}

RegularVariationSpec model_variation(const FrequencyModel& model) {
  if (model.kind() != ModelKind::kPowerLaw) {
    throw UnsupportedError("model_variation: only power-law models have a built-in spec");
  }
  // p_j = c j^{-1/alpha}: recover alpha from the first two frequencies
  // and set ell to the constant c^alpha.
  const double p1 = model.frequency(1);
  const double p2 = model.frequency(2);
  const double alpha = std::log(2.0) / (std::log(p1) - std::log(p2));
  return RegularVariationSpec::make(alpha, {std::pow(p1, alpha), 0.0});
}

}  // namespace occupancy
