#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "occupancy/frequency_model.hpp"
#include "occupancy/sampler.hpp"

namespace occupancy {

/// Slowly varying factor restricted to the log-power family
/// ell(y) = C (log y)^beta. This family is closed under every
/// transformation the predictions need (integrated tails, de Bruijn
/// conjugation, powers), so all derived factors stay in closed form.
struct SlowVariationSpec {
  double C = 1.0;
  double beta = 0.0;

  double operator()(double y) const;
  bool is_constant() const { return beta == 0.0; }
};

/// de Bruijn conjugate within the log-power family:
/// (C (log y)^beta)^# = C^{-1} (log y)^{-beta}.
SlowVariationSpec de_bruijn_conjugate(const SlowVariationSpec& ell);

enum class Regime { kSlow, kProper, kRapid };

/// Regular variation of nu_bar at 0: nu_bar(x) ~ ell(1/x) x^{-alpha}.
/// alpha = 0 is the slow regime, alpha = 1 the rapid one.
struct RegularVariationSpec {
  double alpha = 0.5;
  SlowVariationSpec ell;
  Regime regime = Regime::kProper;

  static RegularVariationSpec make(double alpha, SlowVariationSpec ell = {});

  /// Rapid regime companion ell_1(y) = int_y^inf u^{-1} ell(u) du;
  /// finite within the family only for beta < -1.
  SlowVariationSpec ell_one() const;
  /// Slow regime companion ell_0 with ell(y) = int_1^y u^{-1} ell_0(u) du,
  /// i.e. ell_0(y) = y ell'(y) = C beta (log y)^{beta-1}; needs beta > 0.
  SlowVariationSpec ell_zero() const;
  /// ell*(y) = 1 / {ell^{1/alpha}(y^{1/alpha})}^#, proper regime only.
  /// Within the log-power family this collapses to
  /// C^{1/alpha} alpha^{-beta/alpha} (log y)^{beta/alpha}.
  SlowVariationSpec ell_star() const;
};

struct PowerLawDiversity {
  double D = 1.0;
  double alpha = 0.5;
};

struct LimitCovariance {
  double alpha = 0.0;
  int r_max = 0;
  std::vector<std::vector<double>> sigma;  // (r_max x r_max), 1-based shifted

  double at(int r, int s) const { return sigma.at(r - 1).at(s - 1); }
};

/// Leading-order mean occupancy: r = 0 predicts E K(t), r >= 1 predicts
/// E K_r(t); the same expressions serve the fixed-n scheme with t = n.
double predict_mean(const RegularVariationSpec& spec, double t, int r);

/// lim Phi_r(t)/Phi(t) = alpha Gamma(r-alpha) / (r! Gamma(1-alpha));
/// over r >= 1 these form a probability distribution.
double ratio_limit(double alpha, int r);

/// g(y) with h(g(y)) = y to 1e-10 relative, for h strictly increasing
/// beyond y_min. Bracket grows geometrically from y_min; throws
/// AccuracyError if no bracket is found below the overflow cap.
double asymptotic_inverse(const std::function<double(double)>& h, double y, double y_min = 1.0);

double ell_star(const RegularVariationSpec& spec, double k);

/// Discovery-time asymptote N_k ~ T_k ~ (k/Gamma(1-alpha))^{1/alpha} / ell*(k).
double predict_discovery(const RegularVariationSpec& spec, double k);

/// E S_n ~ alpha Gamma(1-alpha) n^{alpha-1} ell(n).
double predict_unseen(const RegularVariationSpec& spec, double n);
/// E R_k ~ alpha {Gamma(1-alpha)}^{1/alpha} k^{1-1/alpha} ell*(k).
double predict_residual(const RegularVariationSpec& spec, double k);
/// lim of (size-biased residual R_k) / (ranked tail beyond k):
/// {Gamma(2-alpha)}^{1/alpha} (1-alpha)^{1-1/alpha}; pi/2 at alpha = 1/2.
double residual_ratio_constant(double alpha);

struct PowerLawPredictions {
  double D = 0.0;
  double alpha = 0.0;
  double k_n = 0.0;           // E K_n ~ D n^alpha
  double coeff_r = 0.0;       // alpha(1-alpha)...(r-1-alpha)/r!
  double k_nr = 0.0;          // E K_{n,r} ~ coeff_r * D n^alpha
  double nu_bar_coeff = 0.0;  // nu_bar(x) ~ nu_bar_coeff * x^{-alpha}
  double freq_coeff = 0.0;    // p_j ~ freq_coeff * j^{-1/alpha}
  double p_j = 0.0;           // frequency prediction at j = k
  double residual_k = 0.0;    // R_k ~ alpha D^{1/alpha} k^{1-1/alpha}
};

/// Predictions implied by the diversity constant D (constant-ell case).
PowerLawPredictions power_law_predictions(double D, double alpha, double n, double k, int r);

LimitCovariance limit_covariance(double alpha, int r_max);

/// Singleton-ratio index estimator: alpha_hat = K_{n,1} / K_n.
double estimate_alpha(const OccupancyState& state);

/// RegularVariationSpec describing a built-in model, for cross-module
/// prediction checks. Geometric models are not regularly varying and
/// throw UnsupportedError.
RegularVariationSpec model_variation(const FrequencyModel& model);

}  // namespace occupancy
