#include "occupancy/moments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "occupancy/stats.hpp"

namespace occupancy {

namespace {

struct ValB {
  double v = 0.0;
  double err = 0.0;
};

// Explicit head of the atom list: everything with weight * p > theta.
// Series over the remaining tail converge at rate ~theta^k/k!, so theta
// a bit above 1 is still fine; eff records the worst-case parameter.
struct Head {
  std::vector<WeightedAtom> atoms;
  std::uint64_t J = 0;
  double eff = 0.0;
};

Head select_head(const FrequencyModel& m, double weight, std::uint64_t single_cap) {
  Head h;
  if (weight <= 0.0) return h;
  double theta = 0.5;
  h.J = m.head_atoms(weight, theta, h.atoms);
  if (m.kind() != ModelKind::kBlock && h.J > single_cap) {
    theta = weight * m.frequency(single_cap + 1);
    h.J = m.head_atoms(weight, theta, h.atoms);
  }
  h.eff = std::max(theta, weight * m.residual_mass());
  if (h.eff > 8.0) {
    throw AccuracyError(
        "moment engine: unresolved tail too heavy at this scale (extend the model "
        "realization or reduce n/t)");
  }
  return h;
}

// Tail power sums T_k = sum_{j>J} p_j^k, computed on demand.
class TailMoments {
 public:
  TailMoments(const FrequencyModel& m, std::uint64_t J) : m_(m), J_(J) { t_.push_back(0.0); }
  double operator()(int k) {
    while (static_cast<int>(t_.size()) <= k) {
      t_.push_back(m_.tail_moment(static_cast<int>(t_.size()), J_));
    }
    return t_[static_cast<std::size_t>(k)];
  }

 private:
  const FrequencyModel& m_;
  std::uint64_t J_;
  std::vector<double> t_;
};

constexpr int kSeriesCap = 120;

void require_normalized(const FrequencyModel& m) {
  if (!m.normalized()) {
    throw SchemeError("fixed-n scheme requires a normalized model (total mass 1)");
  }
}

// sum_{k>=1} (-1)^{k-1} C(n,k) T_k  == sum_{j>J} (1 - (1-p_j)^n)
ValB fixed_tail_series(double n, TailMoments& T) {
  long double coef = 1.0L;
  long double acc = 0.0L;
  double peak = 0.0;
  int kmax = static_cast<int>(std::min<double>(n, kSeriesCap));
  for (int k = 1; k <= kmax; ++k) {
    coef *= static_cast<long double>(n - k + 1) / k;
    const double tk = T(k);
    if (tk == 0.0) break;
    const double term = static_cast<double>(coef * tk);
    peak = std::max(peak, std::fabs(term));
    acc += (k % 2 ? 1.0L : -1.0L) * term;
    if (std::fabs(term) < 1e-17 * (std::fabs(static_cast<double>(acc)) + 1e-300) && k > 2) break;
    if (k == kmax && std::fabs(term) > 1e-12 * (std::fabs(static_cast<double>(acc)) + 1e-300) &&
        k < n) {
      throw AccuracyError("moment engine: tail series did not converge");
    }
  }
  return {static_cast<double>(acc), 1e-16 * peak};
}

// sum_{k>=0} (-1)^k C(n,r) C(n-r,k) T_{r+k} == C(n,r) sum_{j>J} p^r (1-p)^{n-r}
ValB fixed_tail_series_r(double n, int r, TailMoments& T) {
  long double base = 1.0L;
  for (int i = 1; i <= r; ++i) base *= static_cast<long double>(n - i + 1) / i;
  long double coef = base;  // C(n,r) C(n-r,k)
  long double acc = 0.0L;
  double peak = 0.0;
  const int kmax = static_cast<int>(std::min<double>(n - r, kSeriesCap));
  for (int k = 0; k <= kmax; ++k) {
    if (k > 0) coef *= static_cast<long double>(n - r - k + 1) / k;
    const double tk = T(r + k);
    if (tk == 0.0) break;
    const double term = static_cast<double>(coef * tk);
    peak = std::max(peak, std::fabs(term));
    acc += (k % 2 ? -1.0L : 1.0L) * term;
    if (std::fabs(term) < 1e-17 * (std::fabs(static_cast<double>(acc)) + 1e-300) && k > 2) break;
  }
  return {static_cast<double>(acc), 1e-16 * peak};
}

// sum_{k>=1} (-1)^{k-1} t^k T_k / k! == sum_{j>J} (1 - e^{-t p_j})
ValB poisson_tail_series(double t, TailMoments& T) {
  long double coef = 1.0L;
  long double acc = 0.0L;
  double peak = 0.0;
  for (int k = 1; k <= kSeriesCap; ++k) {
    coef *= static_cast<long double>(t) / k;
    const double tk = T(k);
    if (tk == 0.0) break;
    const double term = static_cast<double>(coef * tk);
    peak = std::max(peak, std::fabs(term));
    acc += (k % 2 ? 1.0L : -1.0L) * term;
    if (std::fabs(term) < 1e-17 * (std::fabs(static_cast<double>(acc)) + 1e-300) && k > 2) break;
  }
  return {static_cast<double>(acc), 1e-16 * peak};
}

// (t^r/r!) sum_{j>J} p^r e^{-t p} == sum_{k>=0} (-1)^k t^{r+k} T_{r+k} / (r! k!)
ValB poisson_tail_series_r(double t, int r, TailMoments& T) {
  long double base = 1.0L;
  for (int i = 1; i <= r; ++i) base *= static_cast<long double>(t) / i;
  long double coef = base;
  long double acc = 0.0L;
  double peak = 0.0;
  for (int k = 0; k <= kSeriesCap; ++k) {
    if (k > 0) coef *= static_cast<long double>(t) / k;
    const double tk = T(r + k);
    if (tk == 0.0) break;
    const double term = static_cast<double>(coef * tk);
    peak = std::max(peak, std::fabs(term));
    acc += (k % 2 ? -1.0L : 1.0L) * term;
    if (std::fabs(term) < 1e-17 * (std::fabs(static_cast<double>(acc)) + 1e-300) && k > 2) break;
  }
  return {static_cast<double>(acc), 1e-16 * peak};
}

ValB phi_fixed_vb(const FrequencyModel& m, std::uint64_t n) {
  require_normalized(m);
  if (n == 0) throw ParameterError("phi_fixed: need n >= 1");
  const double dn = static_cast<double>(n);
  Head h = select_head(m, dn, 200000);
  KahanSum head;
  for (const auto& a : h.atoms) {
    head.add(static_cast<double>(a.count) * -std::expm1(dn * std::log1p(-a.p)));
  }
  TailMoments T(m, h.J);
  ValB tail = fixed_tail_series(dn, T);
  return {head.value() + tail.v, tail.err};
}

ValB phi_fixed_r_vb(const FrequencyModel& m, std::uint64_t n, int r) {
  require_normalized(m);
  if (n == 0 || r < 1 || static_cast<std::uint64_t>(r) > n) {
    throw ParameterError("phi_fixed_r: need 1 <= r <= n");
  }
  const double dn = static_cast<double>(n);
  Head h = select_head(m, dn, 200000);
  const double lc = log_choose(dn, r);
  KahanSum head;
  for (const auto& a : h.atoms) {
    const double lq = (dn - r == 0.0) ? 0.0 : (dn - r) * std::log1p(-a.p);  // (1-p)^0 = 1
    head.add(static_cast<double>(a.count) * std::exp(lc + r * std::log(a.p) + lq));
  }
  TailMoments T(m, h.J);
  ValB tail = fixed_tail_series_r(dn, r, T);
  return {head.value() + tail.v, tail.err};
}

ValB phi_poisson_vb(const FrequencyModel& m, double t) {
  if (!(t >= 0.0)) throw ParameterError("phi_poisson: need t >= 0");
  if (t == 0.0) return {0.0, 0.0};
  Head h = select_head(m, t, 200000);
  KahanSum head;
  for (const auto& a : h.atoms) {
    head.add(static_cast<double>(a.count) * -std::expm1(-t * a.p));
  }
  TailMoments T(m, h.J);
  ValB tail = poisson_tail_series(t, T);
  return {head.value() + tail.v, tail.err};
}

ValB phi_poisson_r_vb(const FrequencyModel& m, double t, int r) {
  if (!(t >= 0.0)) throw ParameterError("phi_poisson_r: need t >= 0");
  if (r < 1) throw ParameterError("phi_poisson_r: need r >= 1");
  if (t == 0.0) return {0.0, 0.0};
  Head h = select_head(m, t, 200000);
  const double lgr = std::lgamma(r + 1.0);
  KahanSum head;
  for (const auto& a : h.atoms) {
    head.add(static_cast<double>(a.count) * std::exp(r * std::log(t * a.p) - lgr - t * a.p));
  }
  TailMoments T(m, h.J);
  ValB tail = poisson_tail_series_r(t, r, T);
  return {head.value() + tail.v, tail.err};
}

// Cross term of the fixed-n variance:
//   sum_{i != j} [(1-p_i-p_j)^n - (1-p_i)^n (1-p_j)^n].
ValB var_cross(const FrequencyModel& m, std::uint64_t n) {
  const double dn = static_cast<double>(n);
  Head h = select_head(m, dn, 2500);
  TailMoments T(m, h.J);

  auto g = [&](double p, double q) {
    // (1-p-q)^n - ((1-p)(1-q))^n, stable for nearly cancelling values
    const double lb = std::log1p(-p) + std::log1p(-q);
    const double rem = 1.0 - p - q;
    if (rem <= 0.0) return -std::exp(dn * lb);
    const double la = std::log1p(-p - q);
    return std::exp(dn * lb) * std::expm1(dn * (la - lb));
  };

  // head x head (ordered pairs, same-atom pairs removed)
  KahanSum hh;
  for (std::size_t a = 0; a < h.atoms.size(); ++a) {
    const double ma = static_cast<double>(h.atoms[a].count);
    const double pa = h.atoms[a].p;
    hh.add(ma * (ma - 1.0) * g(pa, pa));
    for (std::size_t b = a + 1; b < h.atoms.size(); ++b) {
      hh.add(2.0 * ma * static_cast<double>(h.atoms[b].count) * g(pa, h.atoms[b].p));
    }
  }

  // head x tail: 2 m_i A^n sum_{k>=1} (-1)^k C(n,k) T_k (A^{-k} - 1), A = 1-p_i
  KahanSum ht;
  double peak = 0.0;
  for (const auto& a : h.atoms) {
    const double lA = std::log1p(-a.p);
    const long double An = std::exp(static_cast<long double>(dn) * lA);
    if (An == 0.0L) continue;
    const long double Ainv = std::exp(static_cast<long double>(-lA));
    long double coef = 1.0L;  // C(n,k)
    long double Aik = 1.0L;   // A^{-k}
    long double acc = 0.0L;
    const int kmax = static_cast<int>(std::min<double>(dn, kSeriesCap));
    for (int k = 1; k <= kmax; ++k) {
      coef *= static_cast<long double>(dn - k + 1) / k;
      Aik *= Ainv;
      const double tk = T(k);
      if (tk == 0.0) break;
      const long double term = coef * tk * (Aik - 1.0L);
      acc += (k % 2 ? -1.0L : 1.0L) * term;
      const double mag = std::fabs(static_cast<double>(An * term));
      peak = std::max(peak, mag * 2.0 * static_cast<double>(a.count));
      if (std::fabs(static_cast<double>(term)) <
              1e-17 * (std::fabs(static_cast<double>(acc)) + 1e-300) &&
          k > 2) {
        break;
      }
    }
    ht.add(2.0 * static_cast<double>(a.count) * static_cast<double>(An * acc));
  }

  // tail x tail:
  //   sum_{k,l>=1} (-1)^{k+l} [C(n,k+l)C(k+l,k) - C(n,k)C(n,l)] (T_k T_l - T_{k+l})
  // the product part carries degree n in each variable, so the exact
  // finite sum runs to s = 2n
  const int K = static_cast<int>(std::min<double>(2.0 * dn, 60));
  std::vector<long double> cn(static_cast<std::size_t>(K) + 1, 1.0L);
  for (int k = 1; k <= K; ++k) {
    cn[static_cast<std::size_t>(k)] =
        cn[static_cast<std::size_t>(k - 1)] * static_cast<long double>(dn - k + 1) / k;
  }
  std::vector<std::vector<long double>> pas(static_cast<std::size_t>(K) + 1);
  for (int mm = 0; mm <= K; ++mm) {
    pas[static_cast<std::size_t>(mm)].assign(static_cast<std::size_t>(mm) + 1, 1.0L);
    for (int k = 1; k < mm; ++k) {
      pas[static_cast<std::size_t>(mm)][static_cast<std::size_t>(k)] =
          pas[static_cast<std::size_t>(mm - 1)][static_cast<std::size_t>(k - 1)] +
          pas[static_cast<std::size_t>(mm - 1)][static_cast<std::size_t>(k)];
    }
  }
  long double tt = 0.0L;
  for (int s = 2; s <= K; ++s) {
    long double band = 0.0L;
    for (int k = 1; k <= s - 1; ++k) {
      const int l = s - k;
      if (l < k) break;
      const long double coeff =
          cn[static_cast<std::size_t>(s)] * pas[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] -
          cn[static_cast<std::size_t>(k)] * cn[static_cast<std::size_t>(l)];
      const long double pair = static_cast<long double>(T(k)) * T(l) - T(s);
      long double term = coeff * pair;
      if (l > k) term *= 2.0L;
      band += term;
      peak = std::max(peak, std::fabs(static_cast<double>(term)));
    }
    tt += (s % 2 ? -1.0L : 1.0L) * band;
    if (std::fabs(static_cast<double>(band)) <
        1e-18 * (std::fabs(static_cast<double>(tt)) + 1e-300)) {
      break;
    }
  }

  return {hh.value() + ht.value() + static_cast<double>(tt), 1e-16 * peak};
}

// Cross term of Var K_{n,r}:
//   C(n,r) sum_{i != j} p_i^r p_j^r [C(n-r,r)(1-p_i-p_j)^{n-2r}
//                                    - C(n,r)(1-p_i)^{n-r}(1-p_j)^{n-r}]
ValB var_cross_r(const FrequencyModel& m, std::uint64_t n, int r) {
  const double dn = static_cast<double>(n);
  Head h = select_head(m, dn, 2500);
  TailMoments T(m, h.J);
  const double lcnr = log_choose(dn, r);
  const double lcnr2 = log_choose(dn - r, r);  // -inf when 2r > n

  // a * b with the convention 0 * (-inf) = 0 (zero exponent kills the term)
  auto xlog = [](double a, double b) { return a == 0.0 ? 0.0 : a * b; };

  auto stable_diff = [](double e1, double e2) {
    // exp(e1) - exp(e2) without overflow of intermediate scale
    if (e1 == -std::numeric_limits<double>::infinity()) return -std::exp(e2);
    if (e2 == -std::numeric_limits<double>::infinity()) return std::exp(e1);
    if (e1 >= e2) return std::exp(e1) * -std::expm1(e2 - e1) + 0.0;
    return -std::exp(e2) * -std::expm1(e1 - e2);
  };

  KahanSum hh;
  auto pair_term = [&](double p, double q) {
    const double base = lcnr + r * (std::log(p) + std::log(q));
    const double rem = 1.0 - p - q;
    double e1 = -std::numeric_limits<double>::infinity();
    if (lcnr2 > -std::numeric_limits<double>::infinity()) {
      if (dn - 2 * r == 0.0) {
        e1 = base + lcnr2;  // (1-p-q)^0 = 1 even at p+q = 1
      } else if (rem > 0.0) {
        e1 = base + lcnr2 + (dn - 2 * r) * std::log1p(-p - q);
      }
    }
    const double e2 = base + lcnr + xlog(dn - r, std::log1p(-p) + std::log1p(-q));
    return stable_diff(e1, e2);
  };
  for (std::size_t a = 0; a < h.atoms.size(); ++a) {
    const double ma = static_cast<double>(h.atoms[a].count);
    const double pa = h.atoms[a].p;
    hh.add(ma * (ma - 1.0) * pair_term(pa, pa));
    for (std::size_t b = a + 1; b < h.atoms.size(); ++b) {
      hh.add(2.0 * ma * static_cast<double>(h.atoms[b].count) * pair_term(pa, h.atoms[b].p));
    }
  }

  // head x tail, expanded in the tail frequency
  KahanSum ht;
  double peak = 0.0;
  const int kmax = static_cast<int>(std::min<double>(dn, kSeriesCap));
  for (const auto& a : h.atoms) {
    const double lA = std::log1p(-a.p);
    const double lp = std::log(a.p);
    // F1 = C(n,r) C(n-r,r) p^r A^{n-2r};  F2 = C(n,r)^2 p^r A^{n-r}
    const long double F1 =
        lcnr2 > -std::numeric_limits<double>::infinity()
            ? std::exp(static_cast<long double>(lcnr + lcnr2 + r * lp + xlog(dn - 2 * r, lA)))
            : 0.0L;
    const long double F2 = std::exp(static_cast<long double>(2.0 * lcnr + r * lp + xlog(dn - r, lA)));
    if (F1 == 0.0L && F2 == 0.0L) continue;
    const long double Ainv = std::exp(static_cast<long double>(-lA));
    long double c1 = 1.0L;  // C(n-2r,k) A^{-k}
    long double c2 = 1.0L;  // C(n-r,k)
    long double acc = 0.0L;
    for (int k = 0; k <= kmax; ++k) {
      if (k > 0) {
        c1 *= static_cast<long double>(dn - 2 * r - k + 1) / k * Ainv;
        c2 *= static_cast<long double>(dn - r - k + 1) / k;
      }
      const double tk = T(r + k);
      if (tk == 0.0) break;
      const long double term = (F1 * c1 - F2 * c2) * tk;
      acc += (k % 2 ? -1.0L : 1.0L) * term;
      peak = std::max(peak, 2.0 * static_cast<double>(a.count) *
                                std::fabs(static_cast<double>(term)));
      if (std::fabs(static_cast<double>(term)) <
              1e-17 * (std::fabs(static_cast<double>(acc)) + 1e-300) &&
          k > 2) {
        break;
      }
    }
    ht.add(2.0 * static_cast<double>(a.count) * static_cast<double>(acc));
  }

  // tail x tail; the product part has degree n - r per variable
  const int K = static_cast<int>(std::min<double>(2.0 * std::max(dn - r, 0.0), 50));
  const long double Cnr = std::exp(static_cast<long double>(lcnr));
  const long double Cnr2 =
      lcnr2 > -std::numeric_limits<double>::infinity() ? std::exp(static_cast<long double>(lcnr2))
                                                       : 0.0L;
  std::vector<long double> cn1(static_cast<std::size_t>(K) + 1, 1.0L);  // C(n-2r, s)
  std::vector<long double> cn2(static_cast<std::size_t>(K) + 1, 1.0L);  // C(n-r, s)
  for (int k = 1; k <= K; ++k) {
    cn1[static_cast<std::size_t>(k)] =
        cn1[static_cast<std::size_t>(k - 1)] * static_cast<long double>(dn - 2 * r - k + 1) / k;
    cn2[static_cast<std::size_t>(k)] =
        cn2[static_cast<std::size_t>(k - 1)] * static_cast<long double>(dn - r - k + 1) / k;
  }
  std::vector<std::vector<long double>> pas(static_cast<std::size_t>(K) + 1);
  for (int mm = 0; mm <= K; ++mm) {
    pas[static_cast<std::size_t>(mm)].assign(static_cast<std::size_t>(mm) + 1, 1.0L);
    for (int k = 1; k < mm; ++k) {
      pas[static_cast<std::size_t>(mm)][static_cast<std::size_t>(k)] =
          pas[static_cast<std::size_t>(mm - 1)][static_cast<std::size_t>(k - 1)] +
          pas[static_cast<std::size_t>(mm - 1)][static_cast<std::size_t>(k)];
    }
  }
  long double tt = 0.0L;
  for (int s = 0; s <= K; ++s) {
    long double band = 0.0L;
    for (int k = 0; k <= s; ++k) {
      const int l = s - k;
      if (l < k) break;
      const long double coeff =
          Cnr * (Cnr2 * cn1[static_cast<std::size_t>(s)] *
                     pas[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] -
                 Cnr * cn2[static_cast<std::size_t>(k)] * cn2[static_cast<std::size_t>(l)]);
      const long double pair = static_cast<long double>(T(r + k)) * T(r + l) - T(2 * r + s);
      long double term = coeff * pair;
      if (l > k) term *= 2.0L;
      band += term;
      peak = std::max(peak, std::fabs(static_cast<double>(term)));
    }
    tt += (s % 2 ? -1.0L : 1.0L) * band;
    if (s > 2 && std::fabs(static_cast<double>(band)) <
                     1e-18 * (std::fabs(static_cast<double>(tt)) + 1e-300)) {
      break;
    }
  }

  return {hh.value() + ht.value() + static_cast<double>(tt), 1e-16 * peak};
}

}  // namespace

double phi_fixed(const FrequencyModel& m, std::uint64_t n) { return phi_fixed_vb(m, n).v; }

double phi_fixed_r(const FrequencyModel& m, std::uint64_t n, int r) {
  return phi_fixed_r_vb(m, n, r).v;
}

double var_fixed(const FrequencyModel& m, std::uint64_t n) {
  require_normalized(m);
  if (n == 0) throw ParameterError("var_fixed: need n >= 1");
  const double base = phi_fixed_vb(m, 2 * n).v - phi_fixed_vb(m, n).v;
  return base + var_cross(m, n).v;
}

double var_fixed_r(const FrequencyModel& m, std::uint64_t n, int r) {
  require_normalized(m);
  if (n == 0 || r < 1 || static_cast<std::uint64_t>(r) > n) {
    throw ParameterError("var_fixed_r: need 1 <= r <= n");
  }
  const double dn = static_cast<double>(n);
  const double ratio = std::exp(2.0 * log_choose(dn, r) - log_choose(2.0 * dn, 2 * r));
  const double base = phi_fixed_r_vb(m, n, r).v - ratio * phi_fixed_r_vb(m, 2 * n, 2 * r).v;
  return base + var_cross_r(m, n, r).v;
}

double expected_unseen(const FrequencyModel& m, std::uint64_t n) {
  require_normalized(m);
  const double dn = static_cast<double>(n);
  Head h = select_head(m, dn, 200000);
  KahanSum head;
  for (const auto& a : h.atoms) {
    head.add(static_cast<double>(a.count) * a.p * std::exp(dn * std::log1p(-a.p)));
  }
  // sum_{j>J} p (1-p)^n = sum_{k>=0} (-1)^k C(n,k) T_{k+1}
  TailMoments T(m, h.J);
  long double coef = 1.0L;
  long double acc = 0.0L;
  const int kmax = static_cast<int>(std::min<double>(dn, kSeriesCap));
  for (int k = 0; k <= kmax; ++k) {
    if (k > 0) coef *= static_cast<long double>(dn - k + 1) / k;
    const double tk = T(k + 1);
    if (tk == 0.0) break;
    const long double term = coef * tk;
    acc += (k % 2 ? -1.0L : 1.0L) * term;
    if (std::fabs(static_cast<double>(term)) <
            1e-17 * (std::fabs(static_cast<double>(acc)) + 1e-300) &&
        k > 2) {
      break;
    }
  }
  return head.value() + static_cast<double>(acc);
}

double phi_poisson(const FrequencyModel& m, double t) { return phi_poisson_vb(m, t).v; }

double phi_poisson_r(const FrequencyModel& m, double t, int r) {
  return phi_poisson_r_vb(m, t, r).v;
}

double var_poisson(const FrequencyModel& m, double t) {
  return phi_poisson_vb(m, 2.0 * t).v - phi_poisson_vb(m, t).v;
}

double var_poisson_r(const FrequencyModel& m, double t, int r) {
  const double c = std::exp(log_choose(2.0 * r, r) - 2.0 * r * std::log(2.0));
  return phi_poisson_r_vb(m, t, r).v - c * phi_poisson_r_vb(m, 2.0 * t, 2 * r).v;
}

double cov_poisson(const FrequencyModel& m, double t, int r, int s) {
  if (r < 1 || s < 1) throw ParameterError("cov_poisson: need r, s >= 1");
  if (r == s) return var_poisson_r(m, t, r);
  const double c = std::exp(log_choose(r + s, r) - (r + s) * std::log(2.0));
  return -c * phi_poisson_r_vb(m, 2.0 * t, r + s).v;
}

MomentReport moment_report(const FrequencyModel& m, double param, bool poisson,
                           const std::vector<int>& rs) {
  MomentReport rep;
  rep.poisson = poisson;
  rep.param = param;
  double err = 0.0;
  if (poisson) {
    ValB p = phi_poisson_vb(m, param);
    rep.phi = p.v;
    err = std::max(err, p.err);
    rep.var = var_poisson(m, param);
    for (int r : rs) {
      ValB pr = phi_poisson_r_vb(m, param, r);
      rep.phi_r[r] = pr.v;
      err = std::max(err, pr.err);
      rep.var_r[r] = var_poisson_r(m, param, r);
    }
    for (std::size_t i = 0; i < rs.size(); ++i) {
      for (std::size_t j = i + 1; j < rs.size(); ++j) {
        rep.cov[{rs[i], rs[j]}] = cov_poisson(m, param, rs[i], rs[j]);
      }
    }
  } else {
    const std::uint64_t n = static_cast<std::uint64_t>(param);
    ValB p = phi_fixed_vb(m, n);
    rep.phi = p.v;
    err = std::max(err, p.err);
    rep.var = var_fixed(m, n);
    for (int r : rs) {
      ValB pr = phi_fixed_r_vb(m, n, r);
      rep.phi_r[r] = pr.v;
      err = std::max(err, pr.err);
      rep.var_r[r] = var_fixed_r(m, n, r);
    }
  }
  rep.truncation_bound = err;
  return rep;
}

GapReport depoissonization_gap(const FrequencyModel& m, std::uint64_t n, int r_max) {
  require_normalized(m);
  if (n < 2) throw ParameterError("depoissonization_gap: need n >= 2");
  GapReport rep;
  rep.n = n;
  const double dn = static_cast<double>(n);
  const double phi_n = phi_fixed(m, n);
  const double phi_t = phi_poisson(m, dn);
  rep.phi_gap = std::fabs(phi_t - phi_n);
  rep.phi_bound = (2.0 / dn) * phi_poisson_r(m, dn, 2);
  rep.within = rep.phi_gap <= rep.phi_bound;
  for (int r = 1; r <= r_max; ++r) {
    const double gap = std::fabs(phi_poisson_r(m, dn, r) - phi_fixed_r(m, n, r));
    const double bound = (kDepoissonizationC / dn) *
                         std::max(phi_poisson_r(m, dn, r), phi_poisson_r(m, dn, r + 2));
    rep.phi_r_gap[r] = gap;
    rep.phi_r_bound[r] = bound;
    rep.within = rep.within && gap <= bound;
  }
  const double phi1 = phi_poisson_r(m, dn, 1);
  rep.var_gap = std::fabs(var_poisson(m, dn) - var_fixed(m, n));
  rep.var_bound = (kDepoissonizationC / dn) * std::max(phi1, phi1 * phi1);
  rep.within = rep.within && rep.var_gap <= rep.var_bound;
  return rep;
}

double poissonization_check(const FrequencyModel& m, double t, std::uint64_t n_max) {
  if (!(t >= 0.0)) throw ParameterError("poissonization_check: need t >= 0");
  if (t == 0.0) return std::fabs(phi_poisson(m, 0.0));
  require_normalized(m);
  KahanSum rhs;
  double w = std::exp(-t);
  KahanSum wsum;
  wsum.add(w);
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    w *= t / static_cast<double>(n);
    wsum.add(w);
    rhs.add(w * phi_fixed(m, n));
  }
  const double tail_mass = 1.0 - wsum.value();
  if (tail_mass * phi_fixed(m, n_max) > 1e-6) {
    throw ParameterError("poissonization_check: n_max too small for this t");
  }
  return std::fabs(phi_poisson(m, t) - rhs.value());
}

ExactDistribution exact_k_distribution(const FrequencyModel& m, std::uint64_t J,
                                       std::uint64_t n) {
  require_normalized(m);
  if (J == 0 || n == 0) throw ParameterError("exact_k_distribution: need J, n >= 1");
  if (!m.has_infinite_support()) J = std::min(J, m.atom_count());
  if (J * n * n > 10'000'000ull) {
    throw AccuracyError("exact_k_distribution: J*n^2 guard exceeded");
  }
  const std::size_t nn = static_cast<std::size_t>(n);
  // f[m][k] = P(first j boxes hold m balls and k of them are occupied)
  std::vector<std::vector<double>> f(nn + 1, std::vector<double>(nn + 2, 0.0));
  std::vector<std::vector<double>> g(nn + 1, std::vector<double>(nn + 2, 0.0));
  f[0][0] = 1.0;
  double cum = 0.0;
  for (std::uint64_t j = 1; j <= J; ++j) {
    const double pj = m.frequency(j);
    const double q = pj / (1.0 - cum);  // conditional thinning probability
    cum += pj;
    for (auto& row : g) std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t used = 0; used <= nn; ++used) {
      for (std::size_t k = 0; k <= used; ++k) {
        const double w0 = f[used][k];
        if (w0 == 0.0) continue;
        const double rest = static_cast<double>(nn - used);
        const double lq = std::log(q);
        const double l1q = std::log1p(-q);
        for (std::size_t x = 0; used + x <= nn; ++x) {
          double pb;
          if (q >= 1.0) {
            pb = (x == nn - used) ? 1.0 : 0.0;
          } else {
            pb = std::exp(log_choose(rest, static_cast<double>(x)) +
                          static_cast<double>(x) * lq + (rest - static_cast<double>(x)) * l1q);
          }
          g[used + x][k + (x > 0 ? 1 : 0)] += w0 * pb;
        }
      }
    }
    f.swap(g);
  }
  ExactDistribution d;
  d.n = n;
  d.pmf.assign(nn + 1, 0.0);
  for (std::size_t used = 0; used <= nn; ++used) {
    for (std::size_t k = 0; k <= nn; ++k) d.pmf[k] += f[used][k];
  }
  while (d.pmf.size() > 1 && d.pmf.back() == 0.0) d.pmf.pop_back();
  KahanSum mean, m2;
  for (std::size_t k = 0; k < d.pmf.size(); ++k) {
    mean.add(static_cast<double>(k) * d.pmf[k]);
    m2.add(static_cast<double>(k) * static_cast<double>(k) * d.pmf[k]);
  }
  d.mean = mean.value();
  d.variance = m2.value() - d.mean * d.mean;
  return d;
}

TauSolution solve_tau(const FrequencyModel& m, double t) {
  if (!(t > 0.0)) throw ParameterError("solve_tau: need t > 0");
  const double v = var_poisson(m, t);
  if (!(v > 1e-300)) throw AccuracyError("solve_tau: degenerate variance");
  auto f = [&](double tau) { return (t / tau) * phi_poisson_r(m, tau, 1) - v; };
  double lo = t, hi = 2.0 * t;
  for (int i = 0; i < 200 && (hi - lo) > 1e-10 * t; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  TauSolution s;
  s.t = t;
  s.tau = 0.5 * (lo + hi);
  s.residual = std::fabs(f(s.tau));
  return s;
}

VarianceDiagnosis diagnose_variance(const FrequencyModel& m, int depth) {
  if (depth < 4) throw ParameterError("diagnose_variance: need depth >= 4");
  VarianceDiagnosis d;
  const bool finite = !m.has_infinite_support();
  const std::uint64_t atoms = finite ? m.atom_count() : kNoAtom;

  // (i) grad nu(x) at x = 2^-m
  for (int mm = 1; mm <= depth; ++mm) {
    d.grad_nu_grid.push_back(static_cast<double>(m.delta_nu(std::exp2(-mm))));
  }
  {
    // judge on the second half of the grid; small x = p_1-scale edge effects
    const std::size_t from = d.grad_nu_grid.size() / 2;
    const double first = d.grad_nu_grid[from];
    const double last = d.grad_nu_grid.back();
    double mx = first, mn = first;
    for (std::size_t i = from; i < d.grad_nu_grid.size(); ++i) {
      mx = std::max(mx, d.grad_nu_grid[i]);
      mn = std::min(mn, d.grad_nu_grid[i]);
    }
    if (last >= 8.0 && last >= 4.0 * std::max(1.0, first)) {
      d.grad_nu = Verdict::kHoldsOnGrid;
    } else if (mx - mn <= std::max(2.0, 0.3 * mx) && last <= first + 2.0) {
      d.grad_nu = Verdict::kFailsOnGrid;
    }
  }

  // (ii) p_{j+k}/p_j over a late window; also Prop 8 / Prop 9 candidates
  const std::uint64_t j0 = static_cast<std::uint64_t>(std::max(depth, 64));
  const int kmax = std::min(depth, 12);
  std::vector<double> ratio_max(static_cast<std::size_t>(kmax), 0.0);
  bool window_ok = !finite || atoms > j0 + static_cast<std::uint64_t>(kmax) + 1;
  if (window_ok) {
    const std::uint64_t jhi = finite ? std::min(2 * j0, atoms - static_cast<std::uint64_t>(kmax))
                                     : 2 * j0;
    for (int k = 1; k <= kmax; ++k) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (std::uint64_t j = j0; j <= jhi; ++j) {
        const double r = m.frequency(j + static_cast<std::uint64_t>(k)) / m.frequency(j);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      d.ratio_grid.push_back(lo);
      ratio_max[static_cast<std::size_t>(k - 1)] = hi;
    }
    bool all_ge = true, some_lt = false;
    for (int k = 1; k <= kmax; ++k) {
      if (d.ratio_grid[static_cast<std::size_t>(k - 1)] < 0.5 - 1e-12) all_ge = false;
      if (ratio_max[static_cast<std::size_t>(k - 1)] < 0.5 - 1e-12) some_lt = true;
    }
    if (all_ge && d.ratio_grid[0] >= 0.8) {
      d.ratio_liminf = Verdict::kHoldsOnGrid;  // consecutive ratio near 1 covers all k
    } else if (some_lt) {
      d.ratio_liminf = Verdict::kFailsOnGrid;
    }
    for (int k = 1; k <= kmax; ++k) {
      if (std::fabs(d.ratio_grid[static_cast<std::size_t>(k - 1)] - 0.5) <= 0.02 &&
          std::fabs(ratio_max[static_cast<std::size_t>(k - 1)] - 0.5) <= 0.02) {
        d.limit_candidate_k = k;
        break;
      }
    }
    for (int k = 1; k <= kmax; ++k) {
      bool ok = true;
      const std::uint64_t upto = finite ? atoms - static_cast<std::uint64_t>(k) : 2 * j0;
      for (std::uint64_t j = 1; j <= upto; ++j) {
        if (m.frequency(j + static_cast<std::uint64_t>(k)) / m.frequency(j) > 0.5 + 1e-12) {
          ok = false;
          break;
        }
      }
      if (ok) {
        d.bound_candidate_k = k;
        break;
      }
    }
  }

  // (iii) p_j / sum_{i>=j} p_i at j = 2^i
  for (std::uint64_t j = 1; !finite || j <= atoms; j *= 2) {
    const double p = m.frequency(j);
    const double tail = m.tail_sum(j - 1);
    if (!(p > 0.0) || !(tail > 0.0)) break;  // underflowed past the usable range
    d.hazard_grid.push_back(p / tail);
    if (d.hazard_grid.size() >= static_cast<std::size_t>(depth)) break;
  }
  if (d.hazard_grid.size() >= 3) {
    const double first = d.hazard_grid.front();
    const double last = d.hazard_grid.back();
    double mn = first;
    for (double v : d.hazard_grid) mn = std::min(mn, v);
    if (last <= 0.5 * first && last <= 0.02) {
      d.hazard = Verdict::kHoldsOnGrid;
    } else if (mn >= 0.05 && last >= 0.8 * first) {
      d.hazard = Verdict::kFailsOnGrid;
    }
  }

  d.variance_diverges = d.grad_nu == Verdict::kHoldsOnGrid ||
                        d.ratio_liminf == Verdict::kHoldsOnGrid ||
                        d.hazard == Verdict::kHoldsOnGrid;
  return d;
}

}  // namespace occupancy
