#include <doctest.h>

#include <cmath>
#include <vector>

#include "occupancy/moments.hpp"

using namespace occupancy;

namespace {

// brute-force moments of K_n, K_{n,r} by enumerating all J^n allocations
struct BruteMoments {
  double mean_k = 0.0, var_k = 0.0;
  std::vector<double> mean_kr, var_kr;  // index r-1
  std::vector<double> pmf;              // law of K
};

BruteMoments brute_force(const std::vector<double>& p, int n, int r_max) {
  const int J = static_cast<int>(p.size());
  BruteMoments out;
  out.mean_kr.assign(r_max, 0.0);
  out.var_kr.assign(r_max, 0.0);
  out.pmf.assign(J + 1, 0.0);
  std::vector<double> ek2(1, 0.0);
  std::vector<double> ekr2(r_max, 0.0);
  std::vector<int> alloc(n, 0), occ(J);
  for (;;) {
    double w = 1.0;
    std::fill(occ.begin(), occ.end(), 0);
    for (int b = 0; b < n; ++b) {
      ++occ[alloc[b]];
      w *= p[alloc[b]];
    }
    int k = 0;
    std::vector<int> kr(r_max, 0);
    for (int j = 0; j < J; ++j) {
      if (occ[j] > 0) ++k;
      if (occ[j] >= 1 && occ[j] <= r_max) ++kr[occ[j] - 1];
    }
    out.mean_k += w * k;
    ek2[0] += w * k * k;
    out.pmf[k] += w;
    for (int r = 0; r < r_max; ++r) {
      out.mean_kr[r] += w * kr[r];
      ekr2[r] += w * kr[r] * kr[r];
    }
    int b = 0;
    while (b < n && ++alloc[b] == J) alloc[b++] = 0;
    if (b == n) break;
  }
  out.var_k = ek2[0] - out.mean_k * out.mean_k;
  for (int r = 0; r < r_max; ++r) out.var_kr[r] = ekr2[r] - out.mean_kr[r] * out.mean_kr[r];
  return out;
}

}  // namespace

TEST_CASE("fixed-n moments vs enumeration") {
  const std::vector<std::vector<double>> models = {
      {1.0}, {0.6, 0.4}, {0.5, 0.3, 0.2}, {0.4, 0.3, 0.2, 0.1}, {0.25, 0.25, 0.25, 0.25}};
  for (const auto& p : models) {
    const auto m = FrequencyModel::from_frequencies(std::vector<double>(p));
    for (int n = 1; n <= 6; ++n) {
      const auto bf = brute_force(p, n, std::min(3, n));
      CHECK(phi_fixed(m, n) == doctest::Approx(bf.mean_k).epsilon(1e-12));
      CHECK(var_fixed(m, n) == doctest::Approx(bf.var_k).scale(1.0).epsilon(1e-12));
      for (int r = 1; r <= std::min(3, n); ++r) {
        CHECK(phi_fixed_r(m, n, r) == doctest::Approx(bf.mean_kr[r - 1]).epsilon(1e-12));
        CHECK(var_fixed_r(m, n, r) ==
              doctest::Approx(bf.var_kr[r - 1]).scale(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("hand oracle: two boxes n = 3") {
  const auto m = FrequencyModel::from_frequencies({0.6, 0.4});
  CHECK(phi_fixed(m, 3) == doctest::Approx(1.72).epsilon(1e-14));
  CHECK(var_fixed(m, 3) == doctest::Approx(0.2016).epsilon(1e-12));
  const auto dist = exact_k_distribution(m, 2, 3);
  CHECK(dist.pmf[1] == doctest::Approx(0.28).epsilon(1e-14));
  CHECK(dist.pmf[2] == doctest::Approx(0.72).epsilon(1e-14));
  CHECK(dist.mean == doctest::Approx(1.72).epsilon(1e-13));
}

TEST_CASE("poisson moments: single box oracle") {
  const auto m = FrequencyModel::from_frequencies({1.0});
  const double t = 1.0;
  CHECK(phi_poisson(m, t) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(phi_poisson_r(m, t, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  // V(t) = Phi(2t) - Phi(t)
  CHECK(var_poisson(m, t) ==
        doctest::Approx(std::exp(-1.0) - std::exp(-2.0)).epsilon(1e-13));
  // cov(K_1, K_2) = -2^{-3} C(3,1) Phi_3(2t)
  const double phi3_2t = std::pow(2.0, 3) / 6.0 * std::exp(-2.0);
  CHECK(cov_poisson(m, t, 1, 2) == doctest::Approx(-3.0 / 8.0 * phi3_2t).epsilon(1e-13));
}

TEST_CASE("infinite-model identities") {
  const auto geo = FrequencyModel::geometric(0.5);
  const auto pl = FrequencyModel::power_law(0.5);
  for (const auto& m : {geo, pl}) {
    // Phi_n = sum_r Phi_{n,r} (every occupied box has some count)
    const std::uint64_t n = 30;
    double sum = 0.0;
    for (int r = 1; r <= 30; ++r) sum += phi_fixed_r(m, n, r);
    CHECK(sum == doctest::Approx(phi_fixed(m, n)).epsilon(1e-11));
    double psum = 0.0;
    for (int r = 1; r <= 60; ++r) psum += phi_poisson_r(m, 30.0, r);
    CHECK(psum == doctest::Approx(phi_poisson(m, 30.0)).epsilon(1e-11));
  }
  // geometric q=1/2: Phi_2 = sum_j (1 - (1-2^{-j})^2) = 5/3
  CHECK(phi_fixed(geo, 2) == doctest::Approx(5.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("depoissonization gaps within bounds") {
  for (const auto& m : {FrequencyModel::geometric(0.5), FrequencyModel::power_law(0.5)}) {
    for (std::uint64_t n : {100ull, 1000ull, 10000ull}) {
      const GapReport gap = depoissonization_gap(m, n, 2);
      CHECK(gap.within);
      CHECK(gap.phi_gap <= gap.phi_bound);
      CHECK(gap.var_gap <= gap.var_bound);
    }
  }
}

TEST_CASE("poissonization identity") {
  const auto m = FrequencyModel::geometric(0.5);
  CHECK(poissonization_check(m, 20.0, 300) < 1e-10);
  CHECK_THROWS_AS(poissonization_check(m, 100.0, 120), ParameterError);  // tail mass too large
}

TEST_CASE("solve_tau") {
  const auto one = FrequencyModel::from_frequencies({1.0});
  const TauSolution s = solve_tau(one, 1.0);
  CHECK(s.tau > 1.0);
  CHECK(s.tau < 2.0);
  CHECK(s.tau == doctest::Approx(1.45867).epsilon(1e-4));
  CHECK(std::abs(s.residual) < 1e-9);
  // defining identity V(t) = (t/tau) Phi_1(tau)
  const double lhs = var_poisson(one, 1.0);
  const double rhs = (1.0 / s.tau) * phi_poisson_r(one, s.tau, 1);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("variance divergence diagnosis") {
  // q = 2^{-1/3}: ratio p_{j+3}/p_j = 1/2 exactly, V -> 3
  const auto geo3 = FrequencyModel::geometric(std::pow(2.0, -1.0 / 3.0));
  const auto d3 = diagnose_variance(geo3, 20);
  CHECK(!d3.variance_diverges);
  CHECK(d3.limit_candidate_k == 3);
  CHECK(d3.bound_candidate_k == 3);
  // power law: all criteria point to divergence
  const auto pl = FrequencyModel::power_law(0.5);
  const auto dp = diagnose_variance(pl, 20);
  CHECK(dp.variance_diverges);
  CHECK(dp.ratio_liminf == Verdict::kHoldsOnGrid);
  CHECK(dp.hazard == Verdict::kHoldsOnGrid);
  CHECK(dp.limit_candidate_k == 0);
}

TEST_CASE("exact_k_distribution guard") {
  const auto pl = FrequencyModel::power_law(0.5);
  CHECK_THROWS_AS(exact_k_distribution(pl, 1000, 100000), AccuracyError);
}
