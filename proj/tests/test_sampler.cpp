#include <doctest.h>

#include <cmath>

#include "occupancy/moments.hpp"
#include "occupancy/sampler.hpp"
#include "occupancy/stats.hpp"

using namespace occupancy;

TEST_CASE("run_fixed is deterministic in the seed") {
  const auto m = FrequencyModel::geometric(0.5);
  const auto a = run_fixed(m, 1000, std::uint64_t{7});
  const auto b = run_fixed(m, 1000, std::uint64_t{7});
  CHECK(a.K == b.K);
  CHECK(a.S == b.S);
  CHECK(ranked_counts(a) == ranked_counts(b));
  const auto c = run_fixed(m, 1000, std::uint64_t{8});
  CHECK(ranked_counts(a) != ranked_counts(c));
}

TEST_CASE("occupancy state bookkeeping") {
  const auto m = FrequencyModel::from_frequencies({0.6, 0.4});
  const auto st = run_fixed(m, 50, std::uint64_t{3});
  CHECK(st.n == 50);
  CHECK(st.K == 2);
  std::uint64_t total = 0;
  for (const auto& [r, c] : st.K_r) total += r * c;
  CHECK(total == 50);
  CHECK(st.S == doctest::Approx(0.0));
}

TEST_CASE("empirical K matches exact law") {
  const auto m = FrequencyModel::from_frequencies({0.6, 0.4});
  const int M = 40000;
  int k2 = 0;
  for (int i = 0; i < M; ++i) k2 += run_fixed(m, 3, std::uint64_t(i + 1)).K == 2;
  const double frac = static_cast<double>(k2) / M;
  // exact P(K=2) = 0.72; 4 sigma band
  CHECK(std::abs(frac - 0.72) < 4.0 * std::sqrt(0.72 * 0.28 / M));
}

TEST_CASE("exact arrangement probabilities") {
  const auto m = FrequencyModel::from_frequencies({0.5, 0.3, 0.2});
  // ranked (2,1): all ways two balls share a box and one is elsewhere
  double ranked = exact_arrangement_prob(m, {2, 1}, ArrangementView::kRanked);
  double direct = 0.0;
  const double p[3] = {0.5, 0.3, 0.2};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a != b) direct += 3.0 * p[a] * p[a] * p[b];
    }
  }
  CHECK(ranked == doctest::Approx(direct).epsilon(1e-13));
  // discovery view is order sensitive
  const double d21 = exact_arrangement_prob(m, {2, 1}, ArrangementView::kDiscovery);
  const double d12 = exact_arrangement_prob(m, {1, 2}, ArrangementView::kDiscovery);
  CHECK(d21 + d12 == doctest::Approx(ranked).epsilon(1e-13));
  // all ranked arrangements of n = 3 sum to 1
  const double all = exact_arrangement_prob(m, {3}, ArrangementView::kRanked) + ranked +
                     exact_arrangement_prob(m, {1, 1, 1}, ArrangementView::kRanked);
  CHECK(all == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(exact_arrangement_prob(m, {1, 2}, ArrangementView::kRanked), ParameterError);
}

TEST_CASE("discovery process identities") {
  const auto m = FrequencyModel::geometric(0.5);
  Rng rng = Rng::stream(99, 1);
  const auto rec = discovery_process(m, 8, rng);
  REQUIRE(rec.N.size() == 8);
  // N and T strictly increase, R decreases by the discovered frequency
  double running = m.total_mass();
  for (std::size_t i = 0; i < rec.N.size(); ++i) {
    if (i > 0) {
      CHECK(rec.N[i] > rec.N[i - 1]);
      CHECK(rec.T[i] > rec.T[i - 1]);
    }
    running -= rec.p_tilde[i];
    CHECK(rec.R[i] == doctest::Approx(running).epsilon(1e-12));
  }
  // single box: only one discovery possible
  const auto one = FrequencyModel::from_frequencies({1.0});
  Rng rng2 = Rng::stream(1, 1);
  CHECK_THROWS_AS(discovery_process(one, 2, rng2), DepthExhaustedError);
}

TEST_CASE("quantile sets") {
  // finite uniform model: C = {0, 1/3, 2/3, 1}
  const auto m = FrequencyModel::from_frequencies({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const auto st = run_fixed(m, 300, std::uint64_t{5});
  const auto qs = quantile_sets(m, st);
  REQUIRE(qs.C.size() == 4);
  CHECK(qs.C[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(qs.d_H < 0.1);
  // hand oracle: Hausdorff between {0, 1/2, 1} and {0, 7/15, 1} is 1/30
  CHECK(hausdorff_distance(std::vector<double>{0.0, 0.5, 1.0},
                           std::vector<double>{0.0, 7.0 / 15, 1.0}) ==
        doctest::Approx(1.0 / 30).epsilon(1e-12));
}

TEST_CASE("poisson scheme ball count") {
  const auto m = FrequencyModel::geometric(0.5);
  double mean_n = 0.0;
  const int M = 2000;
  for (int i = 0; i < M; ++i) mean_n += static_cast<double>(run_poisson(m, 50.0, std::uint64_t(i + 1)).n);
  mean_n /= M;
  CHECK(std::abs(mean_n - 50.0) < 4.0 * std::sqrt(50.0 / M));
}
