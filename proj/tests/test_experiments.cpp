#include <doctest.h>

#include <cmath>

#include "occupancy/experiments.hpp"

using namespace occupancy;

TEST_CASE("config round trip") {
  ExperimentConfig c;
  c.experiment = "clt";
  c.model = "powerlaw:alpha=0.5";
  c.n = 12345;
  c.grid = {1.0, 10.0, 100.0};
  c.reps = 7;
  c.seed = 42;
  c.r_max = 3;
  c.workers = 4;
  c.k = 99;
  c.out = "/tmp/x.json";
  c.format = "csv";
  const nlohmann::json j = c;
  CHECK(j.get<ExperimentConfig>() == c);
  // defaults fill in for missing fields
  const auto partial = nlohmann::json{{"model", "geometric:q=0.3"}}.get<ExperimentConfig>();
  CHECK(partial.model == "geometric:q=0.3");
  CHECK(partial.reps == ExperimentConfig{}.reps);
}

TEST_CASE("mc_vs_exact two-box oracle") {
  ExperimentConfig c;
  c.model = "geometric:q=0.5";
  c.n = 100;
  c.reps = 800;
  c.seed = 7;
  c.workers = 2;
  const auto s = mc_vs_exact(c);
  CHECK(s.pass);
  REQUIRE(s.checks.size() >= 4);
  CHECK(s.checks[0].name == "E[K]");
  for (const auto& ch : s.checks) CHECK(std::abs(ch.z) <= c.z_crit);
}

TEST_CASE("worker count does not change the payload") {
  ExperimentConfig c;
  c.model = "geometric:q=0.5";
  c.n = 200;
  c.reps = 300;
  c.seed = 11;
  auto strip = [](ReplicationSummary s) {
    s.config.workers = 0;
    return nlohmann::json(s).dump();
  };
  c.workers = 1;
  const std::string one = strip(mc_vs_exact(c));
  c.workers = 4;
  const std::string four = strip(mc_vs_exact(c));
  c.workers = 8;
  const std::string eight = strip(mc_vs_exact(c));
  CHECK(one == four);
  CHECK(one == eight);
}

TEST_CASE("clt experiment guards") {
  ExperimentConfig c;
  c.model = "powerlaw:alpha=0.5";
  c.n = 1000;
  c.reps = 1;
  CHECK_THROWS_AS(clt_experiment(c), ParameterError);
  // bounded-variance model is labeled exploratory, not failed
  c.model = "geometric:q=0.5";
  c.reps = 50;
  c.seed = 3;
  const auto r = clt_experiment(c);
  CHECK(r.exploratory);
  CHECK(!r.normality_tested);
  CHECK(r.pass);
}

TEST_CASE("strong law trace") {
  ExperimentConfig c;
  c.model = "powerlaw:alpha=0.5";
  c.n = 50000;
  c.k = 64;
  c.seed = 3;
  const auto t = strong_law_trace(c);
  CHECK(t.has_spec);
  REQUIRE(!t.rows.empty());
  CHECK(t.rows.back().n == doctest::Approx(50000));
  CHECK(t.rows.back().k_over_phi == doctest::Approx(1.0).epsilon(0.1));
  CHECK(t.pass);
  REQUIRE(!t.discovery.empty());
  const auto& d = t.discovery.back();
  CHECK(d.k == 64);
  CHECK(d.R / d.R_pred == doctest::Approx(1.0).epsilon(0.5));
  // finite model saturates: K/J = K_n/Phi_n once every box is seen
  ExperimentConfig f;
  f.model = "explicit:inline";
  f.model = "geometric:q=0.5";
  f.n = 4096;
  f.seed = 9;
  const auto tf = strong_law_trace(f);
  CHECK(!tf.has_spec);
  CHECK(tf.rows.back().k_over_phi == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("variance scan") {
  ExperimentConfig c;
  c.model = "geometric:q=0.5";
  c.grid = {1e2, 1e4, 1e6};
  const auto s = variance_scan(c);
  REQUIRE(s.rows.size() == 3);
  CHECK(s.rows.back().V == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.diagnosis.limit_candidate_k == 1);
  CHECK(s.limit_deviation >= 0.0);
  CHECK(s.limit_deviation <= 0.05);
  CHECK(s.pass);
  CHECK(!s.bands.empty());
  ExperimentConfig bad;
  bad.grid = {10.0, 5.0};
  CHECK_THROWS_AS(variance_scan(bad), ParameterError);
}

TEST_CASE("power-law experiment on the deterministic model") {
  ExperimentConfig c;
  c.model = "powerlaw:alpha=0.5";
  c.n = 5000;
  c.reps = 20;
  c.seed = 2;
  c.workers = 4;
  const auto r = power_law_experiment(c);
  // D_hat concentrates near Gamma(1-a) c^a for fixed frequencies
  const double expected = std::tgamma(0.5) * std::sqrt(6.0 / (M_PI * M_PI));
  for (double d : r.d_hat) CHECK(d == doctest::Approx(expected).epsilon(0.15));
  CHECK(r.pass);
  ExperimentConfig bad;
  bad.model = "geometric:q=0.5";
  CHECK_THROWS_AS(power_law_experiment(bad), ParameterError);
}
