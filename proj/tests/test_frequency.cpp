#include <doctest.h>

#include <cmath>
#include <fstream>

#include "occupancy/frequency_model.hpp"
#include "occupancy/model_literal.hpp"

using namespace occupancy;

TEST_CASE("zeta spot checks") {
  CHECK(riemann_zeta(2.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-12));
  CHECK(riemann_zeta(4.0) == doctest::Approx(std::pow(M_PI, 4) / 90.0).epsilon(1e-12));
  // tail check against direct summation
  double direct = 0.0;
  for (int j = 50; j < 200000; ++j) direct += std::pow(j, -1.5);
  direct += 2.0 * std::pow(199999.5, -0.5);  // integral remainder
  CHECK(hurwitz_zeta_tail(1.5, 50) == doctest::Approx(direct).epsilon(1e-6));
}

TEST_CASE("geometric model basics") {
  const auto m = FrequencyModel::geometric(0.5);
  CHECK(m.normalized());
  CHECK(m.frequency(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.frequency(10) == doctest::Approx(std::pow(0.5, 10)).epsilon(1e-14));
  CHECK(m.cum_mass(3) == doctest::Approx(0.875).epsilon(1e-15));
  CHECK(m.tail_sum(3) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(m.tail_moment(2, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(m.tail_count(0.2) == 2);   // p1 = 0.5, p2 = 0.25 are >= 0.2
  CHECK(m.tail_count(0.25) == 2);  // boundary included
  CHECK(m.has_infinite_support());
  CHECK_THROWS_AS(FrequencyModel::geometric(1.0), ParameterError);
  CHECK_THROWS_AS(FrequencyModel::geometric(0.0), ParameterError);
}

TEST_CASE("power-law model basics") {
  const auto m = FrequencyModel::power_law(0.5);
  const double c = 1.0 / riemann_zeta(2.0);
  CHECK(m.normalized());
  CHECK(m.frequency(1) == doctest::Approx(c).epsilon(1e-14));
  CHECK(m.frequency(100) == doctest::Approx(c / 10000.0).epsilon(1e-14));
  // nu_bar(x) = floor((c/x)^alpha)
  CHECK(m.tail_count(c / 10000.0) == 100);
  CHECK(m.tail_moment(1, 10) == doctest::Approx(c * hurwitz_zeta_tail(2.0, 11)).epsilon(1e-13));
  double direct = 0.0;
  for (int j = 11; j < 100000; ++j) direct += std::pow(c, 2) * std::pow(j, -4.0);
  CHECK(m.tail_moment(2, 10) == doctest::Approx(direct).epsilon(1e-12));
  CHECK_THROWS_AS(FrequencyModel::power_law(1.0), ParameterError);
}

TEST_CASE("explicit model and residual semantics") {
  const auto m = FrequencyModel::from_frequencies({0.5, 0.3}, 0.2);
  CHECK(m.normalized());
  CHECK(m.atom_count() == 2);
  CHECK(m.residual_mass() == doctest::Approx(0.2));
  CHECK(m.tail_sum(2) == doctest::Approx(0.2));
  // residual acts as one virtual atom in tail moments
  CHECK(m.tail_moment(1, 2) == doctest::Approx(0.2));
  CHECK(m.tail_moment(2, 2) == doctest::Approx(0.04));
  CHECK(m.index_at_mass(0.1) == 1);
  CHECK(m.index_at_mass(0.6) == 2);
  CHECK(m.index_at_mass(0.9) == kNoAtom);
  CHECK_THROWS_AS(FrequencyModel::from_frequencies({0.3, 0.5}), ParameterError);
  CHECK_THROWS_AS(m.frequency(3), ParameterError);
}

TEST_CASE("block presets") {
  const auto ex11 = FrequencyModel::block_preset(BlockPreset::kEx11);
  CHECK(ex11.top_frequency() == doctest::Approx(0.25));  // 2^{-2^1}
  const auto ex10 = FrequencyModel::block_preset(BlockPreset::kEx10);
  CHECK(ex10.top_frequency() < 1.0);
  const auto ex12 = FrequencyModel::block_preset(BlockPreset::kEx12);
  CHECK(ex12.atom_count() > 100);  // huge multiplicities are grouped internally
}

TEST_CASE("stick breaking determinism and extension") {
  const auto a = FrequencyModel::stick_breaking(0.5, 1.0, 42, 256);
  const auto b = FrequencyModel::stick_breaking(0.5, 1.0, 42, 256);
  CHECK(a.atom_count() == b.atom_count());
  for (std::uint64_t j = 1; j <= a.atom_count(); j += 17) {
    CHECK(a.frequency(j) == b.frequency(j));
  }
  CHECK(a.normalized());
  CHECK(a.residual_mass() > 0.0);
  const double before = a.residual_mass();
  a.ensure_residual_below(before / 4.0);
  CHECK(a.residual_mass() <= before / 4.0);
  // extension is deterministic too: extending b the same way matches
  b.ensure_residual_below(before / 4.0);
  CHECK(a.atom_count() == b.atom_count());
  CHECK(a.frequency(a.atom_count()) == b.frequency(b.atom_count()));
  CHECK_THROWS_AS(FrequencyModel::stick_breaking(0.5, -0.6, 1, 8), ParameterError);
}

TEST_CASE("model literal round trips") {
  for (const char* lit : {"geometric:q=0.5", "powerlaw:alpha=0.25", "block:preset=ex11",
                          "gem:alpha=0.5,theta=1,seed=7,depth=64"}) {
    const auto m = parse_model_literal(lit);
    const auto again = parse_model_literal(m.describe());
    CHECK(m.total_mass() == doctest::Approx(again.total_mass()).epsilon(1e-15));
    CHECK(m.top_frequency() == doctest::Approx(again.top_frequency()).epsilon(1e-15));
  }
  CHECK_THROWS_AS(parse_model_literal("geometric"), ParameterError);
  CHECK_THROWS_AS(parse_model_literal("geometric:q=abc"), ParameterError);
  CHECK_THROWS_AS(parse_model_literal("block:file=/no/such/file"), ParameterError);
}

TEST_CASE("model literal files") {
  {
    std::ofstream f("/tmp/occ_test_block.json");
    f << R"([{"q": 0.25, "m": 2}, {"q": 0.125, "m": 4}])";
  }
  const auto blk = parse_model_literal("block:file=/tmp/occ_test_block.json");
  CHECK(blk.normalized());
  CHECK(blk.frequency(1) == doctest::Approx(0.25));
  CHECK(blk.frequency(3) == doctest::Approx(0.125));
  {
    std::ofstream f("/tmp/occ_test_explicit.txt");
    f << "# two boxes\n0.6\n0.4\n";
  }
  const auto ex = parse_model_literal("explicit:file=/tmp/occ_test_explicit.txt");
  CHECK(ex.atom_count() == 2);
  CHECK(ex.frequency(1) == doctest::Approx(0.6));
}
