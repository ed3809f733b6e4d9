#include "occupancy/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "occupancy/stats.hpp"

namespace occupancy {

namespace {

void finalize(const FrequencyModel& m, OccupancyState& s) {
  s.K = s.counts.size();
  s.K_r.clear();
  KahanSum seen;
  for (const auto& [j, c] : s.counts) {
    ++s.K_r[c];
    seen.add(j == kNoAtom ? m.residual_mass() : m.frequency(j));
  }
  s.S = m.total_mass() - seen.value();
  if (s.S < 0.0) s.S = 0.0;
}

std::uint64_t draw_box(const FrequencyModel& m, double mass, Rng& rng) {
  const double u = rng.uniform01() * mass;
  return m.index_at_mass(u);
}

}  // namespace

std::vector<std::uint64_t> ranked_counts(const OccupancyState& state) {
  std::vector<std::uint64_t> v;
  v.reserve(state.counts.size());
  for (const auto& [j, c] : state.counts) v.push_back(c);
  std::sort(v.begin(), v.end(), std::greater<std::uint64_t>());
  return v;
}

std::vector<std::uint64_t> discovery_counts(const OccupancyState& state) {
  std::vector<std::uint64_t> v;
  v.reserve(state.discovery_order.size());
  for (std::uint64_t j : state.discovery_order) v.push_back(state.counts.at(j));
  return v;
}

std::uint64_t sample_box(const FrequencyModel& model, Rng& rng) {
  if (!model.normalized()) throw SchemeError("sample_box: model must be normalized");
  const std::uint64_t j = draw_box(model, model.total_mass(), rng);
  if (j == kNoAtom && model.kind() != ModelKind::kStickBreaking) {
    throw DepthExhaustedError("sample_box: residual mass hit on a non-extensible model");
  }
  return j;
}

OccupancyState run_fixed(const FrequencyModel& model, std::uint64_t n, Rng& rng) {
  if (!model.normalized()) throw SchemeError("run_fixed: model must be normalized");
  if (n == 0) throw ParameterError("run_fixed: need n >= 1");
  OccupancyState s;
  s.n = n;
  const double mass = model.total_mass();
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t j = draw_box(model, mass, rng);
    auto [it, fresh] = s.counts.try_emplace(j, 0);
    ++it->second;
    if (fresh) s.discovery_order.push_back(j);
  }
  finalize(model, s);
  return s;
}

OccupancyState run_fixed(const FrequencyModel& model, std::uint64_t n, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 1);
  return run_fixed(model, n, rng);
}

OccupancyState run_poisson(const FrequencyModel& model, double t, Rng& rng) {
  if (!(t >= 0.0)) throw ParameterError("run_poisson: need t >= 0");
  const double mass = model.total_mass();
  const std::uint64_t n = rng.poisson(t * mass);
  if (n == 0) {
    OccupancyState s;
    s.S = mass;
    return s;
  }
  OccupancyState s;
  s.n = n;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t j = draw_box(model, mass, rng);
    auto [it, fresh] = s.counts.try_emplace(j, 0);
    ++it->second;
    if (fresh) s.discovery_order.push_back(j);
  }
  finalize(model, s);
  return s;
}

OccupancyState run_poisson(const FrequencyModel& model, double t, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 1);
  return run_poisson(model, t, rng);
}

DiscoveryRecord discovery_process(const FrequencyModel& model, std::uint64_t k_max, Rng& rng) {
  if (!model.normalized()) throw SchemeError("discovery_process: model must be normalized");
  if (k_max == 0) throw ParameterError("discovery_process: need k_max >= 1");
  DiscoveryRecord rec;
  std::unordered_map<std::uint64_t, bool> seen;
  const double mass = model.total_mass();
  double remaining = mass;
  double time = 0.0;
  std::uint64_t ball = 0;
  while (rec.N.size() < k_max) {
    if (!(remaining > 1e-14)) {
      throw DepthExhaustedError("discovery_process: no discoverable mass left");
    }
    ++ball;
    time += rng.exponential();
    const std::uint64_t j = draw_box(model, mass, rng);
    auto [it, fresh] = seen.try_emplace(j, true);
    (void)it;
    if (!fresh) continue;
    if (j == kNoAtom && rec.N.size() + 1 < k_max) {
      // the whole residual can only act as one box; further discoveries
      // would need atoms beyond the realized depth
      throw DepthExhaustedError("discovery_process: residual exhausted before k_max");
    }
    const double p = j == kNoAtom ? model.residual_mass() : model.frequency(j);
    remaining -= p;
    rec.N.push_back(ball);
    rec.T.push_back(time);
    rec.p_tilde.push_back(p);
    rec.R.push_back(remaining < 0.0 ? 0.0 : remaining);
    rec.boxes.push_back(j);
  }
  return rec;
}

DiscoveryRecord discovery_process(const FrequencyModel& model, std::uint64_t k_max,
                                  std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 1);
  return discovery_process(model, k_max, rng);
}

double exact_arrangement_prob(const FrequencyModel& model, const std::vector<std::uint64_t>& counts,
                              ArrangementView view) {
  if (model.has_infinite_support()) {
    throw UnsupportedError("exact_arrangement_prob: needs a small finite model");
  }
  if (model.residual_mass() > 1e-9) {
    throw UnsupportedError("exact_arrangement_prob: model residual must be negligible");
  }
  const std::uint64_t J = model.atom_count();
  std::uint64_t n = 0;
  for (std::uint64_t c : counts) {
    if (c == 0) throw ParameterError("exact_arrangement_prob: zero parts are excluded");
    n += c;
  }
  if (J > 6 || n > 8 || n == 0) {
    throw AccuracyError("exact_arrangement_prob: enumeration guard (J <= 6, n <= 8)");
  }
  if (view == ArrangementView::kRanked) {
    for (std::size_t i = 1; i < counts.size(); ++i) {
      if (counts[i] > counts[i - 1]) {
        throw ParameterError("exact_arrangement_prob: ranked counts must be nonincreasing");
      }
    }
  }
  std::vector<double> p(J);
  for (std::uint64_t j = 0; j < J; ++j) p[j] = model.frequency(j + 1);

  std::vector<std::uint64_t> alloc(n, 0);  // ball -> box
  KahanSum prob;
  std::vector<std::uint64_t> occ(J), order, arrangement;
  for (;;) {
    // evaluate this allocation
    std::fill(occ.begin(), occ.end(), 0);
    order.clear();
    double w = 1.0;
    for (std::uint64_t b = 0; b < n; ++b) {
      const std::uint64_t j = alloc[b];
      if (occ[j] == 0) order.push_back(j);
      ++occ[j];
      w *= p[j];
    }
    arrangement.clear();
    if (view == ArrangementView::kRanked) {
      for (std::uint64_t j = 0; j < J; ++j) {
        if (occ[j] > 0) arrangement.push_back(occ[j]);
      }
      std::sort(arrangement.begin(), arrangement.end(), std::greater<std::uint64_t>());
    } else {
      for (std::uint64_t j : order) arrangement.push_back(occ[j]);
    }
    if (arrangement == counts) prob.add(w);
    // odometer step
    std::uint64_t b = 0;
    while (b < n && ++alloc[b] == J) alloc[b++] = 0;
    if (b == n) break;
  }
  return prob.value();
}

QuantileSets quantile_sets(const FrequencyModel& model, const OccupancyState& state,
                           const std::vector<std::uint64_t>& order, double trunc_eps) {
  QuantileSets qs;
  const double mass = model.total_mass();
  if (order.empty()) {
    // natural order 1, 2, 3, ...
    qs.C.push_back(0.0);
    for (std::uint64_t j = 1;; ++j) {
      if (!model.has_infinite_support() && j > model.atom_count()) break;
      qs.C.push_back(model.cum_mass(j) / mass);
      if (model.tail_sum(j) <= trunc_eps * mass) break;
    }
    qs.C.push_back(1.0);

    std::vector<std::uint64_t> occupied;
    for (const auto& [j, c] : state.counts) occupied.push_back(j);
    std::sort(occupied.begin(), occupied.end());
    qs.C_n.push_back(0.0);
    std::uint64_t cum = 0;
    for (std::uint64_t j : occupied) {
      cum += state.counts.at(j);
      qs.C_n.push_back(static_cast<double>(cum) / static_cast<double>(state.n));
    }
  } else {
    qs.C.push_back(0.0);
    qs.C_n.push_back(0.0);
    double cum_p = 0.0;
    std::uint64_t cum_x = 0;
    for (std::uint64_t j : order) {
      cum_p += model.frequency(j) / mass;
      qs.C.push_back(cum_p);
      auto it = state.counts.find(j);
      cum_x += it == state.counts.end() ? 0 : it->second;
      qs.C_n.push_back(static_cast<double>(cum_x) / static_cast<double>(state.n));
    }
    qs.C.push_back(1.0);
  }
  std::sort(qs.C.begin(), qs.C.end());
  qs.C.erase(std::unique(qs.C.begin(), qs.C.end()), qs.C.end());
  std::sort(qs.C_n.begin(), qs.C_n.end());
  qs.C_n.erase(std::unique(qs.C_n.begin(), qs.C_n.end()), qs.C_n.end());
  qs.d_H = hausdorff_distance(qs.C, qs.C_n);
  return qs;
}

}  // namespace occupancy
