#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "occupancy/frequency_model.hpp"
#include "occupancy/rng.hpp"

namespace occupancy {

/// One realization of the occupancy scheme. Storage is sparse: only
/// occupied boxes appear. The residual mass of a partially realized
/// model acts as a single virtual box with index kNoAtom, consistent
/// with how the moment engine treats the residual.
struct OccupancyState {
  std::uint64_t n = 0;  // ball count (realized Poisson count for run_poisson)
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  std::vector<std::uint64_t> discovery_order;  // box indices in first-hit order
  std::uint64_t K = 0;
  std::map<std::uint64_t, std::uint64_t> K_r;  // r -> #boxes with exactly r balls
  double S = 0.0;                              // unseen mass

  std::uint64_t k_r(std::uint64_t r) const {
    auto it = K_r.find(r);
    return it == K_r.end() ? 0 : it->second;
  }
};

/// Counts in nonincreasing order (the ranked view).
std::vector<std::uint64_t> ranked_counts(const OccupancyState& state);
/// Counts in the order the boxes were discovered.
std::vector<std::uint64_t> discovery_counts(const OccupancyState& state);

/// One ball: box index with probability p_j / total_mass, kNoAtom for
/// the residual virtual box.
std::uint64_t sample_box(const FrequencyModel& model, Rng& rng);

OccupancyState run_fixed(const FrequencyModel& model, std::uint64_t n, Rng& rng);
OccupancyState run_fixed(const FrequencyModel& model, std::uint64_t n, std::uint64_t seed);

/// Poisson scheme at time t: N ~ Poisson(t * total_mass), then N balls
/// from the normalized frequencies (the time-change reduction).
OccupancyState run_poisson(const FrequencyModel& model, double t, Rng& rng);
OccupancyState run_poisson(const FrequencyModel& model, double t, std::uint64_t seed);

struct DiscoveryRecord {
  std::vector<std::uint64_t> N;  // ball indices of discoveries
  std::vector<double> T;         // Poisson arrival times of discoveries
  std::vector<double> p_tilde;   // size-biased frequency sequence
  std::vector<double> R;         // residual tails R_k = total - sum_{i<=k} p_tilde_i
  std::vector<std::uint64_t> boxes;
};

/// Simulate until k_max distinct boxes have been discovered. Throws
/// DepthExhaustedError if the model runs out of discoverable boxes.
DiscoveryRecord discovery_process(const FrequencyModel& model, std::uint64_t k_max, Rng& rng);
DiscoveryRecord discovery_process(const FrequencyModel& model, std::uint64_t k_max,
                                  std::uint64_t seed);

enum class ArrangementView { kRanked, kDiscovery };

/// Exact probability of an occupancy arrangement, by enumeration of all
/// J^n ball-to-box allocations. Ranked view: the sorted nonzero counts
/// equal `counts` (which must be nonincreasing). Discovery view: counts
/// listed in first-hit order. Guards: J <= 6 boxes, n = sum counts <= 8.
double exact_arrangement_prob(const FrequencyModel& model, const std::vector<std::uint64_t>& counts,
                              ArrangementView view);

struct QuantileSets {
  std::vector<double> C;    // model-level set, sorted
  std::vector<double> C_n;  // empirical set, sorted
  double d_H = 0.0;
};

/// Quantile sets of Prop-27 type for a box order. `order` lists box
/// indices in increasing order; empty means the natural order 1,2,3,...
/// (supported for infinite models via truncation at tail mass eps).
QuantileSets quantile_sets(const FrequencyModel& model, const OccupancyState& state,
                           const std::vector<std::uint64_t>& order = {}, double trunc_eps = 1e-6);

}  // namespace occupancy
