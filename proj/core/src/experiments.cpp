#include "occupancy/experiments.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "occupancy/asymptotics.hpp"
#include "occupancy/model_literal.hpp"
#include "occupancy/rng.hpp"
#include "occupancy/sampler.hpp"
#include "occupancy/stats.hpp"

namespace occupancy {

namespace {

FrequencyModel load_model(const ExperimentConfig& config, double balls) {
  FrequencyModel m = parse_model_literal(config.model);
  if (m.kind() == ModelKind::kStickBreaking && balls > 0) {
    // realize enough atoms that residual hits are rare during sampling
    m.ensure_residual_below(std::max(1e-12, 0.01 / balls));
  }
  return m;
}

std::uint64_t ball_count(const ExperimentConfig& config) {
  if (!(config.n >= 1.0) || config.n > 1e12) {
    throw ParameterError("experiment: need 1 <= n <= 1e12");
  }
  return static_cast<std::uint64_t>(config.n);
}

StatCheck mean_check(const std::string& name, std::span<const double> xs, double exact,
                     double z_crit) {
  const SampleMoments m = sample_moments(xs);
  StatCheck c;
  c.name = name;
  c.empirical = m.mean;
  c.exact_value = exact;
  c.se = std::sqrt(m.variance / static_cast<double>(m.count));
  c.z = c.se > 0.0 ? (c.empirical - exact) / c.se : (c.empirical == exact ? 0.0 : INFINITY);
  c.pass = std::abs(c.z) <= z_crit || std::abs(c.empirical - exact) < 1e-12;
  return c;
}

StatCheck variance_check(std::span<const double> xs, double exact, double z_crit) {
  const SampleMoments m = sample_moments(xs);
  // delta-method standard error of the sample variance via the central
  // fourth moment
  KahanSum m4;
  for (double x : xs) {
    const double d = x - m.mean;
    m4.add(d * d * d * d);
  }
  const double M = static_cast<double>(m.count);
  const double mu4 = m4.value() / M;
  StatCheck c;
  c.name = "Var[K]";
  c.empirical = m.variance;
  c.exact_value = exact;
  c.se = std::sqrt(std::max(0.0, mu4 - m.variance * m.variance) / M);
  c.z = c.se > 0.0 ? (c.empirical - exact) / c.se : (c.empirical == exact ? 0.0 : INFINITY);
  c.pass = std::abs(c.z) <= z_crit || std::abs(c.empirical - exact) < 1e-12;
  return c;
}

std::unordered_map<std::string, std::string> literal_params(const std::string& literal) {
  std::unordered_map<std::string, std::string> kv;
  const auto colon = literal.find(':');
  if (colon == std::string::npos) return kv;
  std::string body = literal.substr(colon + 1);
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto comma = body.find(',', pos);
    if (comma == std::string::npos) comma = body.size();
    const std::string item = body.substr(pos, comma - pos);
    const auto eq = item.find('=');
    if (eq != std::string::npos) kv[item.substr(0, eq)] = item.substr(eq + 1);
    pos = comma + 1;
  }
  return kv;
}

}  // namespace

void parallel_for(std::uint64_t count, int workers,
                  const std::function<void(std::uint64_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = static_cast<int>(std::min<std::uint64_t>(workers, count));
  pool.reserve(nthreads);
  for (int w = 0; w < nthreads; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = nlohmann::json{{"experiment", c.experiment}, {"model", c.model},   {"n", c.n},
                     {"grid", c.grid},             {"reps", c.reps},     {"seed", c.seed},
                     {"r_max", c.r_max},           {"workers", c.workers}, {"k", c.k},
                     {"z_crit", c.z_crit},         {"skew_tol", c.skew_tol},
                     {"kurt_tol", c.kurt_tol},     {"out", c.out},       {"format", c.format}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  ExperimentConfig d;
  c.experiment = j.value("experiment", d.experiment);
  c.model = j.value("model", d.model);
  c.n = j.value("n", d.n);
  c.grid = j.value("grid", d.grid);
  c.reps = j.value("reps", d.reps);
  c.seed = j.value("seed", d.seed);
  c.r_max = j.value("r_max", d.r_max);
  c.workers = j.value("workers", d.workers);
  c.k = j.value("k", d.k);
  c.z_crit = j.value("z_crit", d.z_crit);
  c.skew_tol = j.value("skew_tol", d.skew_tol);
  c.kurt_tol = j.value("kurt_tol", d.kurt_tol);
  c.out = j.value("out", d.out);
  c.format = j.value("format", d.format);
}

static void to_json(nlohmann::json& j, const StatCheck& c) {
  j = nlohmann::json{{"name", c.name},       {"empirical", c.empirical},
                     {"exact", c.exact_value}, {"se", c.se},
                     {"z", c.z},             {"pass", c.pass}};
}

void to_json(nlohmann::json& j, const ReplicationSummary& s) {
  j = nlohmann::json{{"config", s.config},
                     {"checks", s.checks},
                     {"skewness", s.skewness},
                     {"excess_kurtosis", s.excess_kurtosis},
                     {"ad_statistic", s.ad_statistic},
                     {"normality_tested", s.normality_tested},
                     {"exploratory", s.exploratory},
                     {"pass", s.pass}};
}

ReplicationSummary mc_vs_exact(const ExperimentConfig& config) {
  if (config.reps < 1) throw ParameterError("mc_vs_exact: need reps >= 1");
  const std::uint64_t n = ball_count(config);
  const FrequencyModel model = load_model(config, config.n);
  const std::uint64_t M = config.reps;
  const int r_max = std::max(1, config.r_max);

  std::vector<double> ks(M), ss(M);
  std::vector<std::vector<double>> krs(r_max, std::vector<double>(M));
  parallel_for(M, config.workers, [&](std::uint64_t i) {
    Rng rng = Rng::stream(config.seed, i + 1);
    const OccupancyState st = run_fixed(model, n, rng);
    ks[i] = static_cast<double>(st.K);
    ss[i] = st.S;
    for (int r = 1; r <= r_max; ++r) krs[r - 1][i] = static_cast<double>(st.k_r(r));
  });

  ReplicationSummary out;
  out.config = config;
  out.checks.push_back(mean_check("E[K]", ks, phi_fixed(model, n), config.z_crit));
  out.checks.push_back(variance_check(ks, var_fixed(model, n), config.z_crit));
  for (int r = 1; r <= r_max; ++r) {
    out.checks.push_back(mean_check("E[K_" + std::to_string(r) + "]", krs[r - 1],
                                    phi_fixed_r(model, n, r), config.z_crit));
  }
  out.checks.push_back(mean_check("E[S]", ss, expected_unseen(model, n), config.z_crit));
  for (const StatCheck& c : out.checks) out.pass = out.pass && c.pass;
  return out;
}

ReplicationSummary clt_experiment(const ExperimentConfig& config) {
  if (config.reps < 2) throw ParameterError("clt_experiment: need reps >= 2");
  const std::uint64_t n = ball_count(config);
  const FrequencyModel model = load_model(config, config.n);
  const VarianceDiagnosis diag = diagnose_variance(model, 20);
  const double center = phi_poisson(model, static_cast<double>(n));
  const double V = var_poisson(model, static_cast<double>(n));
  if (!(V > 1e-9)) throw AccuracyError("clt_experiment: degenerate variance");
  const double scale = std::sqrt(V);

  std::vector<double> zs(config.reps);
  parallel_for(config.reps, config.workers, [&](std::uint64_t i) {
    Rng rng = Rng::stream(config.seed, i + 1);
    const OccupancyState st = run_fixed(model, n, rng);
    zs[i] = (static_cast<double>(st.K) - center) / scale;
  });

  ReplicationSummary out;
  out.config = config;
  out.exploratory = !diag.variance_diverges;
  const SampleMoments m = sample_moments(zs);
  out.skewness = m.skewness;
  out.excess_kurtosis = m.excess_kurtosis;
  out.ad_statistic = anderson_darling_adjusted(zs);
  out.normality_tested = !out.exploratory;
  const bool normal = out.ad_statistic < kAndersonDarling1pcCritical &&
                      std::abs(out.skewness) <= config.skew_tol &&
                      std::abs(out.excess_kurtosis) <= config.kurt_tol;
  StatCheck c;
  c.name = "AD";
  c.empirical = out.ad_statistic;
  c.exact_value = kAndersonDarling1pcCritical;
  c.pass = out.exploratory || normal;
  out.checks.push_back(c);
  out.pass = c.pass;
  return out;
}

void to_json(nlohmann::json& j, const TraceReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const TraceRow& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"K", row.K},
                    {"phi", row.phi},
                    {"k_over_phi", row.k_over_phi},
                    {"k_normalized", row.k_normalized},
                    {"k1_normalized", row.k1_normalized},
                    {"S", row.S},
                    {"S_pred", row.S_pred}});
  }
  nlohmann::json disc = nlohmann::json::array();
  for (const DiscoveryRow& row : r.discovery) {
    disc.push_back({{"k", row.k}, {"R", row.R}, {"R_pred", row.R_pred}});
  }
  j = nlohmann::json{{"config", r.config},
                     {"has_spec", r.has_spec},
                     {"rows", rows},
                     {"discovery", disc},
                     {"pass", r.pass}};
}

TraceReport strong_law_trace(const ExperimentConfig& config) {
  const std::uint64_t n_max = ball_count(config);
  const FrequencyModel model = load_model(config, config.n);
  if (!model.normalized()) throw SchemeError("strong_law_trace: model must be normalized");

  TraceReport out;
  out.config = config;
  RegularVariationSpec spec;
  try {
    spec = model_variation(model);
    out.has_spec = true;
  } catch (const UnsupportedError&) {
    out.has_spec = false;
  }

  std::vector<std::uint64_t> checkpoints;
  for (std::uint64_t c = 16; c < n_max; c *= 2) checkpoints.push_back(c);
  checkpoints.push_back(n_max);

  Rng rng = Rng::stream(config.seed, 1);
  const double mass = model.total_mass();
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  double seen = 0.0;
  std::uint64_t balls = 0;
  for (std::uint64_t cp : checkpoints) {
    for (; balls < cp; ++balls) {
      const std::uint64_t j = model.index_at_mass(rng.uniform01() * mass);
      auto [it, fresh] = counts.try_emplace(j, 0);
      ++it->second;
      if (fresh) seen += j == kNoAtom ? model.residual_mass() : model.frequency(j);
    }
    TraceRow row;
    row.n = static_cast<double>(cp);
    row.K = static_cast<double>(counts.size());
    row.phi = phi_fixed(model, cp);
    row.k_over_phi = row.phi > 0.0 ? row.K / row.phi : 0.0;
    std::uint64_t k1 = 0;
    for (const auto& [j, c] : counts) k1 += c == 1;
    row.S = std::max(0.0, mass - seen);
    if (out.has_spec) {
      const double pred = predict_mean(spec, row.n, 0);
      const double pred1 = predict_mean(spec, row.n, 1);
      row.k_normalized = row.K / pred;
      row.k1_normalized = static_cast<double>(k1) / pred1;
      row.S_pred = predict_unseen(spec, row.n);
    }
    out.rows.push_back(row);
  }
  out.pass = out.rows.back().k_over_phi >= 0.9 && out.rows.back().k_over_phi <= 1.1;

  // discovery-time trace; only for models whose frequencies decay
  // polynomially, so the ball budget stays sane
  const bool traceable =
      model.kind() == ModelKind::kPowerLaw || model.kind() == ModelKind::kStickBreaking;
  if (traceable && config.k >= 1) {
    Rng drng = Rng::stream(config.seed, 2);
    std::unordered_set<std::uint64_t> seen_boxes;
    double remaining = mass;
    std::uint64_t next_record = 1;
    const std::uint64_t ball_cap = 200000000;
    for (std::uint64_t ball = 0; seen_boxes.size() < config.k && ball < ball_cap; ++ball) {
      const std::uint64_t j = model.index_at_mass(drng.uniform01() * mass);
      if (!seen_boxes.insert(j).second) continue;
      remaining -= j == kNoAtom ? model.residual_mass() : model.frequency(j);
      const std::uint64_t k = seen_boxes.size();
      if (k == next_record || k == config.k) {
        DiscoveryRow row;
        row.k = k;
        row.R = std::max(0.0, remaining);
        if (out.has_spec) row.R_pred = predict_residual(spec, static_cast<double>(k));
        out.discovery.push_back(row);
        while (next_record <= k) next_record *= 2;
      }
    }
  }
  return out;
}

static void to_json(nlohmann::json& j, const VarianceDiagnosis& d) {
  auto verdict = [](Verdict v) {
    switch (v) {
      case Verdict::kHoldsOnGrid: return "holds";
      case Verdict::kFailsOnGrid: return "fails";
      default: return "inconclusive";
    }
  };
  j = nlohmann::json{{"grad_nu", verdict(d.grad_nu)},
                     {"ratio_liminf", verdict(d.ratio_liminf)},
                     {"hazard", verdict(d.hazard)},
                     {"variance_diverges", d.variance_diverges},
                     {"limit_candidate_k", d.limit_candidate_k},
                     {"bound_candidate_k", d.bound_candidate_k}};
}

void to_json(nlohmann::json& j, const ScanReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ScanRow& row : r.rows) {
    rows.push_back({{"t", row.t}, {"V", row.V}, {"phi1", row.phi1}, {"phi2", row.phi2}});
  }
  nlohmann::json bands = nlohmann::json::array();
  for (const ScanBand& b : r.bands) {
    bands.push_back({{"t_lo", b.t_lo},
                     {"t_hi", b.t_hi},
                     {"v_min", b.v_min},
                     {"v_max", b.v_max},
                     {"phi1_min", b.phi1_min},
                     {"phi1_max", b.phi1_max},
                     {"phi2_min", b.phi2_min},
                     {"phi2_max", b.phi2_max}});
  }
  j = nlohmann::json{{"config", r.config},
                     {"rows", rows},
                     {"bands", bands},
                     {"diagnosis", r.diagnosis},
                     {"limit_deviation", r.limit_deviation},
                     {"pass", r.pass}};
}

ScanReport variance_scan(const ExperimentConfig& config) {
  const FrequencyModel model = parse_model_literal(config.model);
  std::vector<double> grid = config.grid;
  if (grid.empty()) {
    for (int i = 0; i <= 20; ++i) grid.push_back(std::pow(2.0, i));
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ParameterError("variance_scan: grid must increase");
  }
  ScanReport out;
  out.config = config;
  for (double t : grid) {
    ScanRow row;
    row.t = t;
    row.V = var_poisson(model, t);
    row.phi1 = phi_poisson_r(model, t, 1);
    row.phi2 = phi_poisson_r(model, t, 2);
    out.rows.push_back(row);
  }
  // oscillation summary over bands of four octaves
  std::map<int, ScanBand> bands;
  for (const ScanRow& row : out.rows) {
    const int b = static_cast<int>(std::floor(std::log2(std::max(row.t, 1.0)) / 4.0));
    auto [it, fresh] = bands.try_emplace(b);
    ScanBand& band = it->second;
    if (fresh) {
      band.t_lo = band.t_hi = row.t;
      band.v_min = band.v_max = row.V;
      band.phi1_min = band.phi1_max = row.phi1;
      band.phi2_min = band.phi2_max = row.phi2;
    } else {
      band.t_hi = row.t;
      band.v_min = std::min(band.v_min, row.V);
      band.v_max = std::max(band.v_max, row.V);
      band.phi1_min = std::min(band.phi1_min, row.phi1);
      band.phi1_max = std::max(band.phi1_max, row.phi1);
      band.phi2_min = std::min(band.phi2_min, row.phi2);
      band.phi2_max = std::max(band.phi2_max, row.phi2);
    }
  }
  for (const auto& [b, band] : bands) out.bands.push_back(band);
  out.diagnosis = diagnose_variance(model, 20);
  if (out.diagnosis.limit_candidate_k > 0) {
    out.limit_deviation = std::abs(out.rows.back().V - out.diagnosis.limit_candidate_k);
    if (out.rows.back().t >= 1e6 && out.limit_deviation > 0.05) out.pass = false;
  }
  return out;
}

void to_json(nlohmann::json& j, const PowerLawReport& r) {
  j = nlohmann::json{{"config", r.config},
                     {"alpha", r.alpha},
                     {"theta", r.theta},
                     {"d_hat", r.d_hat},
                     {"cross_sd", r.cross_sd},
                     {"within_sd", r.within_sd},
                     {"dispersion_ratio", r.dispersion_ratio},
                     {"cross_dominates", r.cross_dominates},
                     {"pass", r.pass}};
}

PowerLawReport power_law_experiment(const ExperimentConfig& config) {
  if (config.reps < 2) throw ParameterError("power_law_experiment: need reps >= 2");
  const std::uint64_t n = ball_count(config);
  const auto params = literal_params(config.model);
  const bool gem = config.model.rfind("gem:", 0) == 0;
  const bool deterministic = config.model.rfind("powerlaw:", 0) == 0;
  if (!gem && !deterministic) {
    throw ParameterError("power_law_experiment: needs a gem: or powerlaw: model");
  }
  PowerLawReport out;
  out.config = config;
  double alpha, theta = 0.0;
  std::uint64_t depth = 65536;
  if (gem) {
    alpha = std::stod(params.at("alpha"));
    theta = std::stod(params.at("theta"));
    if (auto it = params.find("depth"); it != params.end()) depth = std::stoull(it->second);
  } else {
    alpha = std::stod(params.at("alpha"));
  }
  out.alpha = alpha;
  out.theta = theta;

  const double denom = alpha > 0.0 ? std::pow(static_cast<double>(n), alpha)
                                   : std::log(static_cast<double>(n));
  const std::uint64_t M = config.reps;
  out.d_hat.assign(M, 0.0);
  parallel_for(M, config.workers, [&](std::uint64_t i) {
    FrequencyModel m = deterministic
                           ? parse_model_literal(config.model)
                           : FrequencyModel::stick_breaking(alpha, theta, config.seed + i, depth);
    if (m.kind() == ModelKind::kStickBreaking) m.ensure_residual_below(std::max(1e-12, 0.01 / static_cast<double>(n)));
    Rng rng = Rng::stream(config.seed, 0x10000 + i);
    const OccupancyState st = run_fixed(m, n, rng);
    out.d_hat[i] = static_cast<double>(st.K) / denom;
  });
  out.cross_sd = std::sqrt(sample_moments(out.d_hat).variance);

  FrequencyModel fixed = deterministic
                             ? parse_model_literal(config.model)
                             : FrequencyModel::stick_breaking(alpha, theta, config.seed, depth);
  if (fixed.kind() == ModelKind::kStickBreaking) {
    fixed.ensure_residual_below(std::max(1e-12, 0.01 / static_cast<double>(n)));
  }
  std::vector<double> within(M);
  parallel_for(M, config.workers, [&](std::uint64_t i) {
    Rng rng = Rng::stream(config.seed, 0x20000 + i);
    const OccupancyState st = run_fixed(fixed, n, rng);
    within[i] = static_cast<double>(st.K) / denom;
  });
  out.within_sd = std::sqrt(sample_moments(within).variance);
  out.dispersion_ratio = out.within_sd > 0.0 ? out.cross_sd / out.within_sd : INFINITY;
  out.cross_dominates = out.dispersion_ratio > 2.0;
  out.pass = (!gem || alpha == 0.0) ? true : out.cross_dominates;
  return out;
}

}  // namespace occupancy
