#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "occupancy/asymptotics.hpp"
#include "occupancy/experiments.hpp"
#include "occupancy/model_literal.hpp"
#include "occupancy/moments.hpp"
#include "occupancy/sampler.hpp"

using nlohmann::json;
using namespace occupancy;

namespace {

struct Cli {
  ExperimentConfig config;
  std::string config_file;
  // predict-only knobs
  double alpha = 0.5;
  std::string ell = "1,0";
  double D = 0.0;
  bool poisson = false;
};

void emit(const json& doc, const ExperimentConfig& config) {
  std::string text;
  if (config.format == "csv") {
    // flat CSV: one key,value row per leaf, rows/checks expanded by index
    std::ostringstream os;
    os << "key,value\n";
    const json flat = doc.flatten();
    for (auto it = flat.begin(); it != flat.end(); ++it) {
      os << it.key() << ',' << (it->is_string() ? it->get<std::string>() : it->dump()) << '\n';
    }
    text = os.str();
  } else {
    text = doc.dump(2) + "\n";
  }
  if (config.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(config.out);
    if (!f) throw ParameterError("cannot write " + config.out);
    f << text;
  }
}

json run_moments(const Cli& cli) {
  const FrequencyModel model = parse_model_literal(cli.config.model);
  std::vector<int> rs;
  for (int r = 1; r <= cli.config.r_max; ++r) rs.push_back(r);
  const MomentReport rep = moment_report(model, cli.config.n, cli.poisson, rs);
  json j{{"model", model.describe()},
         {"poisson", rep.poisson},
         {"param", rep.param},
         {"phi", rep.phi},
         {"var", rep.var},
         {"truncation_bound", rep.truncation_bound},
         {"pass", true}};
  for (const auto& [r, v] : rep.phi_r) j["phi_r"][std::to_string(r)] = v;
  for (const auto& [r, v] : rep.var_r) j["var_r"][std::to_string(r)] = v;
  for (const auto& [rs_pair, v] : rep.cov) {
    j["cov"][std::to_string(rs_pair.first) + "," + std::to_string(rs_pair.second)] = v;
  }
  return j;
}

json run_simulate(const Cli& cli) {
  FrequencyModel model = parse_model_literal(cli.config.model);
  const auto n = static_cast<std::uint64_t>(cli.config.n);
  if (model.kind() == ModelKind::kStickBreaking) {
    model.ensure_residual_below(std::max(1e-12, 0.01 / std::max(1.0, cli.config.n)));
  }
  const OccupancyState st = run_fixed(model, n, cli.config.seed);
  json j{{"model", model.describe()}, {"n", st.n}, {"K", st.K}, {"S", st.S}, {"pass", true}};
  for (const auto& [r, c] : st.K_r) j["K_r"][std::to_string(r)] = c;
  auto ranked = ranked_counts(st);
  if (ranked.size() > 50) ranked.resize(50);
  j["top_counts"] = ranked;
  return j;
}

json run_predict(const Cli& cli) {
  SlowVariationSpec ell;
  if (std::sscanf(cli.ell.c_str(), "%lf,%lf", &ell.C, &ell.beta) < 1) {
    throw ParameterError("--ell expects 'C' or 'C,beta'");
  }
  const auto spec = RegularVariationSpec::make(cli.alpha, ell);
  json j{{"alpha", cli.alpha}, {"ell", {{"C", ell.C}, {"beta", ell.beta}}}, {"pass", true}};
  const double n = cli.config.n;
  const double k = static_cast<double>(cli.config.k);
  for (int r = 0; r <= cli.config.r_max; ++r) {
    j["mean"][std::to_string(r)] = predict_mean(spec, n, r);
  }
  if (spec.regime == Regime::kProper) {
    j["discovery_time"] = predict_discovery(spec, k);
    j["unseen_mass"] = predict_unseen(spec, n);
    j["residual"] = predict_residual(spec, k);
    j["ell_star"] = ell_star(spec, k);
    const LimitCovariance cov = limit_covariance(cli.alpha, std::max(1, cli.config.r_max));
    for (int r = 1; r <= cov.r_max; ++r) {
      for (int s = 1; s <= cov.r_max; ++s) {
        j["sigma"][std::to_string(r) + "," + std::to_string(s)] = cov.at(r, s);
      }
    }
    if (cli.D > 0.0) {
      const PowerLawPredictions p =
          power_law_predictions(cli.D, cli.alpha, n, k, std::max(1, cli.config.r_max));
      j["diversity"] = {{"D", p.D},
                        {"k_n", p.k_n},
                        {"k_nr", p.k_nr},
                        {"coeff_r", p.coeff_r},
                        {"nu_bar_coeff", p.nu_bar_coeff},
                        {"freq_coeff", p.freq_coeff},
                        {"p_j", p.p_j},
                        {"residual_k", p.residual_k}};
    }
  }
  return j;
}

json run_verify(const Cli& cli) {
  const ReplicationSummary mc = mc_vs_exact(cli.config);
  json j = mc;
  // built-in invariants at the configured n
  const FrequencyModel model = parse_model_literal(cli.config.model);
  const auto n = static_cast<std::uint64_t>(cli.config.n);
  const GapReport gap = depoissonization_gap(model, n, std::max(1, cli.config.r_max));
  j["depoissonization"] = {{"phi_gap", gap.phi_gap},
                           {"phi_bound", gap.phi_bound},
                           {"var_gap", gap.var_gap},
                           {"var_bound", gap.var_bound},
                           {"within", gap.within}};
  bool pass = mc.pass && gap.within;
  if (n <= 2000) {
    const double resid = poissonization_check(model, static_cast<double>(n), 4 * n + 200);
    j["poissonization_residual"] = resid;
    pass = pass && resid < 1e-8;
  }
  j["pass"] = pass;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"occupancy scheme toolkit"};
  app.require_subcommand(1);
  Cli cli;

  app.add_option("--config", cli.config_file, "JSON file mirroring the experiment config");
  auto* opt_model = app.add_option("--model", cli.config.model, "model literal");
  auto* opt_seed = app.add_option("--seed", cli.config.seed, "master seed");
  auto* opt_reps = app.add_option("--reps", cli.config.reps, "replications");
  auto* opt_out = app.add_option("--out", cli.config.out, "output path (default stdout)");
  auto* opt_format =
      app.add_option("--format", cli.config.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  auto* opt_n = app.add_option("--n", cli.config.n, "ball count / Poisson time");
  auto* opt_k = app.add_option("--k", cli.config.k, "discovery depth");
  auto* opt_rmax = app.add_option("--r-max", cli.config.r_max, "largest count index");
  auto* opt_workers = app.add_option("--workers", cli.config.workers, "worker threads");
  auto* opt_grid = app.add_option("--grid", cli.config.grid, "explicit t grid");

  auto* cmd_moments = app.add_subcommand("moments", "exact occupancy moments");
  cmd_moments->add_flag("--poisson", cli.poisson, "Poisson scheme at t = n");
  auto* cmd_simulate = app.add_subcommand("simulate", "one fixed-n realization");
  auto* cmd_predict = app.add_subcommand("predict", "asymptotic predictions");
  cmd_predict->add_option("--alpha", cli.alpha, "regular-variation index");
  cmd_predict->add_option("--ell", cli.ell, "slowly varying factor 'C,beta'");
  cmd_predict->add_option("--D", cli.D, "diversity constant");
  auto* cmd_verify = app.add_subcommand("verify", "Monte Carlo vs exact moments");
  auto* cmd_clt = app.add_subcommand("clt", "normality of standardized K_n");
  auto* cmd_trace = app.add_subcommand("trace", "single-trajectory strong-law trace");
  auto* cmd_scan = app.add_subcommand("scan-variance", "exact variance scan over a t grid");
  auto* cmd_power = app.add_subcommand("power-law", "diversity dispersion experiment");

  for (CLI::App* sub : {cmd_moments, cmd_simulate, cmd_predict, cmd_verify, cmd_clt, cmd_trace,
                        cmd_scan, cmd_power}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (!cli.config_file.empty()) {
      std::ifstream f(cli.config_file);
      if (!f) throw ParameterError("cannot open config " + cli.config_file);
      json doc;
      f >> doc;
      ExperimentConfig from_file = doc.get<ExperimentConfig>();
      // CLI flags override the file
      if (!*opt_model) cli.config.model = from_file.model;
      if (!*opt_seed) cli.config.seed = from_file.seed;
      if (!*opt_reps) cli.config.reps = from_file.reps;
      if (!*opt_out) cli.config.out = from_file.out;
      if (!*opt_format) cli.config.format = from_file.format;
      if (!*opt_n) cli.config.n = from_file.n;
      if (!*opt_k) cli.config.k = from_file.k;
      if (!*opt_rmax) cli.config.r_max = from_file.r_max;
      if (!*opt_workers) cli.config.workers = from_file.workers;
      if (!*opt_grid) cli.config.grid = from_file.grid;
      cli.config.z_crit = from_file.z_crit;
      cli.config.skew_tol = from_file.skew_tol;
      cli.config.kurt_tol = from_file.kurt_tol;
    }
    json report;
    if (*cmd_moments) {
      cli.config.experiment = "moments";
      report = run_moments(cli);
    } else if (*cmd_simulate) {
      cli.config.experiment = "simulate";
      report = run_simulate(cli);
    } else if (*cmd_predict) {
      cli.config.experiment = "predict";
      report = run_predict(cli);
    } else if (*cmd_verify) {
      cli.config.experiment = "verify";
      report = run_verify(cli);
    } else if (*cmd_clt) {
      cli.config.experiment = "clt";
      report = clt_experiment(cli.config);
    } else if (*cmd_trace) {
      cli.config.experiment = "trace";
      report = strong_law_trace(cli.config);
    } else if (*cmd_scan) {
      cli.config.experiment = "scan-variance";
      report = variance_scan(cli.config);
    } else if (*cmd_power) {
      cli.config.experiment = "power-law";
      report = power_law_experiment(cli.config);
    }
    emit(report, cli.config);
    return report.value("pass", true) ? 0 : 1;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
