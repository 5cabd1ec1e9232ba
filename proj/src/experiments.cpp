#include "sweetspot/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "sweetspot/error.hpp"
#include "sweetspot/parallel.hpp"
#include "sweetspot/util.hpp"

namespace sweetspot {

void ExperimentGrid::validate() const {
  if (n_trials_per_cell < 1) throw ValidationError("n_trials_per_cell must be >= 1");
  if (extra_effect_grid.empty()) throw ValidationError("extra_effect_grid is empty");
  if (spot_fraction_grid.empty()) throw ValidationError("spot_fraction_grid is empty");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha outside (0, 1)");
  base_cfg.validate();
  if (n_permutations < 1) throw ValidationError("n_permutations must be >= 1");
  if (n_bootstraps < 1) throw ValidationError("n_bootstraps must be >= 1");
  if (n_folds < 2) throw ValidationError("n_folds must be >= 2");
}

namespace {

struct TrialResult {
  double p_value = 1.0;
  double tau_corrected = 0.0;
  double jaccard = 0.0;
  size_t clamp_count = 0;
};

AnalysisConfig trial_analysis_config(const ExperimentGrid& grid, uint64_t trial_seed) {
  AnalysisConfig cfg;
  cfg.link = Link::logistic;
  cfg.n_folds = grid.n_folds;
  cfg.prevalidate = grid.prevalidation;
  cfg.n_permutations = grid.n_permutations;
  cfg.n_bootstraps = grid.n_bootstraps;
  cfg.alpha = grid.alpha;
  cfg.seed = trial_seed;
  cfg.n_threads = 1;  // trials are the parallel unit
  return cfg;
}

double spot_recovery_jaccard(const SweetSpotReport& report, const SimTruth& truth) {
  std::vector<uint8_t> estimated(truth.in_spot.size(), 0);
  for (size_t s = report.location.i_hat - 1; s < report.location.j_hat; ++s) {
    const MatchedSet& set = report.sequence.sets[s];
    estimated[set.treated_index] = 1;
    for (size_t c : set.control_indices) estimated[c] = 1;
  }
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < truth.in_spot.size(); ++i) {
    const bool a = estimated[i] != 0;
    const bool b = truth.in_spot[i] != 0;
    inter += (a && b) ? 1 : 0;
    uni += (a || b) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

TrialResult run_one_trial(const ExperimentGrid& grid, uint64_t trial_seed, double extra_effect,
                          double spot_fraction, SpotDefinition spot_definition,
                          bool want_jaccard) {
  SimulatedTrial trial;
  if (extra_effect == 0.0) {
    NullSimConfig cfg = grid.base_cfg;
    cfg.seed = trial_seed;
    trial = simulate_null_trial(cfg);
  } else {
    SweetSpotSimConfig cfg;
    cfg.base = grid.base_cfg;
    cfg.base.seed = trial_seed;
    cfg.extra_effect = extra_effect;
    cfg.spot_fraction = spot_fraction;
    cfg.spot_definition = spot_definition;
    trial = simulate_sweetspot_trial(cfg);
  }
  const SweetSpotReport report = analyze(trial.dataset, trial_analysis_config(grid, trial_seed));
  TrialResult r;
  r.p_value = report.permutation.p_value;
  r.tau_corrected = report.debias.tau_corrected;
  r.clamp_count = trial.truth.clamp_count;
  if (want_jaccard && !trial.truth.in_spot.empty()) {
    r.jaccard = spot_recovery_jaccard(report, trial.truth);
  }
  return r;
}

CellSummary run_cell(const ExperimentGrid& grid, const Rng& cell_stream, double extra_effect,
                     double spot_fraction, SpotDefinition spot_definition, bool want_jaccard) {
  const size_t m = grid.n_trials_per_cell;
  CellSummary cell;
  cell.extra_effect = extra_effect;
  cell.spot_fraction = spot_fraction;
  cell.n_trials = m;
  cell.p_values.resize(m);
  cell.tau_corrected.resize(m);
  cell.has_jaccard = want_jaccard;
  if (want_jaccard) cell.jaccard.resize(m);
  std::vector<size_t> clamp(m, 0);

  parallel_for(m, grid.n_threads, [&](size_t t) {
    const uint64_t trial_seed = cell_stream.derive_seed("trial", t);
    TrialResult r;
    try {
      r = run_one_trial(grid, trial_seed, extra_effect, spot_fraction, spot_definition,
                        want_jaccard);
    } catch (const std::runtime_error& e) {
      throw ValidationError("trial " + std::to_string(t) + " (seed " +
                            std::to_string(trial_seed) + "): " + e.what());
    }
    cell.p_values[t] = r.p_value;
    cell.tau_corrected[t] = r.tau_corrected;
    if (want_jaccard) cell.jaccard[t] = r.jaccard;
    clamp[t] = r.clamp_count;
  });

  for (double p : cell.p_values) {
    if (p < grid.alpha) ++cell.n_reject;
  }
  cell.rejection_rate = static_cast<double>(cell.n_reject) / static_cast<double>(m);
  cell.rejection_se =
      std::sqrt(cell.rejection_rate * (1.0 - cell.rejection_rate) / static_cast<double>(m));
  cell.mean_tau_corrected = mean(cell.tau_corrected);
  if (want_jaccard) cell.mean_jaccard = mean(cell.jaccard);
  for (size_t c : clamp) cell.clamp_events += c;
  cell.patients_simulated = m * grid.base_cfg.n_patients;
  return cell;
}

void warn_on_clamping(const CellSummary& cell, std::vector<std::string>& warnings) {
  if (cell.clamp_fraction() > 0.05) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "cell (extra_effect=%g, spot_fraction=%g): %.1f%% of simulated patients had "
                  "probabilities clamped at 0; effects sit near the probability boundary",
                  cell.extra_effect, cell.spot_fraction, 100.0 * cell.clamp_fraction());
    warnings.emplace_back(buf);
  }
}

}  // namespace

ExperimentSummary run_type1(const ExperimentGrid& grid) {
  grid.validate();
  for (double e : grid.extra_effect_grid) {
    if (e != 0.0) throw ValidationError("type-I experiment requires extra_effect_grid = {0}");
  }
  const auto start = std::chrono::steady_clock::now();
  ExperimentSummary summary;
  summary.name = "type1";
  summary.grid = grid;
  const Rng root(grid.master_seed);
  summary.cells.push_back(
      run_cell(grid, root.derive("cell", 0), 0.0, 0.0, SpotDefinition::severity_quantile_band,
               false));
  warn_on_clamping(summary.cells.back(), summary.warnings);
  summary.runtime_seconds = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count();
  return summary;
}

ExperimentSummary run_power(const ExperimentGrid& grid, SpotDefinition spot_definition) {
  grid.validate();
  for (double e : grid.extra_effect_grid) {
    if (!(e > 0.0)) throw ValidationError("power experiment requires extra_effect_grid > 0");
  }
  for (double f : grid.spot_fraction_grid) {
    if (!(f > 0.0 && f < 1.0)) throw ValidationError("spot_fraction_grid outside (0, 1)");
  }
  const auto start = std::chrono::steady_clock::now();
  ExperimentSummary summary;
  summary.name = spot_definition == SpotDefinition::severity_quantile_band ? "power"
                                                                           : "power-covariate";
  summary.grid = grid;
  const Rng root(grid.master_seed);
  size_t cell_index = 0;
  for (double f : grid.spot_fraction_grid) {
    for (double e : grid.extra_effect_grid) {
      summary.cells.push_back(
          run_cell(grid, root.derive("cell", cell_index), e, f, spot_definition, true));
      warn_on_clamping(summary.cells.back(), summary.warnings);
      ++cell_index;
    }
  }
  summary.runtime_seconds = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count();
  return summary;
}

AblationSummary run_prevalidation_ablation(const ExperimentGrid& grid,
                                           const std::vector<size_t>& p_list) {
  grid.validate();
  if (p_list.empty()) throw ValidationError("p_list is empty");
  const auto start = std::chrono::steady_clock::now();
  AblationSummary summary;
  summary.grid = grid;
  summary.p_list = p_list;
  const Rng root(grid.master_seed);
  for (size_t pi = 0; pi < p_list.size(); ++pi) {
    // Both arms at the same p see identical trials (same cell stream); only
    // the analysis differs, so the comparison is paired.
    const Rng cell_stream = root.derive("cell", pi);
    for (const bool preval : {true, false}) {
      ExperimentGrid arm_grid = grid;
      arm_grid.base_cfg.n_covariates = p_list[pi];
      arm_grid.prevalidation = preval;
      AblationArm arm;
      arm.n_covariates = p_list[pi];
      arm.prevalidated = preval;
      arm.cell = run_cell(arm_grid, cell_stream, 0.0, 0.0,
                          SpotDefinition::severity_quantile_band, false);
      warn_on_clamping(arm.cell, summary.warnings);
      summary.arms.push_back(std::move(arm));
    }
  }
  summary.runtime_seconds = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count();
  return summary;
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json grid_to_json(const ExperimentGrid& g) {
  ordered_json j;
  j["n_trials_per_cell"] = g.n_trials_per_cell;
  j["extra_effect_grid"] = g.extra_effect_grid;
  j["spot_fraction_grid"] = g.spot_fraction_grid;
  j["alpha"] = g.alpha;
  j["base"] = {{"n_patients", g.base_cfg.n_patients},
               {"n_covariates", g.base_cfg.n_covariates},
               {"treat_prob", g.base_cfg.treat_prob},
               {"base_treatment_effect", g.base_cfg.base_treatment_effect},
               {"noise_sd", g.base_cfg.noise_sd}};
  j["n_permutations"] = g.n_permutations;
  j["n_bootstraps"] = g.n_bootstraps;
  j["prevalidation"] = g.prevalidation;
  j["n_folds"] = g.n_folds;
  j["master_seed"] = g.master_seed;
  return j;
}

ordered_json cell_to_json(const CellSummary& c) {
  ordered_json j;
  j["extra_effect"] = c.extra_effect;
  j["spot_fraction"] = c.spot_fraction;
  j["n_trials"] = c.n_trials;
  j["n_reject"] = c.n_reject;
  j["rejection_rate"] = c.rejection_rate;
  j["rejection_se"] = c.rejection_se;
  j["mean_tau_corrected"] = c.mean_tau_corrected;
  j["mean_jaccard"] = c.has_jaccard ? ordered_json(c.mean_jaccard) : ordered_json(nullptr);
  j["clamp_fraction"] = c.clamp_fraction();
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace

void write_experiment_json(const ExperimentSummary& s, const std::string& path) {
  ordered_json j;
  j["name"] = s.name;
  j["grid"] = grid_to_json(s.grid);
  ordered_json cells = ordered_json::array();
  for (const auto& c : s.cells) cells.push_back(cell_to_json(c));
  j["cells"] = cells;
  j["warnings"] = s.warnings;
  write_text(path, j.dump(2) + "\n");
}

void write_pvalues_csv(const ExperimentSummary& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "extra_effect,spot_fraction,trial,p_value,tau_corrected";
  const bool jac = !s.cells.empty() && s.cells.front().has_jaccard;
  if (jac) out << ",jaccard";
  out << '\n';
  for (const auto& c : s.cells) {
    for (size_t t = 0; t < c.n_trials; ++t) {
      out << fmt(c.extra_effect) << ',' << fmt(c.spot_fraction) << ',' << t << ','
          << fmt(c.p_values[t]) << ',' << fmt(c.tau_corrected[t]);
      if (jac) out << ',' << fmt(c.has_jaccard ? c.jaccard[t] : 0.0);
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_tidy_csv(const ExperimentSummary& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "extra_effect,spot_fraction,metric,value\n";
  for (const auto& c : s.cells) {
    const auto row = [&](const char* metric, double value) {
      out << fmt(c.extra_effect) << ',' << fmt(c.spot_fraction) << ',' << metric << ','
          << fmt(value) << '\n';
    };
    row("rejection_rate", c.rejection_rate);
    row("rejection_se", c.rejection_se);
    row("mean_tau_corrected", c.mean_tau_corrected);
    if (c.has_jaccard) row("mean_jaccard", c.mean_jaccard);
    row("clamp_fraction", c.clamp_fraction());
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_ablation_json(const AblationSummary& s, const std::string& path) {
  ordered_json j;
  j["name"] = "preval-ablation";
  j["grid"] = grid_to_json(s.grid);
  j["p_list"] = s.p_list;
  ordered_json arms = ordered_json::array();
  for (const auto& a : s.arms) {
    ordered_json arm;
    arm["n_covariates"] = a.n_covariates;
    arm["prevalidated"] = a.prevalidated;
    arm["cell"] = cell_to_json(a.cell);
    arms.push_back(arm);
  }
  j["arms"] = arms;
  j["warnings"] = s.warnings;
  write_text(path, j.dump(2) + "\n");
}

void write_ablation_pvalues_csv(const AblationSummary& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "n_covariates,prevalidated,trial,p_value\n";
  for (const auto& a : s.arms) {
    for (size_t t = 0; t < a.cell.n_trials; ++t) {
      out << a.n_covariates << ',' << (a.prevalidated ? 1 : 0) << ',' << t << ','
          << fmt(a.cell.p_values[t]) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace sweetspot
