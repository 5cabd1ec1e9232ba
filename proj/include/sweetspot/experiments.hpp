#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sweetspot/analyze.hpp"
#include "sweetspot/trial_data.hpp"

namespace sweetspot {

struct ExperimentGrid {
  size_t n_trials_per_cell = 200;
  std::vector<double> extra_effect_grid = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> spot_fraction_grid = {0.1, 0.2, 0.3, 0.4, 0.5};
  double alpha = 0.05;
  NullSimConfig base_cfg;  // n=400, p=10, effect=0.05 by default
  size_t n_permutations = 500;
  size_t n_bootstraps = 200;
  bool prevalidation = true;
  size_t n_folds = 10;
  uint64_t master_seed = 0;
  size_t n_threads = 0;

  void validate() const;
};

struct CellSummary {
  double extra_effect = 0.0;
  double spot_fraction = 0.0;
  size_t n_trials = 0;
  size_t n_reject = 0;
  double rejection_rate = 0.0;
  double rejection_se = 0.0;  // sqrt(r(1-r)/m)
  double mean_tau_corrected = 0.0;
  bool has_jaccard = false;
  double mean_jaccard = 0.0;
  std::vector<double> p_values;       // per trial
  std::vector<double> tau_corrected;  // per trial
  std::vector<double> jaccard;        // per trial, power runs only
  size_t clamp_events = 0;
  size_t patients_simulated = 0;

  double clamp_fraction() const {
    return patients_simulated == 0
               ? 0.0
               : static_cast<double>(clamp_events) / static_cast<double>(patients_simulated);
  }
};

struct ExperimentSummary {
  std::string name;
  ExperimentGrid grid;
  std::vector<CellSummary> cells;
  // Wall-clock time; kept out of the serialized outputs so re-runs with the
  // same seed produce byte-identical files.
  double runtime_seconds = 0.0;
  std::vector<std::string> warnings;
};

// Type I error under the global null: every trial is simulated with no
// sweet spot, analyzed end to end, and judged at grid.alpha.
ExperimentSummary run_type1(const ExperimentGrid& grid);

// Power over the (extra_effect x spot_fraction) grid for the given spot
// shape. Also records ground-truth recovery (Jaccard overlap between the
// estimated in-spot patients and the true members).
ExperimentSummary run_power(const ExperimentGrid& grid, SpotDefinition spot_definition);

struct AblationArm {
  size_t n_covariates = 0;
  bool prevalidated = true;
  CellSummary cell;
};

struct AblationSummary {
  ExperimentGrid grid;
  std::vector<size_t> p_list;
  std::vector<AblationArm> arms;  // two per p: prevalidated, then not
  double runtime_seconds = 0.0;
  std::vector<std::string> warnings;
};

// Paired type-I comparison with and without prevalidation. Both arms at the
// same p analyze identical simulated trials, isolating the fold scheme.
AblationSummary run_prevalidation_ablation(const ExperimentGrid& grid,
                                           const std::vector<size_t>& p_list = {10, 100});

// Output writers. Summary JSON plus per-trial p-values and a tidy
// long-format CSV of per-cell metrics.
void write_experiment_json(const ExperimentSummary& s, const std::string& path);
void write_pvalues_csv(const ExperimentSummary& s, const std::string& path);
void write_tidy_csv(const ExperimentSummary& s, const std::string& path);

void write_ablation_json(const AblationSummary& s, const std::string& path);
void write_ablation_pvalues_csv(const AblationSummary& s, const std::string& path);

}  // namespace sweetspot
