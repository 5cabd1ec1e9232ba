#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sweetspot {

enum class OutcomeKind { binary, continuous };
enum class OutcomeDirection { higher_is_worse, higher_is_better };

struct PatientRecord {
  std::string id;
  std::vector<double> covariates;
  bool treated = false;
  double outcome = 0.0;
};

struct TrialDataset {
  std::vector<PatientRecord> patients;
  OutcomeKind outcome_kind = OutcomeKind::binary;
  OutcomeDirection outcome_direction = OutcomeDirection::higher_is_worse;
  std::vector<std::string> covariate_names;

  size_t covariate_count() const { return covariate_names.size(); }
  size_t treated_count() const;
  size_t control_count() const;
  std::vector<size_t> treated_indices() const;
  std::vector<size_t> control_indices() const;

  // Throws ValidationError on any structural violation: mismatched covariate
  // lengths, non-finite values, non-{0,1} binary outcomes, or a missing arm.
  void validate() const;
};

struct NullSimConfig {
  size_t n_patients = 400;
  size_t n_covariates = 10;
  double treat_prob = 0.5;
  double base_treatment_effect = 0.05;
  double noise_sd = 1.0;
  uint64_t seed = 0;

  void validate() const;
};

enum class SpotDefinition { severity_quantile_band, covariate_region };

struct SweetSpotSimConfig {
  NullSimConfig base;
  double extra_effect = 0.3;
  double spot_fraction = 0.3;
  SpotDefinition spot_definition = SpotDefinition::severity_quantile_band;
  std::vector<size_t> region_covariates = {0, 1, 2};

  void validate() const;
};

// Ground truth retained alongside a simulated dataset.
struct SimTruth {
  std::vector<double> beta;
  std::vector<double> control_prob;   // outcome probability with no treatment shift
  std::vector<double> assigned_prob;  // probability actually used for the draw
  std::vector<uint8_t> in_spot;       // per-patient membership; empty for null sims
  size_t clamp_count = 0;             // probability draws clipped into [0, 1]
  std::vector<std::pair<double, double>> region_bounds;  // covariate_region only
};

struct SimulatedTrial {
  TrialDataset dataset;
  SimTruth truth;
};

// Synthetic generators. Bit-identical output for identical configs; every
// patient draws from its own counter-indexed substream. beta_override pins
// the outcome-model coefficients (testing hook).
SimulatedTrial simulate_null_trial(const NullSimConfig& cfg,
                                   const std::optional<std::vector<double>>& beta_override = {});
SimulatedTrial simulate_sweetspot_trial(
    const SweetSpotSimConfig& cfg,
    const std::optional<std::vector<double>>& beta_override = {});

// Column mapping for CSV ingestion. Empty covariate list plus
// covariates_rest=true means "every column not otherwise claimed".
struct CsvSchema {
  std::string treat_col = "treat";
  std::string outcome_col = "outcome";
  std::vector<std::string> covariate_cols;
  bool covariates_rest = true;
  std::string id_col;  // optional; row number is used when empty
  OutcomeDirection direction = OutcomeDirection::higher_is_worse;
};

// Dialect: comma-separated, required header row, UTF-8, '.' decimal point.
TrialDataset load_trial_csv(const std::string& path, const CsvSchema& schema);
void write_trial_csv(const TrialDataset& ds, const std::string& path);

// Ground-truth sidecar for synthetic datasets.
void write_sim_truth_json(const SimTruth& truth, const std::string& path);
SimTruth load_sim_truth_json(const std::string& path);

}  // namespace sweetspot
