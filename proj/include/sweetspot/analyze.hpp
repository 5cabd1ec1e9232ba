#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sweetspot/glm.hpp"
#include "sweetspot/inference.hpp"
#include "sweetspot/matching.hpp"
#include "sweetspot/predilection.hpp"
#include "sweetspot/scan.hpp"
#include "sweetspot/trial_data.hpp"

namespace sweetspot {

inline constexpr char kToolVersion[] = "1.0.0";
inline constexpr char kReportSchemaVersion[] = "1.0";

struct AnalysisConfig {
  Link link = Link::logistic;
  size_t n_folds = 10;
  bool prevalidate = true;
  bool stratified_folds = false;
  double ridge = 1e-6;
  size_t match_ratio = 1;
  ScanConstraints scan;
  size_t n_permutations = 1000;
  size_t n_bootstraps = 1000;
  PValueEstimator estimator = PValueEstimator::plugin;
  double alpha = 0.05;
  uint64_t seed = 0;
  size_t smoothing_window = 51;  // plot smoothing only; odd
  size_t n_threads = 0;          // 0 = hardware concurrency
  // External-model path: skip fitting and score both arms with this model.
  std::optional<PredilectionModel> external_model;

  void validate() const;
};

struct SweetSpotReport {
  std::string input_path;    // filled by the CLI layer
  std::string input_digest;  // ditto
  AnalysisConfig config;

  size_t n_patients = 0;
  size_t n_treated = 0;
  size_t n_controls = 0;
  OutcomeKind outcome_kind = OutcomeKind::binary;
  OutcomeDirection outcome_direction = OutcomeDirection::higher_is_worse;

  PredilectionModel model;
  bool external_model_used = false;
  FoldPlan fold_plan;  // empty assignment when prevalidation was not used
  std::vector<ScoredPatient> control_scores;
  std::vector<ScoredPatient> treated_scores;

  size_t n_sets = 0;
  size_t n_surplus_treated_dropped = 0;
  EffectSequence sequence;

  SweetSpotLocation location;
  PermutationResult permutation;
  DebiasResult debias;
  bool significant = false;
  std::array<double, 3> boot_i_quantiles{};  // 2.5 / 50 / 97.5 percentiles
  std::array<double, 3> boot_j_quantiles{};

  std::vector<std::string> warnings;
};

// Full pipeline: score, match, scan, calibrate, debias. Stage failures are
// rethrown with the stage name prefixed. A located-but-insignificant spot is
// a normal result, not an error.
SweetSpotReport analyze(const TrialDataset& ds, const AnalysisConfig& cfg);

// Versioned report JSON (schema-validated before emission).
std::string report_to_json(const SweetSpotReport& report);
void validate_report_json(const std::string& text);
void write_report_json(const SweetSpotReport& report, const std::string& path);

// Plot-data CSVs: smoothed effects by score, permutation null, bootstrap
// locations, in/out CATE segments, and scalar markers.
void emit_plot_data(const SweetSpotReport& report, const std::string& out_dir);

// Intermediate artifacts: fold assignment, per-arm scores, matched sets,
// effect sequence, and the fitted model.
void emit_intermediates(const SweetSpotReport& report, const std::string& out_dir);

}  // namespace sweetspot
