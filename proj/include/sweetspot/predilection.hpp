#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sweetspot/glm.hpp"
#include "sweetspot/trial_data.hpp"

namespace sweetspot {

// A patient together with their predilection score on the linear-predictor
// scale (log-odds for the logistic link).
struct ScoredPatient {
  size_t patient_index = 0;  // index into the source dataset
  std::string id;
  double score = 0.0;
  bool prevalidated = false;
  // Fold whose held-out model produced the score; unset for full-model scores.
  static constexpr size_t no_fold = static_cast<size_t>(-1);
  size_t fold = no_fold;
};

struct FoldPlan {
  size_t n_folds = 0;
  std::vector<size_t> assignment;  // fold index per control, in dataset order
  uint64_t seed = 0;

  void validate() const;  // balanced sizes, every control assigned a valid fold
};

// Uniformly random balanced partition of the controls, deterministic given
// the seed. Fold sizes differ by at most one.
FoldPlan make_fold_plan(size_t n_controls, size_t n_folds, uint64_t seed);

// Outcome-stratified variant: each outcome level is spread as evenly as
// possible across folds. Off by default; the plain plan matches the method.
FoldPlan make_stratified_fold_plan(const std::vector<double>& control_outcomes, size_t n_folds,
                                   uint64_t seed);

// Prevalidated control scores: for each fold, a model fitted on the other
// folds' controls scores the held-out fold. Output is in dataset control
// order. Fit errors are rethrown naming the offending fold.
std::vector<ScoredPatient> prevalidated_control_scores(const TrialDataset& ds,
                                                       const FoldPlan& plan, Link link,
                                                       double ridge);

struct TreatedScores {
  PredilectionModel model;  // fitted on all controls
  std::vector<ScoredPatient> scored;
};

// Full-control model plus treated-arm scores, in dataset treated order.
TreatedScores score_treated(const TrialDataset& ds, Link link, double ridge);

// External-model path: score the given patients with a pre-trained model
// (no fitting). Scores carry prevalidated = false.
std::vector<ScoredPatient> score_with_model(const TrialDataset& ds,
                                            const std::vector<size_t>& patient_indices,
                                            const PredilectionModel& model);

// Helper shared with the ablation arm that skips prevalidation: score the
// controls with the model trained on all controls (self included).
std::vector<ScoredPatient> full_model_control_scores(const TrialDataset& ds,
                                                     const PredilectionModel& model);

}  // namespace sweetspot
