#include "sweetspot/predilection.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "sweetspot/error.hpp"
#include "sweetspot/rng.hpp"

namespace sweetspot {

void FoldPlan::validate() const {
  if (n_folds < 2) throw ValidationError("fold plan needs at least 2 folds");
  if (assignment.empty()) throw ValidationError("fold plan has no controls");
  std::vector<size_t> sizes(n_folds, 0);
  for (size_t f : assignment) {
    if (f >= n_folds) throw ValidationError("fold index out of range in fold plan");
    ++sizes[f];
  }
  const auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
  if (*mn == 0) throw ValidationError("fold plan has an empty fold");
  if (*mx - *mn > 1) throw ValidationError("fold sizes differ by more than one");
}

FoldPlan make_fold_plan(size_t n_controls, size_t n_folds, uint64_t seed) {
  if (n_folds < 2) throw ValidationError("n_folds must be >= 2");
  if (n_folds > n_controls) {
    throw ValidationError("n_folds (" + std::to_string(n_folds) + ") exceeds control count (" +
                          std::to_string(n_controls) + ")");
  }
  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.seed = seed;
  plan.assignment.resize(n_controls);
  // Balanced labels, then a uniform shuffle of who gets which label.
  for (size_t i = 0; i < n_controls; ++i) plan.assignment[i] = i % n_folds;
  Rng rng = Rng(seed).derive("folds");
  shuffle(plan.assignment, rng);
  return plan;
}

FoldPlan make_stratified_fold_plan(const std::vector<double>& control_outcomes, size_t n_folds,
                                   uint64_t seed) {
  const size_t n = control_outcomes.size();
  if (n_folds < 2) throw ValidationError("n_folds must be >= 2");
  if (n_folds > n) {
    throw ValidationError("n_folds (" + std::to_string(n_folds) + ") exceeds control count (" +
                          std::to_string(n) + ")");
  }
  // Group control positions by outcome level (ordered for determinism),
  // shuffle within each level, then deal round-robin across strata so every
  // level is spread as evenly as possible and fold sizes differ by <= 1.
  std::map<double, std::vector<size_t>> strata;
  for (size_t i = 0; i < n; ++i) strata[control_outcomes[i]].push_back(i);
  Rng rng = Rng(seed).derive("folds-stratified");
  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.seed = seed;
  plan.assignment.resize(n);
  size_t next_fold = rng.next_below(n_folds);
  size_t stratum_index = 0;
  for (auto& [outcome, members] : strata) {
    (void)outcome;
    Rng srng = rng.derive("stratum", stratum_index++);
    shuffle(members, srng);
    for (size_t pos : members) {
      plan.assignment[pos] = next_fold;
      next_fold = (next_fold + 1) % n_folds;
    }
  }
  return plan;
}

namespace {

std::vector<GlmRecord> records_for(const TrialDataset& ds, const std::vector<size_t>& indices) {
  std::vector<GlmRecord> recs;
  recs.reserve(indices.size());
  for (size_t idx : indices) {
    recs.push_back({ds.patients[idx].covariates, ds.patients[idx].outcome});
  }
  return recs;
}

}  // namespace

std::vector<ScoredPatient> prevalidated_control_scores(const TrialDataset& ds,
                                                       const FoldPlan& plan, Link link,
                                                       double ridge) {
  plan.validate();
  const std::vector<size_t> controls = ds.control_indices();
  if (plan.assignment.size() != controls.size()) {
    throw ContractError("fold plan covers " + std::to_string(plan.assignment.size()) +
                        " controls, dataset has " + std::to_string(controls.size()));
  }
  std::vector<ScoredPatient> out(controls.size());
  for (size_t f = 0; f < plan.n_folds; ++f) {
    std::vector<size_t> train_idx, held;
    for (size_t c = 0; c < controls.size(); ++c) {
      if (plan.assignment[c] == f) {
        held.push_back(c);
      } else {
        train_idx.push_back(controls[c]);
      }
    }
    PredilectionModel model;
    try {
      model = fit_glm(records_for(ds, train_idx), link, ridge);
    } catch (const DegenerateFitError& e) {
      throw DegenerateFitError("fold " + std::to_string(f) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("fold " + std::to_string(f) + ": " + e.what());
    }
    model.covariate_names = ds.covariate_names;
    for (size_t c : held) {
      const size_t idx = controls[c];
      out[c] = {idx, ds.patients[idx].id, model.linear_predictor(ds.patients[idx].covariates),
                true, f};
    }
  }
  return out;
}

TreatedScores score_treated(const TrialDataset& ds, Link link, double ridge) {
  const std::vector<size_t> controls = ds.control_indices();
  const std::vector<size_t> treated = ds.treated_indices();
  if (controls.empty() || treated.empty()) {
    throw ValidationError("need both treated and control patients to score");
  }
  TreatedScores result;
  result.model = fit_glm(records_for(ds, controls), link, ridge);
  result.model.covariate_names = ds.covariate_names;
  result.scored.reserve(treated.size());
  for (size_t idx : treated) {
    result.scored.push_back({idx, ds.patients[idx].id,
                             result.model.linear_predictor(ds.patients[idx].covariates), false,
                             ScoredPatient::no_fold});
  }
  return result;
}

std::vector<ScoredPatient> score_with_model(const TrialDataset& ds,
                                            const std::vector<size_t>& patient_indices,
                                            const PredilectionModel& model) {
  if (model.coefficients.size() != ds.covariate_names.size()) {
    throw SchemaError("model has " + std::to_string(model.coefficients.size()) +
                      " coefficients, dataset has " + std::to_string(ds.covariate_names.size()) +
                      " covariates");
  }
  std::vector<ScoredPatient> out;
  out.reserve(patient_indices.size());
  for (size_t idx : patient_indices) {
    if (idx >= ds.patients.size()) throw ContractError("patient index out of range");
    out.push_back({idx, ds.patients[idx].id, model.linear_predictor(ds.patients[idx].covariates),
                   false, ScoredPatient::no_fold});
  }
  return out;
}

std::vector<ScoredPatient> full_model_control_scores(const TrialDataset& ds,
                                                     const PredilectionModel& model) {
  return score_with_model(ds, ds.control_indices(), model);
}

}  // namespace sweetspot
