#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sweetspot {

enum class Link { logistic, linear };

const char* link_name(Link link);
Link link_from_name(const std::string& name);

// Fitted predilection model: intercept plus one coefficient per covariate,
// in dataset column order.
struct PredilectionModel {
  Link link = Link::logistic;
  double intercept = 0.0;
  std::vector<double> coefficients;
  double ridge_penalty = 0.0;
  bool converged = false;
  size_t n_iterations = 0;
  // Used for JSON export and for schema checks on the external-model path.
  std::vector<std::string> covariate_names;

  double linear_predictor(const std::vector<double>& covariates) const;
  // Response-scale prediction: probability for logistic, identity for linear.
  double response(const std::vector<double>& covariates) const;
};

struct GlmRecord {
  std::vector<double> covariates;
  double outcome;
};

struct FitOptions {
  size_t max_iterations = 100;
  double tolerance = 1e-8;  // max absolute coefficient change
  // When the outcome is constant (no slope information), return an
  // intercept-only model instead of throwing a degenerate-fit error.
  bool intercept_only_on_degenerate = false;
  // Optional: penalized log-likelihood after each accepted IRLS step.
  std::vector<double>* objective_trace = nullptr;
};

// Ridge-penalized GLM fit. The penalty applies to slopes only, never the
// intercept. Logistic link uses iteratively reweighted least squares with
// step-halving; linear link is a single penalized least-squares solve.
PredilectionModel fit_glm(const std::vector<GlmRecord>& records, Link link, double ridge_penalty,
                          const FitOptions& opts = {});

// Penalized log-likelihood (Gaussian log-density for the linear link); the
// quantity IRLS maximizes. Exposed so callers can check fit quality.
double glm_objective(const PredilectionModel& model, const std::vector<GlmRecord>& records);

std::string model_to_json(const PredilectionModel& model);
PredilectionModel model_from_json(const std::string& text);

void save_model_json(const PredilectionModel& model, const std::string& path);
PredilectionModel load_model_json(const std::string& path);

}  // namespace sweetspot
