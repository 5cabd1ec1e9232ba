#include "sweetspot/glm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "sweetspot/error.hpp"
#include "sweetspot/util.hpp"

namespace sweetspot {

const char* link_name(Link link) { return link == Link::logistic ? "logistic" : "linear"; }

Link link_from_name(const std::string& name) {
  if (name == "logistic") return Link::logistic;
  if (name == "linear") return Link::linear;
  throw ValidationError("unknown link '" + name + "' (expected logistic or linear)");
}

double PredilectionModel::linear_predictor(const std::vector<double>& covariates) const {
  if (covariates.size() != coefficients.size()) {
    throw ContractError("covariate vector length does not match model");
  }
  double eta = intercept;
  for (size_t j = 0; j < coefficients.size(); ++j) eta += coefficients[j] * covariates[j];
  return eta;
}

double PredilectionModel::response(const std::vector<double>& covariates) const {
  const double eta = linear_predictor(covariates);
  return link == Link::logistic ? inverse_logit(eta) : eta;
}

namespace {

// log(1 + exp(eta)) without overflow.
double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double penalized_loglik(Link link, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& beta, double ridge) {
  const Eigen::VectorXd eta = x * beta;
  double ll = 0.0;
  if (link == Link::logistic) {
    for (Eigen::Index i = 0; i < y.size(); ++i) ll += y[i] * eta[i] - softplus(eta[i]);
  } else {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double r = y[i] - eta[i];
      ll -= 0.5 * r * r;
    }
  }
  double penalty = 0.0;
  for (Eigen::Index j = 1; j < beta.size(); ++j) penalty += beta[j] * beta[j];
  return ll - 0.5 * ridge * penalty;
}

void validate_records(const std::vector<GlmRecord>& records, Link link, double ridge) {
  if (records.empty()) throw ValidationError("cannot fit model on zero records");
  if (!(ridge >= 0.0)) throw ValidationError("ridge_penalty must be nonnegative");
  const size_t p = records.front().covariates.size();
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.covariates.size() != p) {
      throw ValidationError("record " + std::to_string(i) + " has inconsistent covariate length");
    }
    for (double v : r.covariates) {
      if (!std::isfinite(v)) {
        throw ValidationError("record " + std::to_string(i) + " has non-finite covariate");
      }
    }
    if (!std::isfinite(r.outcome)) {
      throw ValidationError("record " + std::to_string(i) + " has non-finite outcome");
    }
    if (link == Link::logistic && r.outcome != 0.0 && r.outcome != 1.0) {
      throw ValidationError("logistic link requires 0/1 outcomes; record " + std::to_string(i) +
                            " has " + std::to_string(r.outcome));
    }
  }
}

PredilectionModel intercept_only_model(const std::vector<GlmRecord>& records, Link link,
                                       double ridge) {
  PredilectionModel m;
  m.link = link;
  m.ridge_penalty = ridge;
  m.coefficients.assign(records.front().covariates.size(), 0.0);
  double mean = 0.0;
  for (const auto& r : records) mean += r.outcome;
  mean /= static_cast<double>(records.size());
  if (link == Link::logistic) {
    // Haldane correction keeps the intercept finite when the outcome is constant.
    const double n = static_cast<double>(records.size());
    const double adj = (mean * n + 0.5) / (n + 1.0);
    m.intercept = logit(adj);
  } else {
    m.intercept = mean;
  }
  m.converged = true;
  m.n_iterations = 0;
  return m;
}

}  // namespace

PredilectionModel fit_glm(const std::vector<GlmRecord>& records, Link link, double ridge_penalty,
                          const FitOptions& opts) {
  validate_records(records, link, ridge_penalty);
  const size_t n = records.size();
  const size_t p = records.front().covariates.size();

  const double first = records.front().outcome;
  const bool constant_outcome =
      std::all_of(records.begin(), records.end(),
                  [&](const GlmRecord& r) { return r.outcome == first; });
  // A constant outcome carries no slope information; for the logistic link
  // the unpenalized intercept has no finite maximizer either.
  if (constant_outcome && (ridge_penalty == 0.0 || link == Link::logistic)) {
    if (opts.intercept_only_on_degenerate) return intercept_only_model(records, link, ridge_penalty);
    throw DegenerateFitError("all outcomes identical (" + std::to_string(first) +
                             "); no model can be fit");
  }

  Eigen::MatrixXd x(n, p + 1);
  Eigen::VectorXd y(n);
  for (size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (size_t j = 0; j < p; ++j) x(i, j + 1) = records[i].covariates[j];
    y[i] = records[i].outcome;
  }
  Eigen::VectorXd penalty_diag = Eigen::VectorXd::Constant(p + 1, ridge_penalty);
  penalty_diag[0] = 0.0;

  PredilectionModel model;
  model.link = link;
  model.ridge_penalty = ridge_penalty;

  if (link == Link::linear) {
    Eigen::MatrixXd h = x.transpose() * x;
    h.diagonal() += penalty_diag;
    const Eigen::VectorXd beta = h.ldlt().solve(x.transpose() * y);
    if (!beta.allFinite()) throw DegenerateFitError("linear solve produced non-finite estimates");
    model.intercept = beta[0];
    model.coefficients.assign(beta.data() + 1, beta.data() + 1 + p);
    model.converged = true;
    model.n_iterations = 1;
    if (opts.objective_trace) {
      opts.objective_trace->push_back(penalized_loglik(link, x, y, beta, ridge_penalty));
    }
    return model;
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  double obj = penalized_loglik(link, x, y, beta, ridge_penalty);
  bool converged = false;
  size_t iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd mu(n), w(n);
    for (size_t i = 0; i < n; ++i) {
      mu[i] = inverse_logit(eta[i]);
      w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
    }
    Eigen::VectorXd grad = x.transpose() * (y - mu) - penalty_diag.cwiseProduct(beta);
    Eigen::MatrixXd hess = x.transpose() * w.asDiagonal() * x;
    hess.diagonal() += penalty_diag;
    const Eigen::VectorXd delta = hess.ldlt().solve(grad);
    if (!delta.allFinite()) throw DegenerateFitError("IRLS step produced non-finite update");

    double step = 1.0;
    Eigen::VectorXd candidate = beta + delta;
    double cand_obj = penalized_loglik(link, x, y, candidate, ridge_penalty);
    size_t halvings = 0;
    while ((!std::isfinite(cand_obj) || cand_obj < obj) && halvings < 50) {
      step *= 0.5;
      candidate = beta + step * delta;
      cand_obj = penalized_loglik(link, x, y, candidate, ridge_penalty);
      ++halvings;
    }
    if (!std::isfinite(cand_obj) || cand_obj < obj) {
      throw DegenerateFitError("IRLS failed to improve the penalized log-likelihood");
    }
    const double max_change = (step * delta).cwiseAbs().maxCoeff();
    beta = candidate;
    obj = cand_obj;
    if (opts.objective_trace) opts.objective_trace->push_back(obj);
    if (max_change < opts.tolerance) {
      converged = true;
      ++iter;
      break;
    }
  }

  model.intercept = beta[0];
  model.coefficients.assign(beta.data() + 1, beta.data() + 1 + p);
  model.converged = converged;
  model.n_iterations = iter;
  return model;
}

double glm_objective(const PredilectionModel& model, const std::vector<GlmRecord>& records) {
  validate_records(records, model.link, model.ridge_penalty);
  const size_t n = records.size();
  const size_t p = records.front().covariates.size();
  if (model.coefficients.size() != p) throw ContractError("model/record dimension mismatch");
  Eigen::MatrixXd x(n, p + 1);
  Eigen::VectorXd y(n);
  for (size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (size_t j = 0; j < p; ++j) x(i, j + 1) = records[i].covariates[j];
    y[i] = records[i].outcome;
  }
  Eigen::VectorXd beta(p + 1);
  beta[0] = model.intercept;
  for (size_t j = 0; j < p; ++j) beta[j + 1] = model.coefficients[j];
  return penalized_loglik(model.link, x, y, beta, model.ridge_penalty);
}

std::string model_to_json(const PredilectionModel& model) {
  nlohmann::ordered_json j;
  j["link"] = link_name(model.link);
  j["intercept"] = model.intercept;
  nlohmann::ordered_json coeffs;
  for (size_t i = 0; i < model.coefficients.size(); ++i) {
    const std::string name = i < model.covariate_names.size() ? model.covariate_names[i]
                                                              : "x" + std::to_string(i + 1);
    coeffs[name] = model.coefficients[i];
  }
  j["coefficients"] = coeffs;
  j["ridge_penalty"] = model.ridge_penalty;
  j["converged"] = model.converged;
  j["n_iterations"] = model.n_iterations;
  return j.dump(2) + "\n";
}

PredilectionModel model_from_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model JSON: ") + e.what());
  }
  PredilectionModel m;
  try {
    try {
      m.link = link_from_name(j.at("link").get<std::string>());
    } catch (const ValidationError& e) {
      throw SchemaError(std::string("model JSON: ") + e.what());
    }
    m.intercept = j.at("intercept").get<double>();
    const auto& coeffs = j.at("coefficients");
    if (!coeffs.is_object()) throw SchemaError("model JSON: coefficients must be an object");
    for (const auto& [name, value] : coeffs.items()) {
      m.covariate_names.push_back(name);
      m.coefficients.push_back(value.get<double>());
    }
    m.ridge_penalty = j.at("ridge_penalty").get<double>();
    m.converged = j.value("converged", true);
    m.n_iterations = j.value("n_iterations", size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model JSON missing or mistyped field: ") + e.what());
  }
  if (!std::isfinite(m.intercept)) throw ValidationError("model intercept is not finite");
  for (double c : m.coefficients) {
    if (!std::isfinite(c)) throw ValidationError("model coefficient is not finite");
  }
  return m;
}

void save_model_json(const PredilectionModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << model_to_json(model);
  if (!out) throw IoError("write failed: " + path);
}

PredilectionModel load_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace sweetspot
