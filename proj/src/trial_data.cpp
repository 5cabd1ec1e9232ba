#include "sweetspot/trial_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "sweetspot/error.hpp"
#include "sweetspot/rng.hpp"
#include "sweetspot/util.hpp"

namespace sweetspot {

namespace {

bool is_binary_value(double v) { return v == 0.0 || v == 1.0; }

double clamp01_counted(double p, size_t& clamp_count) {
  if (p < 0.0) {
    ++clamp_count;
    return 0.0;
  }
  if (p > 1.0) {
    ++clamp_count;
    return 1.0;
  }
  return p;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace

size_t TrialDataset::treated_count() const {
  return static_cast<size_t>(
      std::count_if(patients.begin(), patients.end(), [](const auto& p) { return p.treated; }));
}

size_t TrialDataset::control_count() const { return patients.size() - treated_count(); }

std::vector<size_t> TrialDataset::treated_indices() const {
  std::vector<size_t> idx;
  for (size_t i = 0; i < patients.size(); ++i)
    if (patients[i].treated) idx.push_back(i);
  return idx;
}

std::vector<size_t> TrialDataset::control_indices() const {
  std::vector<size_t> idx;
  for (size_t i = 0; i < patients.size(); ++i)
    if (!patients[i].treated) idx.push_back(i);
  return idx;
}

void TrialDataset::validate() const {
  const size_t p = covariate_names.size();
  if (p < 1) throw ValidationError("dataset needs at least one covariate");
  size_t n_treated = 0;
  for (size_t i = 0; i < patients.size(); ++i) {
    const auto& pat = patients[i];
    if (pat.covariates.size() != p) {
      throw ValidationError("patient '" + pat.id + "' has " +
                            std::to_string(pat.covariates.size()) + " covariates, expected " +
                            std::to_string(p));
    }
    for (size_t j = 0; j < p; ++j) {
      if (!std::isfinite(pat.covariates[j])) {
        throw ValidationError("patient '" + pat.id + "' covariate '" + covariate_names[j] +
                              "' is not finite");
      }
    }
    if (!std::isfinite(pat.outcome)) {
      throw ValidationError("patient '" + pat.id + "' outcome is not finite");
    }
    if (outcome_kind == OutcomeKind::binary && !is_binary_value(pat.outcome)) {
      throw ValidationError("patient '" + pat.id + "' has non-binary outcome " +
                            format_double(pat.outcome));
    }
    if (pat.treated) ++n_treated;
  }
  if (n_treated == 0 || n_treated == patients.size()) {
    throw ValidationError("dataset needs at least one treated and one control patient");
  }
}

void NullSimConfig::validate() const {
  if (n_patients < 2) throw ValidationError("n_patients must be >= 2");
  if (n_covariates < 1) throw ValidationError("n_covariates must be >= 1");
  if (!(treat_prob > 0.0 && treat_prob < 1.0)) throw ValidationError("treat_prob outside (0, 1)");
  if (!(base_treatment_effect >= 0.0 && base_treatment_effect < 1.0)) {
    throw ValidationError("base_treatment_effect outside [0, 1)");
  }
  if (!(noise_sd >= 0.0)) throw ValidationError("noise_sd must be nonnegative");
}

void SweetSpotSimConfig::validate() const {
  base.validate();
  if (!(extra_effect > 0.0 && extra_effect < 1.0) && extra_effect != 0.0) {
    throw ValidationError("extra_effect outside [0, 1)");
  }
  if (!(spot_fraction > 0.0 && spot_fraction < 1.0)) {
    throw ValidationError("spot_fraction outside (0, 1)");
  }
  if (spot_definition == SpotDefinition::covariate_region) {
    if (region_covariates.empty()) throw ValidationError("region_covariates must be nonempty");
    for (size_t i = 0; i < region_covariates.size(); ++i) {
      if (region_covariates[i] >= base.n_covariates) {
        throw ValidationError("region covariate index out of range");
      }
      for (size_t j = i + 1; j < region_covariates.size(); ++j) {
        if (region_covariates[i] == region_covariates[j]) {
          throw ValidationError("region_covariates must be distinct");
        }
      }
    }
  }
}

namespace {

struct BasePatientDraws {
  std::vector<double> covariates;
  bool treated;
  double noise;
  double outcome_u;
};

// Fixed draw order per patient stream: p covariates, arm, noise, outcome.
BasePatientDraws draw_patient(const Rng& root, size_t i, const NullSimConfig& cfg) {
  Rng rng = root.derive("patient", static_cast<uint64_t>(i));
  BasePatientDraws d;
  d.covariates.resize(cfg.n_covariates);
  for (size_t j = 0; j < cfg.n_covariates; ++j) d.covariates[j] = rng.next_normal();
  d.treated = rng.next_double() < cfg.treat_prob;
  d.noise = rng.next_normal();
  d.outcome_u = rng.next_double();
  return d;
}

std::vector<double> draw_beta(const Rng& root, size_t p,
                              const std::optional<std::vector<double>>& beta_override) {
  if (beta_override) {
    if (beta_override->size() != p) throw ValidationError("beta override has wrong length");
    return *beta_override;
  }
  Rng rng = root.derive("beta");
  std::vector<double> beta(p);
  for (auto& b : beta) b = rng.next_normal();
  return beta;
}

std::vector<std::string> default_covariate_names(size_t p) {
  std::vector<std::string> names(p);
  for (size_t j = 0; j < p; ++j) names[j] = "x" + std::to_string(j + 1);
  return names;
}

SimulatedTrial simulate_common(const NullSimConfig& cfg,
                               const std::optional<std::vector<double>>& beta_override,
                               const std::vector<uint8_t>* in_spot, double extra_effect) {
  const Rng root(cfg.seed);
  SimulatedTrial trial;
  trial.truth.beta = draw_beta(root, cfg.n_covariates, beta_override);
  auto& ds = trial.dataset;
  ds.outcome_kind = OutcomeKind::binary;
  ds.outcome_direction = OutcomeDirection::higher_is_worse;
  ds.covariate_names = default_covariate_names(cfg.n_covariates);
  ds.patients.resize(cfg.n_patients);
  trial.truth.control_prob.resize(cfg.n_patients);
  trial.truth.assigned_prob.resize(cfg.n_patients);

  for (size_t i = 0; i < cfg.n_patients; ++i) {
    const BasePatientDraws d = draw_patient(root, i, cfg);
    double eta = 0.0;
    for (size_t j = 0; j < cfg.n_covariates; ++j) eta += trial.truth.beta[j] * d.covariates[j];
    eta += cfg.noise_sd * d.noise;
    const double control_p = inverse_logit(eta);
    double assigned = control_p;
    if (d.treated) {
      double shift = cfg.base_treatment_effect;
      if (in_spot && (*in_spot)[i]) shift += extra_effect;
      assigned = clamp01_counted(control_p - shift, trial.truth.clamp_count);
    }
    auto& pat = ds.patients[i];
    pat.id = std::to_string(i);
    pat.covariates = d.covariates;
    pat.treated = d.treated;
    pat.outcome = d.outcome_u < assigned ? 1.0 : 0.0;
    trial.truth.control_prob[i] = control_p;
    trial.truth.assigned_prob[i] = assigned;
  }
  return trial;
}

}  // namespace

SimulatedTrial simulate_null_trial(const NullSimConfig& cfg,
                                   const std::optional<std::vector<double>>& beta_override) {
  cfg.validate();
  return simulate_common(cfg, beta_override, nullptr, 0.0);
}

SimulatedTrial simulate_sweetspot_trial(const SweetSpotSimConfig& cfg,
                                        const std::optional<std::vector<double>>& beta_override) {
  cfg.validate();
  const Rng root(cfg.base.seed);
  const size_t n = cfg.base.n_patients;

  // Membership is decided from treatment-free quantities only, so the same
  // patient streams reproduce the null trial exactly when extra_effect == 0.
  std::vector<uint8_t> in_spot(n, 0);
  std::vector<std::pair<double, double>> region_bounds;
  if (cfg.spot_definition == SpotDefinition::severity_quantile_band) {
    const std::vector<double> beta = draw_beta(root, cfg.base.n_covariates, beta_override);
    std::vector<double> control_p(n);
    for (size_t i = 0; i < n; ++i) {
      const BasePatientDraws d = draw_patient(root, i, cfg.base);
      double eta = 0.0;
      for (size_t j = 0; j < cfg.base.n_covariates; ++j) eta += beta[j] * d.covariates[j];
      eta += cfg.base.noise_sd * d.noise;
      control_p[i] = inverse_logit(eta);
    }
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return control_p[a] != control_p[b] ? control_p[a] < control_p[b] : a < b;
    });
    size_t count = static_cast<size_t>(std::llround(cfg.spot_fraction * static_cast<double>(n)));
    count = std::clamp<size_t>(count, 1, n);
    const size_t lo = (n - count) / 2;
    for (size_t r = lo; r < lo + count; ++r) in_spot[order[r]] = 1;
  } else {
    const size_t r = cfg.region_covariates.size();
    const double q = std::pow(cfg.spot_fraction, 1.0 / static_cast<double>(r));
    Rng region_rng = root.derive("region");
    region_bounds.reserve(r);
    std::vector<std::pair<double, double>> bounds_by_cov(r);
    for (size_t m = 0; m < r; ++m) {
      const double u = region_rng.next_double();
      double center = q / 2.0 + u * (1.0 - q);
      center = std::clamp(center, q / 2.0 + 1e-12, 1.0 - q / 2.0 - 1e-12);
      bounds_by_cov[m] = {normal_quantile(center - q / 2.0 + 1e-15),
                          normal_quantile(center + q / 2.0 - 1e-15)};
    }
    region_bounds = bounds_by_cov;
    for (size_t i = 0; i < n; ++i) {
      const BasePatientDraws d = draw_patient(root, i, cfg.base);
      bool inside = true;
      for (size_t m = 0; m < r && inside; ++m) {
        const double x = d.covariates[cfg.region_covariates[m]];
        inside = x >= bounds_by_cov[m].first && x <= bounds_by_cov[m].second;
      }
      in_spot[i] = inside ? 1 : 0;
    }
  }

  SimulatedTrial trial = simulate_common(cfg.base, beta_override, &in_spot, cfg.extra_effect);
  trial.truth.in_spot = std::move(in_spot);
  trial.truth.region_bounds = std::move(region_bounds);
  return trial;
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim_ws(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
  return s.substr(b);
}

double parse_cell(const std::string& raw, size_t row, const std::string& col) {
  const std::string s = trim_ws(raw);
  if (s.empty()) {
    throw ParseError("row " + std::to_string(row) + ", column '" + col + "': empty cell");
  }
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError("row " + std::to_string(row) + ", column '" + col +
                     "': cannot parse numeric value \"" + s + "\"");
  }
  if (!std::isfinite(value)) {
    throw ValidationError("row " + std::to_string(row) + ", column '" + col +
                          "': value is not finite");
  }
  return value;
}

}  // namespace

TrialDataset load_trial_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw ParseError("empty CSV file: " + path);
  if (header_line.size() >= 3 && static_cast<unsigned char>(header_line[0]) == 0xEF &&
      static_cast<unsigned char>(header_line[1]) == 0xBB &&
      static_cast<unsigned char>(header_line[2]) == 0xBF) {
    header_line.erase(0, 3);
  }

  std::vector<std::string> header = split_csv_line(header_line);
  for (auto& h : header) h = trim_ws(h);
  std::unordered_map<std::string, size_t> col_index;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i].empty()) throw SchemaError("empty column name in header");
    if (!col_index.emplace(header[i], i).second) {
      throw SchemaError("duplicate column name '" + header[i] + "'");
    }
  }
  const auto require_col = [&](const std::string& name) {
    const auto it = col_index.find(name);
    if (it == col_index.end()) throw SchemaError("missing required column '" + name + "'");
    return it->second;
  };

  const size_t treat_idx = require_col(schema.treat_col);
  const size_t outcome_idx = require_col(schema.outcome_col);
  std::optional<size_t> id_idx;
  if (!schema.id_col.empty()) id_idx = require_col(schema.id_col);

  std::vector<size_t> cov_idx;
  std::vector<std::string> cov_names;
  if (!schema.covariates_rest || !schema.covariate_cols.empty()) {
    if (schema.covariate_cols.empty()) {
      throw SchemaError("no covariate columns specified");
    }
    for (const auto& name : schema.covariate_cols) {
      cov_idx.push_back(require_col(name));
      cov_names.push_back(name);
    }
  } else {
    for (size_t i = 0; i < header.size(); ++i) {
      if (i == treat_idx || i == outcome_idx || (id_idx && i == *id_idx)) continue;
      cov_idx.push_back(i);
      cov_names.push_back(header[i]);
    }
    if (cov_idx.empty()) throw SchemaError("no covariate columns remain after schema mapping");
  }

  TrialDataset ds;
  ds.covariate_names = cov_names;
  ds.outcome_direction = schema.direction;

  std::string line;
  size_t row = 0;  // 1-based data row, reported in errors
  bool all_binary = true;
  while (std::getline(in, line)) {
    const std::string stripped = trim_ws(line);
    if (stripped.empty() && ds.patients.empty() && row == 0) continue;
    if (stripped.empty()) continue;  // tolerate blank lines
    ++row;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    PatientRecord rec;
    rec.id = id_idx ? trim_ws(fields[*id_idx]) : std::to_string(row - 1);
    const double treat_value = parse_cell(fields[treat_idx], row, schema.treat_col);
    if (treat_value != 0.0 && treat_value != 1.0) {
      throw ValidationError("row " + std::to_string(row) + ", column '" + schema.treat_col +
                            "': treatment value must be 0 or 1, got \"" +
                            trim_ws(fields[treat_idx]) + "\"");
    }
    rec.treated = treat_value == 1.0;
    rec.outcome = parse_cell(fields[outcome_idx], row, schema.outcome_col);
    if (!is_binary_value(rec.outcome)) all_binary = false;
    rec.covariates.reserve(cov_idx.size());
    for (size_t c = 0; c < cov_idx.size(); ++c) {
      rec.covariates.push_back(parse_cell(fields[cov_idx[c]], row, cov_names[c]));
    }
    ds.patients.push_back(std::move(rec));
  }
  if (ds.patients.empty()) throw ParseError("CSV file has no data rows: " + path);
  ds.outcome_kind = all_binary ? OutcomeKind::binary : OutcomeKind::continuous;
  ds.validate();
  return ds;
}

void write_trial_csv(const TrialDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open CSV file for writing: " + path);
  out << "id,treat,outcome";
  for (const auto& name : ds.covariate_names) out << ',' << name;
  out << '\n';
  for (const auto& pat : ds.patients) {
    out << pat.id << ',' << (pat.treated ? 1 : 0) << ',' << format_double(pat.outcome);
    for (double v : pat.covariates) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_sim_truth_json(const SimTruth& truth, const std::string& path) {
  nlohmann::json j;
  j["beta"] = truth.beta;
  j["control_prob"] = truth.control_prob;
  j["assigned_prob"] = truth.assigned_prob;
  j["in_spot"] = truth.in_spot;
  j["clamp_count"] = truth.clamp_count;
  j["region_bounds"] = truth.region_bounds;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

SimTruth load_sim_truth_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad ground-truth JSON in " + path + ": " + e.what());
  }
  SimTruth t;
  t.beta = j.at("beta").get<std::vector<double>>();
  t.control_prob = j.at("control_prob").get<std::vector<double>>();
  t.assigned_prob = j.at("assigned_prob").get<std::vector<double>>();
  t.in_spot = j.at("in_spot").get<std::vector<uint8_t>>();
  t.clamp_count = j.at("clamp_count").get<size_t>();
  t.region_bounds = j.at("region_bounds").get<std::vector<std::pair<double, double>>>();
  return t;
}

}  // namespace sweetspot
