#include "sweetspot/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sweetspot/error.hpp"
#include "sweetspot/util.hpp"

namespace sweetspot {

void AnalysisConfig::validate() const {
  if (n_folds < 2) throw ValidationError("n_folds must be >= 2");
  if (!(ridge >= 0.0)) throw ValidationError("ridge must be nonnegative");
  if (match_ratio < 1) throw ValidationError("match_ratio must be >= 1");
  scan.validate();
  if (n_permutations < 1) throw ValidationError("n_permutations must be >= 1");
  if (n_bootstraps < 1) throw ValidationError("n_bootstraps must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha outside (0, 1)");
  if (smoothing_window % 2 == 0) throw ValidationError("smoothing_window must be odd");
  if (external_model && !external_model->coefficients.empty()) {
    for (double c : external_model->coefficients) {
      if (!std::isfinite(c)) throw ValidationError("external model has non-finite coefficient");
    }
  }
}

namespace {

template <typename F>
auto run_stage(const char* stage, F&& f) {
  const auto wrap = [&](const char* what) { return std::string(stage) + ": " + what; };
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(wrap(e.what()));
  } catch (const SchemaError& e) {
    throw SchemaError(wrap(e.what()));
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(wrap(e.what()));
  } catch (const DegenerateFitError& e) {
    throw DegenerateFitError(wrap(e.what()));
  } catch (const IntegrityError& e) {
    throw IntegrityError(wrap(e.what()));
  } catch (const IoError& e) {
    throw IoError(wrap(e.what()));
  } catch (const ValidationError& e) {
    throw ValidationError(wrap(e.what()));
  } catch (const ContractError& e) {
    throw ContractError(wrap(e.what()));
  }
}

std::array<double, 3> index_quantiles(const std::vector<size_t>& idx) {
  std::vector<double> v(idx.begin(), idx.end());
  std::sort(v.begin(), v.end());
  return {quantile_sorted(v, 0.025), quantile_sorted(v, 0.5), quantile_sorted(v, 0.975)};
}

}  // namespace

SweetSpotReport analyze(const TrialDataset& ds, const AnalysisConfig& cfg) {
  run_stage("validate", [&] {
    ds.validate();
    cfg.validate();
  });

  SweetSpotReport report;
  report.config = cfg;
  report.n_patients = ds.patients.size();
  report.outcome_kind = ds.outcome_kind;
  report.outcome_direction = ds.outcome_direction;

  const Rng root(cfg.seed);
  const std::vector<size_t> controls = ds.control_indices();
  const std::vector<size_t> treated = ds.treated_indices();
  report.n_controls = controls.size();
  report.n_treated = treated.size();

  run_stage("predilection", [&] {
    if (cfg.external_model) {
      if (cfg.external_model->covariate_names != ds.covariate_names) {
        throw SchemaError("external model covariates do not match the dataset columns");
      }
      report.model = *cfg.external_model;
      report.external_model_used = true;
      report.control_scores = score_with_model(ds, controls, report.model);
      report.treated_scores = score_with_model(ds, treated, report.model);
      return;
    }
    TreatedScores ts = score_treated(ds, cfg.link, cfg.ridge);
    report.model = std::move(ts.model);
    report.treated_scores = std::move(ts.scored);
    if (cfg.prevalidate) {
      std::vector<double> control_outcomes;
      if (cfg.stratified_folds) {
        control_outcomes.reserve(controls.size());
        for (size_t idx : controls) control_outcomes.push_back(ds.patients[idx].outcome);
      }
      report.fold_plan =
          cfg.stratified_folds
              ? make_stratified_fold_plan(control_outcomes, cfg.n_folds, root.derive_seed("folds"))
              : make_fold_plan(controls.size(), cfg.n_folds, root.derive_seed("folds"));
      report.control_scores = prevalidated_control_scores(ds, report.fold_plan, cfg.link, cfg.ridge);
    } else {
      report.control_scores = full_model_control_scores(ds, report.model);
    }
  });

  run_stage("matching", [&] {
    std::vector<MatchedSet> sets;
    if (controls.size() < cfg.match_ratio * treated.size()) {
      sets = optimal_match_drop_surplus(report.control_scores, report.treated_scores,
                                        cfg.match_ratio, report.n_surplus_treated_dropped);
      report.warnings.push_back(
          "control arm cannot cover every treated patient at ratio " +
          std::to_string(cfg.match_ratio) + ":1; dropped " +
          std::to_string(report.n_surplus_treated_dropped) + " of " +
          std::to_string(treated.size()) + " treated patients from matching");
    } else {
      sets = optimal_match(report.control_scores, report.treated_scores, cfg.match_ratio);
    }
    report.n_sets = sets.size();
    report.sequence = compute_effects(sets, ds);
  });

  run_stage("scan", [&] { report.location = find_sweet_spot(report.sequence, cfg.scan); });

  run_stage("permutation", [&] {
    report.permutation =
        permutation_test(report.sequence.effects, report.location.z_hat, cfg.scan,
                         cfg.n_permutations, root.derive("permutations"), cfg.estimator,
                         cfg.n_threads);
  });

  run_stage("bootstrap", [&] {
    report.debias = bootstrap_debias(report.sequence.effects, report.location, cfg.scan,
                                     cfg.n_bootstraps, root.derive("bootstrap"), cfg.n_threads);
  });

  report.significant = report.permutation.p_value < cfg.alpha;
  report.boot_i_quantiles = index_quantiles(report.debias.boot_i);
  report.boot_j_quantiles = index_quantiles(report.debias.boot_j);
  return report;
}

// ---------------------------------------------------------------------------
// Report JSON
// ---------------------------------------------------------------------------

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json scan_to_json(const ScanConstraints& c) {
  ordered_json j;
  j["min_len"] = c.min_len;
  j["max_len"] = c.max_len ? ordered_json(*c.max_len) : ordered_json(nullptr);
  j["stride"] = c.stride;
  j["min_fraction"] = c.min_fraction ? ordered_json(*c.min_fraction) : ordered_json(nullptr);
  j["max_fraction"] = c.max_fraction ? ordered_json(*c.max_fraction) : ordered_json(nullptr);
  return j;
}

ordered_json named_values(const std::vector<std::string>& names, const std::vector<double>& v,
                          bool exponentiate) {
  ordered_json j = ordered_json::object();
  for (size_t i = 0; i < v.size(); ++i) {
    const std::string name = i < names.size() ? names[i] : "x" + std::to_string(i + 1);
    j[name] = exponentiate ? std::exp(v[i]) : v[i];
  }
  return j;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw SchemaError("report schema: " + what);
}

}  // namespace

std::string report_to_json(const SweetSpotReport& r) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool"] = {{"name", "sweetspot"}, {"version", kToolVersion}};

  ordered_json input;
  input["path"] = r.input_path;
  input["digest"] = r.input_digest;
  input["n_patients"] = r.n_patients;
  input["n_treated"] = r.n_treated;
  input["n_controls"] = r.n_controls;
  input["outcome_kind"] = r.outcome_kind == OutcomeKind::binary ? "binary" : "continuous";
  input["outcome_direction"] = r.outcome_direction == OutcomeDirection::higher_is_worse
                                   ? "higher_is_worse"
                                   : "higher_is_better";
  j["input"] = input;

  const AnalysisConfig& c = r.config;
  ordered_json cfg;
  cfg["link"] = link_name(c.link);
  cfg["n_folds"] = c.n_folds;
  cfg["prevalidate"] = c.prevalidate;
  cfg["stratified_folds"] = c.stratified_folds;
  cfg["ridge"] = c.ridge;
  cfg["match_ratio"] = c.match_ratio;
  cfg["scan"] = scan_to_json(c.scan);
  cfg["n_permutations"] = c.n_permutations;
  cfg["n_bootstraps"] = c.n_bootstraps;
  cfg["estimator"] = estimator_name(c.estimator);
  cfg["alpha"] = c.alpha;
  cfg["seed"] = c.seed;
  cfg["smoothing_window"] = c.smoothing_window;
  j["config"] = cfg;

  ordered_json model;
  model["external"] = r.external_model_used;
  model["link"] = link_name(r.model.link);
  model["intercept"] = r.model.intercept;
  model["coefficients"] = named_values(r.model.covariate_names, r.model.coefficients, false);
  model["odds_ratios"] = r.model.link == Link::logistic
                             ? named_values(r.model.covariate_names, r.model.coefficients, true)
                             : ordered_json(nullptr);
  model["ridge_penalty"] = r.model.ridge_penalty;
  model["converged"] = r.model.converged;
  model["n_iterations"] = r.model.n_iterations;
  j["model"] = model;

  ordered_json matching;
  matching["ratio"] = c.match_ratio;
  matching["n_sets"] = r.n_sets;
  matching["n_surplus_treated_dropped"] = r.n_surplus_treated_dropped;
  j["matching"] = matching;

  ordered_json spot;
  spot["i"] = r.location.i_hat;
  spot["j"] = r.location.j_hat;
  spot["n_in_spot"] = r.location.size();
  spot["z"] = r.location.z_hat;
  spot["score_lo"] = r.location.score_lo;
  spot["score_hi"] = r.location.score_hi;
  j["sweet_spot"] = spot;

  ordered_json est;
  est["tau_hat"] = r.debias.tau_hat;
  est["tau_outside"] = r.debias.tau_outside;
  est["tau_boot_mean"] = r.debias.tau_boot_mean;
  est["bias_hat"] = r.debias.bias_hat;
  est["tau_corrected"] = r.debias.tau_corrected;
  j["estimates"] = est;

  ordered_json perm;
  perm["p_value"] = r.permutation.p_value;
  perm["n_permutations"] = r.permutation.n_permutations;
  perm["estimator"] = estimator_name(r.permutation.estimator);
  perm["alpha"] = c.alpha;
  perm["significant"] = r.significant;
  j["permutation"] = perm;

  ordered_json boot;
  boot["n_bootstraps"] = r.debias.boot_tau.size();
  boot["i_quantiles"] = {{"p2_5", r.boot_i_quantiles[0]},
                         {"p50", r.boot_i_quantiles[1]},
                         {"p97_5", r.boot_i_quantiles[2]}};
  boot["j_quantiles"] = {{"p2_5", r.boot_j_quantiles[0]},
                         {"p50", r.boot_j_quantiles[1]},
                         {"p97_5", r.boot_j_quantiles[2]}};
  j["bootstrap"] = boot;

  j["warnings"] = r.warnings;

  std::string text = j.dump(2) + "\n";
  validate_report_json(text);
  return text;
}

void validate_report_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("report is not valid JSON: ") + e.what());
  }
  require(j.value("schema_version", "") == kReportSchemaVersion, "unknown schema_version");
  for (const char* key : {"tool", "input", "config", "model", "matching", "sweet_spot",
                          "estimates", "permutation", "bootstrap", "warnings"}) {
    require(j.contains(key), std::string("missing section '") + key + "'");
  }
  const auto& spot = j["sweet_spot"];
  require(spot["i"].is_number_unsigned() && spot["j"].is_number_unsigned(),
          "sweet_spot indices must be unsigned");
  require(spot["i"].get<size_t>() >= 1 && spot["i"].get<size_t>() < spot["j"].get<size_t>(),
          "sweet_spot indices out of order");
  require(spot["z"].is_number(), "sweet_spot.z must be a number");
  const auto& perm = j["permutation"];
  require(perm["p_value"].is_number(), "permutation.p_value must be a number");
  const double p = perm["p_value"].get<double>();
  require(p >= 0.0 && p <= 1.0, "permutation.p_value outside [0, 1]");
  const auto& est = j["estimates"];
  for (const char* key : {"tau_hat", "tau_outside", "tau_boot_mean", "bias_hat", "tau_corrected"}) {
    require(est.contains(key) && est[key].is_number(),
            std::string("estimates.") + key + " must be a number");
  }
  require(j["warnings"].is_array(), "warnings must be an array");
}

void write_report_json(const SweetSpotReport& report, const std::string& path) {
  const std::string text = report_to_json(report);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Plot data and intermediates
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::ofstream open_csv(const std::string& dir, const std::string& name) {
  const std::filesystem::path p = std::filesystem::path(dir) / name;
  std::ofstream out(p);
  if (!out) throw IoError("cannot open for writing: " + p.string());
  return out;
}

}  // namespace

void emit_plot_data(const SweetSpotReport& r, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory " + out_dir + ": " + ec.message());
  const size_t n = r.sequence.size();

  size_t window = std::min(r.config.smoothing_window, n);
  if (window % 2 == 0) --window;
  const std::vector<double> smoothed = moving_average(r.sequence.effects, window);
  {
    auto out = open_csv(out_dir, "effects_by_score.csv");
    out << "index,score,effect,smoothed,in_spot\n";
    for (size_t i = 0; i < n; ++i) {
      const bool in = i + 1 >= r.location.i_hat && i + 1 <= r.location.j_hat;
      out << (i + 1) << ',' << fmt(r.sequence.scores[i]) << ',' << fmt(r.sequence.effects[i])
          << ',' << fmt(smoothed[i]) << ',' << (in ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open_csv(out_dir, "null_max_z.csv");
    out << "replicate,max_z\n";
    for (size_t b = 0; b < r.permutation.null_max_z.size(); ++b) {
      out << b << ',' << fmt(r.permutation.null_max_z[b]) << '\n';
    }
  }
  {
    auto out = open_csv(out_dir, "bootstrap_locations.csv");
    out << "replicate,i,j,tau\n";
    for (size_t b = 0; b < r.debias.boot_tau.size(); ++b) {
      out << b << ',' << r.debias.boot_i[b] << ',' << r.debias.boot_j[b] << ','
          << fmt(r.debias.boot_tau[b]) << '\n';
    }
  }
  {
    auto out = open_csv(out_dir, "cate_segments.csv");
    out << "segment,from_index,to_index,mean_effect\n";
    if (r.location.i_hat > 1) {
      out << "outside_left,1," << (r.location.i_hat - 1) << ',' << fmt(r.debias.tau_outside)
          << '\n';
    }
    out << "inside," << r.location.i_hat << ',' << r.location.j_hat << ','
        << fmt(r.debias.tau_hat) << '\n';
    if (r.location.j_hat < n) {
      out << "outside_right," << (r.location.j_hat + 1) << ',' << n << ','
          << fmt(r.debias.tau_outside) << '\n';
    }
  }
  {
    auto out = open_csv(out_dir, "markers.csv");
    out << "name,value\n";
    out << "i_hat," << r.location.i_hat << '\n';
    out << "j_hat," << r.location.j_hat << '\n';
    out << "z_hat," << fmt(r.location.z_hat) << '\n';
    out << "score_lo," << fmt(r.location.score_lo) << '\n';
    out << "score_hi," << fmt(r.location.score_hi) << '\n';
    out << "tau_hat," << fmt(r.debias.tau_hat) << '\n';
    out << "tau_outside," << fmt(r.debias.tau_outside) << '\n';
    out << "tau_boot_mean," << fmt(r.debias.tau_boot_mean) << '\n';
    out << "bias_hat," << fmt(r.debias.bias_hat) << '\n';
    out << "tau_corrected," << fmt(r.debias.tau_corrected) << '\n';
    out << "p_value," << fmt(r.permutation.p_value) << '\n';
    out << "alpha," << fmt(r.config.alpha) << '\n';
    out << "significant," << (r.significant ? 1 : 0) << '\n';
  }
}

void emit_intermediates(const SweetSpotReport& r, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory " + out_dir + ": " + ec.message());
  {
    auto out = open_csv(out_dir, "control_scores.csv");
    out << "id,score,prevalidated,fold\n";
    for (const auto& s : r.control_scores) {
      out << s.id << ',' << fmt(s.score) << ',' << (s.prevalidated ? 1 : 0) << ',';
      if (s.fold != ScoredPatient::no_fold) out << s.fold;
      out << '\n';
    }
  }
  {
    auto out = open_csv(out_dir, "treated_scores.csv");
    out << "id,score\n";
    for (const auto& s : r.treated_scores) out << s.id << ',' << fmt(s.score) << '\n';
  }
  if (!r.fold_plan.assignment.empty()) {
    auto out = open_csv(out_dir, "fold_assignment.csv");
    out << "control_id,fold\n";
    for (size_t c = 0; c < r.fold_plan.assignment.size(); ++c) {
      out << r.control_scores[c].id << ',' << r.fold_plan.assignment[c] << '\n';
    }
  }
  write_matched_sets_csv(r.sequence.sets,
                         (std::filesystem::path(out_dir) / "matched_sets.csv").string());
  {
    auto out = open_csv(out_dir, "effect_sequence.csv");
    out << "index,score,effect,treated_id\n";
    for (size_t i = 0; i < r.sequence.size(); ++i) {
      out << (i + 1) << ',' << fmt(r.sequence.scores[i]) << ',' << fmt(r.sequence.effects[i])
          << ',' << r.sequence.sets[i].treated_id << '\n';
    }
  }
  PredilectionModel model = r.model;
  save_model_json(model, (std::filesystem::path(out_dir) / "model.json").string());
}

}  // namespace sweetspot
