#include "sweetspot/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "sweetspot/analyze.hpp"
#include "sweetspot/error.hpp"
#include "sweetspot/experiments.hpp"
#include "sweetspot/util.hpp"

namespace sweetspot {

namespace {

namespace fs = std::filesystem;

struct AnalyzeArgs {
  std::string input;
  CsvSchema schema;
  std::string direction = "higher-is-worse";
  std::string link = "logistic";
  std::string estimator = "plugin";
  AnalysisConfig cfg;
  bool no_prevalidation = false;
  std::optional<size_t> max_len;
  std::optional<double> min_fraction, max_fraction;
  std::string out_dir;
  bool emit_intermediate = false;
  bool json_to_stdout = false;
  std::string model_in, model_out;
};

struct SimulateArgs {
  NullSimConfig base;
  double extra_effect = 0.3;
  double spot_fraction = 0.3;
  std::string spot_type = "severity";
  std::vector<size_t> region_covariates = {1, 2, 3};  // 1-based covariate columns
  std::string out;
  std::string truth_out;
};

struct ExperimentArgs {
  ExperimentGrid grid;
  std::vector<size_t> p_list = {10, 100};
  std::string out_dir;
  bool full = false;
};

void print_report_summary(const SweetSpotReport& r) {
  std::printf("sweetspot analysis of %s\n",
              r.input_path.empty() ? "(in-memory dataset)" : r.input_path.c_str());
  std::printf("  patients: %zu (%zu treated, %zu control), outcome %s\n", r.n_patients,
              r.n_treated, r.n_controls,
              r.outcome_kind == OutcomeKind::binary ? "binary" : "continuous");
  std::printf("  model: %s%s, %s after %zu iterations\n", link_name(r.model.link),
              r.external_model_used ? " (external)" : "",
              r.model.converged ? "converged" : "NOT converged", r.model.n_iterations);
  std::printf("  matched sets: %zu at ratio %zu:1", r.n_sets, r.config.match_ratio);
  if (r.n_surplus_treated_dropped > 0) {
    std::printf(" (%zu surplus treated dropped)", r.n_surplus_treated_dropped);
  }
  std::printf("\n");
  std::printf("  sweet spot: sets %zu..%zu of %zu, scores %.4g..%.4g, Z = %.4g\n",
              r.location.i_hat, r.location.j_hat, r.n_sets, r.location.score_lo,
              r.location.score_hi, r.location.z_hat);
  std::printf("  tau_hat = %.4g, tau_outside = %.4g, bias_hat = %.4g, tau_corrected = %.4g\n",
              r.debias.tau_hat, r.debias.tau_outside, r.debias.bias_hat, r.debias.tau_corrected);
  std::printf("  permutation p = %.4g (%s, B = %zu): %s at alpha = %g\n", r.permutation.p_value,
              estimator_name(r.permutation.estimator), r.permutation.n_permutations,
              r.significant ? "significant" : "not significant", r.config.alpha);
  std::printf("  bootstrap location 95%%: i in [%g, %g], j in [%g, %g] (B = %zu)\n",
              r.boot_i_quantiles[0], r.boot_i_quantiles[2], r.boot_j_quantiles[0],
              r.boot_j_quantiles[2], r.debias.boot_tau.size());
  for (const auto& w : r.warnings) std::printf("  warning: %s\n", w.c_str());
}

int cmd_analyze(AnalyzeArgs& a) {
  a.schema.direction = a.direction == "higher-is-better" ? OutcomeDirection::higher_is_better
                                                         : OutcomeDirection::higher_is_worse;
  if (!a.schema.covariate_cols.empty()) a.schema.covariates_rest = false;
  const TrialDataset ds = load_trial_csv(a.input, a.schema);

  a.cfg.link = link_from_name(a.link);
  a.cfg.estimator = estimator_from_name(a.estimator);
  a.cfg.prevalidate = !a.no_prevalidation;
  a.cfg.scan.max_len = a.max_len;
  a.cfg.scan.min_fraction = a.min_fraction;
  a.cfg.scan.max_fraction = a.max_fraction;
  if (!a.model_in.empty()) {
    PredilectionModel m = load_model_json(a.model_in);
    if (m.covariate_names.empty()) m.covariate_names = ds.covariate_names;
    a.cfg.external_model = std::move(m);
  }

  SweetSpotReport report = analyze(ds, a.cfg);
  report.input_path = a.input;
  report.input_digest = digest_hex(file_digest(a.input));

  if (!a.model_out.empty()) save_model_json(report.model, a.model_out);
  if (!a.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw IoError("cannot create directory " + a.out_dir + ": " + ec.message());
    write_report_json(report, (fs::path(a.out_dir) / "report.json").string());
    emit_plot_data(report, a.out_dir);
    if (a.emit_intermediate) emit_intermediates(report, a.out_dir);
  }

  if (a.json_to_stdout) {
    std::fputs(report_to_json(report).c_str(), stdout);
    for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  } else {
    print_report_summary(report);
    if (!a.out_dir.empty()) std::printf("  outputs written to %s\n", a.out_dir.c_str());
  }
  return 0;
}

int cmd_simulate(SimulateArgs& s, bool with_spot) {
  SimulatedTrial trial;
  if (with_spot) {
    SweetSpotSimConfig cfg;
    cfg.base = s.base;
    cfg.extra_effect = s.extra_effect;
    cfg.spot_fraction = s.spot_fraction;
    if (s.spot_type == "severity") {
      cfg.spot_definition = SpotDefinition::severity_quantile_band;
    } else if (s.spot_type == "covariate") {
      cfg.spot_definition = SpotDefinition::covariate_region;
    } else {
      throw ValidationError("unknown spot type '" + s.spot_type +
                            "' (severity or covariate)");
    }
    cfg.region_covariates.clear();
    for (size_t c : s.region_covariates) {
      if (c < 1) throw ValidationError("region covariate indices are 1-based");
      cfg.region_covariates.push_back(c - 1);
    }
    trial = simulate_sweetspot_trial(cfg);
  } else {
    trial = simulate_null_trial(s.base);
  }
  write_trial_csv(trial.dataset, s.out);
  if (!s.truth_out.empty()) write_sim_truth_json(trial.truth, s.truth_out);
  std::printf("wrote %zu patients (%zu treated, %zu control) to %s\n",
              trial.dataset.patients.size(), trial.dataset.treated_count(),
              trial.dataset.control_count(), s.out.c_str());
  if (!s.truth_out.empty()) std::printf("ground truth written to %s\n", s.truth_out.c_str());
  if (trial.truth.clamp_count > 0) {
    std::printf("note: %zu treated probabilities clamped at 0\n", trial.truth.clamp_count);
  }
  return 0;
}

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void print_cells(const ExperimentSummary& s) {
  for (const auto& c : s.cells) {
    std::printf("  extra_effect=%g spot_fraction=%g: reject %zu/%zu (rate %.3f, se %.3f)",
                c.extra_effect, c.spot_fraction, c.n_reject, c.n_trials, c.rejection_rate,
                c.rejection_se);
    if (c.has_jaccard) std::printf(", mean Jaccard %.3f", c.mean_jaccard);
    std::printf("\n");
  }
  for (const auto& w : s.warnings) std::printf("  warning: %s\n", w.c_str());
  std::printf("  runtime: %.1fs\n", s.runtime_seconds);
}

int cmd_experiment_type1(ExperimentArgs& e) {
  e.grid.extra_effect_grid = {0.0};
  e.grid.spot_fraction_grid = {0.0};
  const ExperimentSummary s = run_type1(e.grid);
  prepare_out_dir(e.out_dir);
  write_experiment_json(s, (fs::path(e.out_dir) / "summary.json").string());
  write_pvalues_csv(s, (fs::path(e.out_dir) / "pvalues.csv").string());
  write_tidy_csv(s, (fs::path(e.out_dir) / "tidy.csv").string());
  std::printf("type I error experiment: %zu trials\n", e.grid.n_trials_per_cell);
  print_cells(s);
  std::printf("outputs written to %s\n", e.out_dir.c_str());
  return 0;
}

int cmd_experiment_power(ExperimentArgs& e, SpotDefinition def) {
  const ExperimentSummary s = run_power(e.grid, def);
  prepare_out_dir(e.out_dir);
  write_experiment_json(s, (fs::path(e.out_dir) / "summary.json").string());
  write_pvalues_csv(s, (fs::path(e.out_dir) / "pvalues.csv").string());
  write_tidy_csv(s, (fs::path(e.out_dir) / "tidy.csv").string());
  std::printf("%s experiment: %zu cells x %zu trials\n", s.name.c_str(), s.cells.size(),
              e.grid.n_trials_per_cell);
  print_cells(s);
  std::printf("outputs written to %s\n", e.out_dir.c_str());
  return 0;
}

int cmd_experiment_ablation(ExperimentArgs& e) {
  e.grid.extra_effect_grid = {0.0};
  e.grid.spot_fraction_grid = {0.0};
  const AblationSummary s = run_prevalidation_ablation(e.grid, e.p_list);
  prepare_out_dir(e.out_dir);
  write_ablation_json(s, (fs::path(e.out_dir) / "summary.json").string());
  write_ablation_pvalues_csv(s, (fs::path(e.out_dir) / "pvalues.csv").string());
  std::printf("prevalidation ablation: %zu trials per arm\n", e.grid.n_trials_per_cell);
  for (const auto& a : s.arms) {
    std::printf("  p=%zu %s: reject %zu/%zu (rate %.3f, se %.3f)\n", a.n_covariates,
                a.prevalidated ? "prevalidated    " : "no prevalidation", a.cell.n_reject,
                a.cell.n_trials, a.cell.rejection_rate, a.cell.rejection_se);
  }
  for (const auto& w : s.warnings) std::printf("  warning: %s\n", w.c_str());
  std::printf("  runtime: %.1fs\noutputs written to %s\n", s.runtime_seconds, e.out_dir.c_str());
  return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
  CLI::App app{"Sweet-spot analysis: find the illness-severity range where "
               "treatment benefit concentrates in randomized trial data",
               "sweetspot"};
  app.require_subcommand(1);

  // --- analyze ---------------------------------------------------------
  AnalyzeArgs an;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Analyze a trial CSV");
  analyze_cmd->add_option("--input", an.input, "Input CSV file")
      ->required()
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--treat-col", an.schema.treat_col, "Treatment column (0/1)");
  analyze_cmd->add_option("--outcome-col", an.schema.outcome_col, "Outcome column");
  analyze_cmd->add_option("--id-col", an.schema.id_col, "Patient id column");
  analyze_cmd
      ->add_option("--covariate-cols", an.schema.covariate_cols,
                   "Covariate columns (default: every remaining column)")
      ->delimiter(',');
  analyze_cmd
      ->add_option("--outcome-direction", an.direction,
                   "higher-is-worse (default) or higher-is-better")
      ->check(CLI::IsMember({"higher-is-worse", "higher-is-better"}));
  analyze_cmd->add_option("--link", an.link, "Model link: logistic or linear")
      ->check(CLI::IsMember({"logistic", "linear"}));
  analyze_cmd->add_option("--folds", an.cfg.n_folds, "Prevalidation folds");
  analyze_cmd->add_flag("--no-prevalidation", an.no_prevalidation,
                        "Score controls with the full-control model");
  analyze_cmd->add_flag("--stratified-folds", an.cfg.stratified_folds,
                        "Stratify folds by outcome");
  analyze_cmd->add_option("--ridge", an.cfg.ridge, "Ridge penalty on slopes");
  analyze_cmd->add_option("--ratio", an.cfg.match_ratio, "Controls per treated (k:1)");
  analyze_cmd->add_option("--permutations", an.cfg.n_permutations, "Permutation replicates");
  analyze_cmd->add_option("--bootstraps", an.cfg.n_bootstraps, "Bootstrap replicates");
  analyze_cmd->add_option("--estimator", an.estimator, "p-value estimator: plugin or add-one")
      ->check(CLI::IsMember({"plugin", "add-one", "add_one"}));
  analyze_cmd->add_option("--alpha", an.cfg.alpha, "Significance level");
  analyze_cmd->add_option("--seed", an.cfg.seed, "Master seed");
  analyze_cmd->add_option("--min-len", an.cfg.scan.min_len, "Minimum interval size (sets)");
  analyze_cmd->add_option("--max-len", an.max_len, "Maximum interval size (sets)");
  analyze_cmd->add_option("--min-fraction", an.min_fraction,
                          "Minimum interval size as a fraction of sets");
  analyze_cmd->add_option("--max-fraction", an.max_fraction,
                          "Maximum interval size as a fraction of sets");
  analyze_cmd->add_option("--stride", an.cfg.scan.stride, "Interval length stride");
  analyze_cmd->add_option("--smoothing-window", an.cfg.smoothing_window,
                          "Odd moving-average window for plot data");
  analyze_cmd->add_option("--threads", an.cfg.n_threads, "Worker threads (0 = all cores)");
  analyze_cmd->add_option("--out-dir", an.out_dir, "Write report.json and plot CSVs here");
  analyze_cmd->add_flag("--emit-intermediate", an.emit_intermediate,
                        "Also write scores, folds, and matched sets");
  analyze_cmd->add_option("--model-in", an.model_in, "Score with this model JSON (skip fitting)")
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--model-out", an.model_out, "Write the fitted model JSON here");
  analyze_cmd->add_flag("--json", an.json_to_stdout, "Print the report JSON to stdout");

  // --- simulate --------------------------------------------------------
  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic trial CSV");
  sim_cmd->require_subcommand(1);
  CLI::App* sim_null = sim_cmd->add_subcommand("null", "No sweet spot (uniform effect)");
  CLI::App* sim_spot = sim_cmd->add_subcommand("sweetspot", "Extra effect inside a spot");
  for (CLI::App* c : {sim_null, sim_spot}) {
    c->add_option("--n", sim.base.n_patients, "Patients");
    c->add_option("--p", sim.base.n_covariates, "Covariates");
    c->add_option("--treat-prob", sim.base.treat_prob, "Treatment probability");
    c->add_option("--effect", sim.base.base_treatment_effect, "Uniform treatment effect");
    c->add_option("--noise-sd", sim.base.noise_sd, "Linear-predictor noise SD");
    c->add_option("--seed", sim.base.seed, "Seed");
    c->add_option("--out", sim.out, "Output CSV")->required();
    c->add_option("--truth-out", sim.truth_out, "Ground-truth JSON sidecar");
  }
  sim_spot->add_option("--extra-effect", sim.extra_effect, "Extra effect inside the spot");
  sim_spot->add_option("--spot-fraction", sim.spot_fraction, "Fraction of patients in the spot");
  sim_spot->add_option("--spot-type", sim.spot_type, "severity or covariate")
      ->check(CLI::IsMember({"severity", "covariate"}));
  sim_spot
      ->add_option("--region-covariates", sim.region_covariates,
                   "1-based covariate indices defining a covariate spot")
      ->delimiter(',');

  // --- experiment ------------------------------------------------------
  ExperimentArgs ex;
  CLI::App* ex_cmd = app.add_subcommand("experiment", "Run a simulation study");
  ex_cmd->require_subcommand(1);
  CLI::App* ex_type1 = ex_cmd->add_subcommand("type1", "Type I error under the null");
  CLI::App* ex_power = ex_cmd->add_subcommand("power", "Power, severity-band spots");
  CLI::App* ex_powcov = ex_cmd->add_subcommand("power-covariate", "Power, covariate-region spots");
  CLI::App* ex_ablate = ex_cmd->add_subcommand("preval-ablation",
                                               "Type I error with vs without prevalidation");
  for (CLI::App* c : {ex_type1, ex_power, ex_powcov, ex_ablate}) {
    c->add_option("--trials", ex.grid.n_trials_per_cell, "Trials per cell");
    c->add_option("--perms", ex.grid.n_permutations, "Permutations per trial");
    c->add_option("--boots", ex.grid.n_bootstraps, "Bootstraps per trial");
    c->add_option("--alpha", ex.grid.alpha, "Significance level");
    c->add_option("--n", ex.grid.base_cfg.n_patients, "Patients per trial");
    c->add_option("--p", ex.grid.base_cfg.n_covariates, "Covariates");
    c->add_option("--effect", ex.grid.base_cfg.base_treatment_effect, "Uniform effect");
    c->add_option("--treat-prob", ex.grid.base_cfg.treat_prob, "Treatment probability");
    c->add_option("--noise-sd", ex.grid.base_cfg.noise_sd, "Linear-predictor noise SD");
    c->add_option("--folds", ex.grid.n_folds, "Prevalidation folds");
    c->add_option("--seed", ex.grid.master_seed, "Master seed");
    c->add_option("--threads", ex.grid.n_threads, "Worker threads (0 = all cores)");
    c->add_option("--out-dir", ex.out_dir, "Output directory")->required();
    c->add_flag("--full", ex.full, "Full scale: 1000 trials, 1000/1000 replicates");
  }
  for (CLI::App* c : {ex_power, ex_powcov}) {
    c->add_option("--extra-effects", ex.grid.extra_effect_grid, "Extra-effect grid")
        ->delimiter(',');
    c->add_option("--spot-fractions", ex.grid.spot_fraction_grid, "Spot-fraction grid")
        ->delimiter(',');
  }
  ex_ablate->add_option("--p-list", ex.p_list, "Covariate counts to compare")->delimiter(',');
  // The ablation reproduces a setting with larger trials by default.
  ex_ablate->parse_complete_callback([&] {
    if (ex_ablate->count("--n") == 0) ex.grid.base_cfg.n_patients = 800;
  });

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message and usage hint
    return 1;
  }

  try {
    if (*analyze_cmd) return cmd_analyze(an);
    if (*sim_cmd) return cmd_simulate(sim, sim_cmd->got_subcommand("sweetspot"));
    if (*ex_cmd) {
      CLI::App* sub = ex_cmd->get_subcommands().front();
      // --full upgrades to full scale, but explicit flags win.
      if (ex.full && sub->count("--trials") == 0) ex.grid.n_trials_per_cell = 1000;
      if (ex.full && sub->count("--perms") == 0) ex.grid.n_permutations = 1000;
      if (ex.full && sub->count("--boots") == 0) ex.grid.n_bootstraps = 1000;
      if (ex_cmd->got_subcommand("type1")) return cmd_experiment_type1(ex);
      if (ex_cmd->got_subcommand("power")) {
        return cmd_experiment_power(ex, SpotDefinition::severity_quantile_band);
      }
      if (ex_cmd->got_subcommand("power-covariate")) {
        return cmd_experiment_power(ex, SpotDefinition::covariate_region);
      }
      return cmd_experiment_ablation(ex);
    }
    return 2;  // unreachable with require_subcommand(1)
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
}

}  // namespace sweetspot
