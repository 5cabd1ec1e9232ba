#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sweetspot/rng.hpp"
#include "sweetspot/scan.hpp"

namespace sweetspot {

enum class PValueEstimator { plugin, add_one };

const char* estimator_name(PValueEstimator e);
PValueEstimator estimator_from_name(const std::string& name);

struct PermutationResult {
  double p_value = 1.0;
  size_t n_permutations = 0;
  std::vector<double> null_max_z;
  double z_hat = 0.0;
  PValueEstimator estimator = PValueEstimator::plugin;
};

// Mean effect inside (i, j) and over its complement; the outside mean is
// absent when the interval covers the whole sequence.
std::pair<double, std::optional<double>> naive_cate(const std::vector<double>& t, size_t i,
                                                    size_t j);

// p-value recomputation from a stored null distribution.
double p_value_from_null(const std::vector<double>& null_max_z, double z_hat,
                         PValueEstimator estimator);

// B random permutations of the effects (scores held fixed), each re-scanned
// under the same constraints; the p-value is the share of permuted maxima at
// least as large as z_hat. Permutation b draws from substream(stream, b), so
// results are identical for any thread count.
PermutationResult permutation_test(const std::vector<double>& effects, double z_hat,
                                   const ScanConstraints& c, size_t n_permutations,
                                   const Rng& stream, PValueEstimator estimator,
                                   size_t n_threads = 1);

struct DebiasResult {
  double tau_hat = 0.0;
  double tau_boot_mean = 0.0;
  double bias_hat = 0.0;       // tau_boot_mean - tau_hat
  double tau_corrected = 0.0;  // 2 * tau_hat - tau_boot_mean
  double tau_outside = 0.0;
  std::vector<size_t> boot_i;  // 1-based replicate spot locations
  std::vector<size_t> boot_j;
  std::vector<double> boot_tau;
};

enum class ResampleMode {
  bootstrap,      // i.i.d. resampling with replacement
  enumerate_all,  // every possible resample outcome once (small n only)
};

// Number of replicates enumerate_all requires: a^a * b^b for inside size a
// and outside size b. Throws when the count is impractically large.
size_t enumerate_all_count(size_t inside_size, size_t outside_size);

// Parametric bootstrap around the located spot: inside positions resample
// from inside values, outside positions from outside values; each replicate
// re-runs the scan and contributes its own spot's mean effect. Deterministic
// given the stream for any thread count.
DebiasResult bootstrap_debias(const std::vector<double>& effects, const SweetSpotLocation& loc,
                              const ScanConstraints& c, size_t n_bootstraps, const Rng& stream,
                              size_t n_threads = 1, ResampleMode mode = ResampleMode::bootstrap);

}  // namespace sweetspot
