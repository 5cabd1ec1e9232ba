#include "sweetspot/inference.hpp"

#include <algorithm>
#include <cmath>

#include "sweetspot/error.hpp"
#include "sweetspot/parallel.hpp"
#include "sweetspot/util.hpp"

namespace sweetspot {

const char* estimator_name(PValueEstimator e) {
  return e == PValueEstimator::plugin ? "plugin" : "add_one";
}

PValueEstimator estimator_from_name(const std::string& name) {
  if (name == "plugin") return PValueEstimator::plugin;
  if (name == "add_one" || name == "add-one") return PValueEstimator::add_one;
  throw ValidationError("unknown p-value estimator '" + name + "' (plugin or add_one)");
}

std::pair<double, std::optional<double>> naive_cate(const std::vector<double>& t, size_t i,
                                                    size_t j) {
  const size_t n = t.size();
  if (i < 1 || i >= j || j > n) {
    throw ContractError("naive_cate needs 1 <= i < j <= n, got i=" + std::to_string(i) +
                        " j=" + std::to_string(j) + " n=" + std::to_string(n));
  }
  double inside = 0.0;
  for (size_t k = i - 1; k < j; ++k) inside += t[k];
  const double tau_in = inside / static_cast<double>(j - i + 1);
  if (j - i + 1 == n) return {tau_in, std::nullopt};
  double outside = 0.0;
  for (size_t k = 0; k + 1 < i; ++k) outside += t[k];
  for (size_t k = j; k < n; ++k) outside += t[k];
  return {tau_in, outside / static_cast<double>(n - (j - i + 1))};
}

double p_value_from_null(const std::vector<double>& null_max_z, double z_hat,
                         PValueEstimator estimator) {
  if (null_max_z.empty()) throw ContractError("empty null distribution");
  size_t exceed = 0;
  for (double z : null_max_z) {
    if (z >= z_hat) ++exceed;
  }
  const double b = static_cast<double>(null_max_z.size());
  if (estimator == PValueEstimator::plugin) return static_cast<double>(exceed) / b;
  return (static_cast<double>(exceed) + 1.0) / (b + 1.0);
}

PermutationResult permutation_test(const std::vector<double>& effects, double z_hat,
                                   const ScanConstraints& c, size_t n_permutations,
                                   const Rng& stream, PValueEstimator estimator,
                                   size_t n_threads) {
  if (n_permutations < 1) throw ValidationError("need at least one permutation");
  c.resolve_bounds(effects.size());  // fail fast before spawning work

  PermutationResult result;
  result.n_permutations = n_permutations;
  result.z_hat = z_hat;
  result.estimator = estimator;
  result.null_max_z.resize(n_permutations);

  parallel_for(n_permutations, n_threads, [&](size_t b) {
    Rng rng = stream.derive("replicate", b);
    std::vector<double> permuted = effects;
    shuffle(permuted, rng);
    ScanWorkspace ws;
    const ScanHit hit = scan_effects(permuted, c, ws);
    result.null_max_z[b] = z_statistic(permuted, hit.i, hit.j);
  });

  result.p_value = p_value_from_null(result.null_max_z, z_hat, estimator);
  return result;
}

size_t enumerate_all_count(size_t inside_size, size_t outside_size) {
  const auto pow_checked = [](size_t base, size_t exp, size_t cap) {
    size_t v = 1;
    for (size_t e = 0; e < exp; ++e) {
      if (v > cap / base) throw ValidationError("resample enumeration too large");
      v *= base;
    }
    return v;
  };
  constexpr size_t cap = size_t{1} << 22;
  const size_t a = pow_checked(inside_size, inside_size, cap);
  const size_t b = pow_checked(outside_size, outside_size, cap);
  if (a > cap / b) throw ValidationError("resample enumeration too large");
  return a * b;
}

DebiasResult bootstrap_debias(const std::vector<double>& effects, const SweetSpotLocation& loc,
                              const ScanConstraints& c, size_t n_bootstraps, const Rng& stream,
                              size_t n_threads, ResampleMode mode) {
  const size_t n = effects.size();
  if (n_bootstraps < 1) throw ValidationError("need at least one bootstrap replicate");
  if (loc.i_hat < 1 || loc.i_hat >= loc.j_hat || loc.j_hat > n) {
    throw ContractError("bootstrap location out of range");
  }
  const size_t inside_size = loc.j_hat - loc.i_hat + 1;
  if (inside_size == n) {
    throw InfeasibleError("sweet spot covers the whole sequence; no outside values to resample");
  }
  const size_t outside_size = n - inside_size;

  std::vector<double> inside_pool(effects.begin() + (loc.i_hat - 1), effects.begin() + loc.j_hat);
  std::vector<double> outside_pool;
  outside_pool.reserve(outside_size);
  for (size_t k = 0; k + 1 < loc.i_hat; ++k) outside_pool.push_back(effects[k]);
  for (size_t k = loc.j_hat; k < n; ++k) outside_pool.push_back(effects[k]);

  if (mode == ResampleMode::enumerate_all) {
    const size_t needed = enumerate_all_count(inside_size, outside_size);
    if (n_bootstraps != needed) {
      throw ValidationError("enumerate_all needs exactly " + std::to_string(needed) +
                            " replicates, got " + std::to_string(n_bootstraps));
    }
  }

  DebiasResult result;
  result.boot_i.resize(n_bootstraps);
  result.boot_j.resize(n_bootstraps);
  result.boot_tau.resize(n_bootstraps);

  parallel_for(n_bootstraps, n_threads, [&](size_t b) {
    std::vector<double> star(n);
    if (mode == ResampleMode::bootstrap) {
      Rng rng = stream.derive("replicate", b);
      for (size_t pos = 0; pos < n; ++pos) {
        const bool in = pos + 1 >= loc.i_hat && pos + 1 <= loc.j_hat;
        star[pos] = in ? inside_pool[rng.next_below(inside_size)]
                       : outside_pool[rng.next_below(outside_size)];
      }
    } else {
      // Mixed-radix decode of the replicate index: one digit per position,
      // inside positions first (base a), then outside positions (base b).
      size_t code = b;
      for (size_t pos = 0; pos < n; ++pos) {
        const bool in = pos + 1 >= loc.i_hat && pos + 1 <= loc.j_hat;
        if (!in) continue;
        star[pos] = inside_pool[code % inside_size];
        code /= inside_size;
      }
      for (size_t pos = 0; pos < n; ++pos) {
        const bool in = pos + 1 >= loc.i_hat && pos + 1 <= loc.j_hat;
        if (in) continue;
        star[pos] = outside_pool[code % outside_size];
        code /= outside_size;
      }
    }
    ScanWorkspace ws;
    const ScanHit hit = scan_effects(star, c, ws);
    double tau = 0.0;
    for (size_t k = hit.i - 1; k < hit.j; ++k) tau += star[k];
    result.boot_i[b] = hit.i;
    result.boot_j[b] = hit.j;
    result.boot_tau[b] = tau / static_cast<double>(hit.j - hit.i + 1);
  });

  const auto [tau_in, tau_out] = naive_cate(effects, loc.i_hat, loc.j_hat);
  result.tau_hat = tau_in;
  result.tau_outside = *tau_out;
  result.tau_boot_mean = mean(result.boot_tau);
  result.bias_hat = result.tau_boot_mean - result.tau_hat;
  result.tau_corrected = 2.0 * result.tau_hat - result.tau_boot_mean;
  return result;
}

}  // namespace sweetspot
