#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sweetspot/matching.hpp"

namespace sweetspot {

// Search constraints on the interval (i, j). Fractions, when set, override
// the corresponding length bounds. The stride applies to the interval length
// j - i (e.g. stride 2 with min_len 2 admits odd interval sizes only).
struct ScanConstraints {
  size_t min_len = 2;
  std::optional<size_t> max_len;
  size_t stride = 1;
  std::optional<double> min_fraction;
  std::optional<double> max_fraction;
  // Cumulative sums switch to compensated (Kahan) summation at this length.
  size_t compensated_threshold = 1'000'000;

  void validate() const;
  // Effective [min, max] interval size for a sequence of length n.
  // Throws InfeasibleError when no interval satisfies the constraints.
  std::pair<size_t, size_t> resolve_bounds(size_t n) const;
};

// The located sweet spot. Indices are 1-based into the effect sequence.
struct SweetSpotLocation {
  size_t i_hat = 0;
  size_t j_hat = 0;
  double z_hat = 0.0;
  double score_lo = 0.0;
  double score_hi = 0.0;

  size_t size() const { return j_hat - i_hat + 1; }
};

// Z(i, j) = (j-i+1) * (mean(t_i..t_j) - mean(t_1..t_n)), 1-based inclusive.
double z_statistic(const std::vector<double>& t, size_t i, size_t j);

// Bare maximizer over the effect vector; used by the inference hot loops.
struct ScanHit {
  size_t i = 0;  // 1-based
  size_t j = 0;
  double z = 0.0;
};

// Reusable buffer so permutation/bootstrap loops do not reallocate.
struct ScanWorkspace {
  std::vector<double> cum;
};

ScanHit scan_effects(const std::vector<double>& t, const ScanConstraints& c);
ScanHit scan_effects(const std::vector<double>& t, const ScanConstraints& c, ScanWorkspace& ws);

// Exhaustive search for the maximizing interval, ties broken by smallest i
// then smallest j. z_hat is recomputed through z_statistic at the maximizer.
SweetSpotLocation find_sweet_spot(const EffectSequence& seq, const ScanConstraints& c);

}  // namespace sweetspot
