#include "sweetspot/scan.hpp"

#include <algorithm>
#include <cmath>

#include "sweetspot/error.hpp"
#include "sweetspot/kernels.hpp"
#include "sweetspot/util.hpp"

namespace sweetspot {

void ScanConstraints::validate() const {
  if (min_len < 2) throw ValidationError("min_len must be >= 2");
  if (max_len && *max_len < min_len) throw ValidationError("max_len below min_len");
  if (stride < 1) throw ValidationError("stride must be >= 1");
  if (min_fraction && !(*min_fraction > 0.0 && *min_fraction <= 1.0)) {
    throw ValidationError("min_fraction outside (0, 1]");
  }
  if (max_fraction && !(*max_fraction > 0.0 && *max_fraction <= 1.0)) {
    throw ValidationError("max_fraction outside (0, 1]");
  }
  if (min_fraction && max_fraction && *min_fraction > *max_fraction) {
    throw ValidationError("min_fraction above max_fraction");
  }
}

std::pair<size_t, size_t> ScanConstraints::resolve_bounds(size_t n) const {
  validate();
  size_t lo = std::max<size_t>(min_len, 2);
  if (min_fraction) {
    lo = std::max(lo, static_cast<size_t>(std::ceil(*min_fraction * static_cast<double>(n))));
  }
  size_t hi = n;
  if (max_len) hi = std::min(hi, *max_len);
  if (max_fraction) {
    hi = std::min(hi, static_cast<size_t>(std::floor(*max_fraction * static_cast<double>(n))));
  }
  if (n < 2 || lo > hi) {
    throw InfeasibleError("no interval of a feasible size in a sequence of length " +
                          std::to_string(n));
  }
  return {lo, hi};
}

double z_statistic(const std::vector<double>& t, size_t i, size_t j) {
  const size_t n = t.size();
  if (i < 1 || i >= j || j > n) {
    throw ContractError("z_statistic needs 1 <= i < j <= n, got i=" + std::to_string(i) +
                        " j=" + std::to_string(j) + " n=" + std::to_string(n));
  }
  double inside = 0.0;
  for (size_t k = i - 1; k < j; ++k) inside += t[k];
  const double len = static_cast<double>(j - i + 1);
  return len * (inside / len - mean(t));
}

namespace {

void cumulative_sum(const std::vector<double>& t, bool compensated, std::vector<double>& cum) {
  const size_t n = t.size();
  cum.resize(n + 1);
  cum[0] = 0.0;
  if (!compensated) {
    for (size_t k = 0; k < n; ++k) cum[k + 1] = cum[k] + t[k];
    return;
  }
  double sum = 0.0, comp = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const double y = t[k] - comp;
    const double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
    cum[k + 1] = sum;
  }
}

}  // namespace

ScanHit scan_effects(const std::vector<double>& t, const ScanConstraints& c) {
  ScanWorkspace ws;
  return scan_effects(t, c, ws);
}

ScanHit scan_effects(const std::vector<double>& t, const ScanConstraints& c, ScanWorkspace& ws) {
  const size_t n = t.size();
  const auto [lo, hi] = c.resolve_bounds(n);
  cumulative_sum(t, n >= c.compensated_threshold, ws.cum);
  const double* cum = ws.cum.data();
  const double mean_all = cum[n] / static_cast<double>(n);

  ScanHit best;
  bool have = false;
  for (size_t len = lo; len <= hi; len += c.stride) {
    const size_t count = n - len + 1;
    const double shift = static_cast<double>(len) * mean_all;
    const kernels::PassResult pass = kernels::scan_pass(cum, count, len, shift);
    // Lengths ascend, so on a tie in (z, i) the earlier (smaller j) hit wins.
    if (!have || pass.z > best.z || (pass.z == best.z && pass.index + 1 < best.i)) {
      best.i = pass.index + 1;
      best.j = pass.index + len;
      best.z = pass.z;
      have = true;
    }
  }
  if (!have) throw InfeasibleError("no feasible interval under the scan constraints");
  return best;
}

SweetSpotLocation find_sweet_spot(const EffectSequence& seq, const ScanConstraints& c) {
  if (seq.effects.size() != seq.scores.size()) {
    throw ContractError("effect sequence has mismatched effects/scores lengths");
  }
  const ScanHit hit = scan_effects(seq.effects, c);
  SweetSpotLocation loc;
  loc.i_hat = hit.i;
  loc.j_hat = hit.j;
  // Keep the scan's own value: the permutation test compares permuted maxima
  // against z_hat with >=, and on discrete effects exact ties are common, so
  // both sides must come from identical arithmetic (z_statistic agrees only
  // to rounding).
  loc.z_hat = hit.z;
  loc.score_lo = seq.scores[hit.i - 1];
  loc.score_hi = seq.scores[hit.j - 1];
  return loc;
}

}  // namespace sweetspot
