#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sweetspot/error.hpp"
#include "sweetspot/inference.hpp"
#include "sweetspot/rng.hpp"
#include "sweetspot/util.hpp"

using namespace sweetspot;

namespace {

// Small exact maximizer with the kernel's shift arithmetic and (i, j)
// tie-break, for cross-checking replicate scans.
ScanHit tiny_scan(const std::vector<double>& t, const ScanConstraints& c) {
  const size_t n = t.size();
  const auto [lo, hi] = c.resolve_bounds(n);
  std::vector<double> cum(n + 1, 0.0);
  for (size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + t[i];
  ScanHit best;
  bool have = false;
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = i; j <= n; ++j) {
      const size_t len = j - i + 1;
      if (len < lo || len > hi || (len - lo) % c.stride != 0) continue;
      const double z = cum[j] - cum[i - 1] - double(len) * (cum[n] / double(n));
      if (!have || z > best.z) {
        best = {i, j, z};
        have = true;
      }
    }
  }
  return best;
}

SweetSpotLocation locate(const std::vector<double>& t, const ScanConstraints& c) {
  const auto hit = tiny_scan(t, c);
  SweetSpotLocation loc;
  loc.i_hat = hit.i;
  loc.j_hat = hit.j;
  loc.z_hat = z_statistic(t, hit.i, hit.j);
  return loc;
}

}  // namespace

TEST_CASE("estimator names round-trip") {
  CHECK(estimator_from_name("plugin") == PValueEstimator::plugin);
  CHECK(estimator_from_name("add_one") == PValueEstimator::add_one);
  CHECK(estimator_from_name("add-one") == PValueEstimator::add_one);
  CHECK(std::string(estimator_name(PValueEstimator::plugin)) == "plugin");
  CHECK(std::string(estimator_name(PValueEstimator::add_one)) == "add_one");
  CHECK_THROWS_AS(estimator_from_name("exact"), ValidationError);
}

TEST_CASE("naive cate splits inside and outside means") {
  const std::vector<double> t = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  const auto [inside, outside] = naive_cate(t, 3, 4);
  CHECK(inside == doctest::Approx(3.5).epsilon(1e-12));
  REQUIRE(outside.has_value());
  CHECK(*outside == doctest::Approx((1.0 + 2.0 + 5.0 + 6.0) / 4.0).epsilon(1e-12));

  const auto [all, none] = naive_cate(t, 1, 6);
  CHECK(all == doctest::Approx(3.5).epsilon(1e-12));
  CHECK_FALSE(none.has_value());
}

TEST_CASE("p-value arithmetic is exact") {
  // 1 exceedance out of 1000 permutations: plugin gives exactly 0.001.
  std::vector<double> null(1000, 0.0);
  null[317] = 9.0;
  CHECK(p_value_from_null(null, 5.0, PValueEstimator::plugin) == 0.001);
  CHECK(p_value_from_null(null, 5.0, PValueEstimator::add_one) == 2.0 / 1001.0);
  // Exceedance counts ties: z_hat equal to a null value counts it.
  CHECK(p_value_from_null(null, 9.0, PValueEstimator::plugin) == 0.001);
  CHECK(p_value_from_null(null, 9.5, PValueEstimator::plugin) == 0.0);
  CHECK(p_value_from_null(null, 9.5, PValueEstimator::add_one) == 1.0 / 1001.0);
  CHECK(p_value_from_null(null, -1.0, PValueEstimator::plugin) == 1.0);
}

TEST_CASE("permutation test: determinism, bounds, monotonicity, stored-null replay") {
  Rng root(421, 0);
  std::vector<double> effects(40);
  {
    Rng gen = root.derive("gen");
    for (auto& x : effects) x = gen.next_normal();
  }
  const ScanConstraints c;
  const double z_hat = z_statistic(effects, 5, 12);

  const auto r1 = permutation_test(effects, z_hat, c, 200, root.derive("perm"),
                                   PValueEstimator::plugin);
  const auto r2 = permutation_test(effects, z_hat, c, 200, root.derive("perm"),
                                   PValueEstimator::plugin);
  REQUIRE(r1.n_permutations == 200);
  CHECK(r1.p_value == r2.p_value);
  CHECK(r1.null_max_z == r2.null_max_z);

  CHECK(r1.p_value >= 0.0);
  CHECK(r1.p_value <= 1.0);

  // Recomputing from the stored null reproduces the reported p-value.
  CHECK(p_value_from_null(r1.null_max_z, r1.z_hat, r1.estimator) == r1.p_value);

  // A larger observed statistic can only shrink the p-value on the same null.
  const auto weaker = p_value_from_null(r1.null_max_z, z_hat - 1.0, PValueEstimator::plugin);
  const auto stronger = p_value_from_null(r1.null_max_z, z_hat + 1.0, PValueEstimator::plugin);
  CHECK(stronger <= r1.p_value);
  CHECK(r1.p_value <= weaker);

  // add_one never returns zero and exceeds plugin by construction.
  const auto a = permutation_test(effects, 1e9, c, 100, root.derive("perm2"),
                                  PValueEstimator::add_one);
  CHECK(a.p_value == 1.0 / 101.0);
}

TEST_CASE("constant effects make every permutation equivalent: p = 1") {
  const std::vector<double> effects(25, 0.4);
  const auto loc = locate(effects, ScanConstraints{});
  const auto r = permutation_test(effects, loc.z_hat, ScanConstraints{}, 120, Rng(3, 0),
                                  PValueEstimator::plugin);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("threaded permutation replicates the single-thread null exactly") {
  Rng root(5, 0);
  std::vector<double> effects(60);
  {
    Rng gen = root.derive("gen");
    for (auto& x : effects) x = gen.next_normal();
  }
  const double z_hat = z_statistic(effects, 10, 20);
  const auto one = permutation_test(effects, z_hat, ScanConstraints{}, 150, root.derive("p"),
                                    PValueEstimator::plugin, 1);
  const auto four = permutation_test(effects, z_hat, ScanConstraints{}, 150, root.derive("p"),
                                     PValueEstimator::plugin, 4);
  CHECK(one.null_max_z == four.null_max_z);
  CHECK(one.p_value == four.p_value);
}

TEST_CASE("bootstrap identities and determinism") {
  Rng root(777, 0);
  std::vector<double> effects(50);
  {
    Rng gen = root.derive("gen");
    for (auto& x : effects) x = gen.next_normal() * 0.5;
  }
  for (size_t k = 14; k < 26; ++k) effects[k] += 1.5;  // plant a spot
  const ScanConstraints c;
  const auto loc = locate(effects, c);

  const auto d1 = bootstrap_debias(effects, loc, c, 300, root.derive("boot"));
  const auto d2 = bootstrap_debias(effects, loc, c, 300, root.derive("boot"));
  CHECK(d1.boot_tau == d2.boot_tau);
  CHECK(d1.boot_i == d2.boot_i);

  // tau_hat and tau_outside are plain means over the original sequence.
  const auto [inside, outside] = naive_cate(effects, loc.i_hat, loc.j_hat);
  CHECK(d1.tau_hat == inside);
  REQUIRE(outside.has_value());
  CHECK(d1.tau_outside == *outside);

  // The reported aggregates satisfy their defining identities exactly.
  CHECK(d1.tau_boot_mean == mean(d1.boot_tau));
  CHECK(d1.bias_hat == d1.tau_boot_mean - d1.tau_hat);
  CHECK(d1.tau_corrected == 2.0 * d1.tau_hat - d1.tau_boot_mean);

  REQUIRE(d1.boot_i.size() == 300);
  for (size_t b = 0; b < 300; ++b) {
    CHECK(d1.boot_i[b] >= 1);
    CHECK(d1.boot_i[b] <= d1.boot_j[b]);
    CHECK(d1.boot_j[b] <= effects.size());
  }

  // Thread-count invariance.
  const auto d4 = bootstrap_debias(effects, loc, c, 300, root.derive("boot"), 4);
  CHECK(d4.boot_tau == d1.boot_tau);
}

TEST_CASE("worked example: correcting 0.123 by a 0.003 upward bias gives 0.120") {
  // mean tau over bootstraps 0.126 with tau_hat 0.123: correct down to 0.120.
  const double tau_hat = 0.123;
  const double tau_boot_mean = 0.126;
  CHECK(2.0 * tau_hat - tau_boot_mean == 0.120);
  CHECK(tau_boot_mean - tau_hat == doctest::Approx(0.003).epsilon(1e-12));
}

TEST_CASE("a constant pool has nothing to overfit: bias is exactly zero") {
  // Inside and outside pools are each constant, so every replicate equals the
  // original sequence and every replicate tau equals tau_hat.
  std::vector<double> effects(20, 0.0);
  for (size_t k = 6; k < 12; ++k) effects[k] = 2.0;
  const ScanConstraints c;
  const auto loc = locate(effects, c);
  REQUIRE(loc.i_hat == 7);
  REQUIRE(loc.j_hat == 12);
  const auto d = bootstrap_debias(effects, loc, c, 64, Rng(1, 0));
  CHECK(d.tau_hat == 2.0);
  CHECK(d.bias_hat == 0.0);
  CHECK(d.tau_corrected == 2.0);
  for (double t : d.boot_tau) CHECK(t == 2.0);
}

TEST_CASE("enumerate_all matches an independent exhaustive oracle") {
  // Spot {3, 1} at positions 1-2, outside {0, -2}: 2^2 * 2^2 = 16 replicates.
  const std::vector<double> effects = {3.0, 1.0, 0.0, -2.0};
  ScanConstraints c;
  c.min_len = 2;
  SweetSpotLocation loc;
  loc.i_hat = 1;
  loc.j_hat = 2;
  loc.z_hat = z_statistic(effects, 1, 2);

  REQUIRE(enumerate_all_count(2, 2) == 16);
  const auto d = bootstrap_debias(effects, loc, c, enumerate_all_count(2, 2), Rng(0, 0), 1,
                                  ResampleMode::enumerate_all);

  // Oracle: loop over every combination of inside and outside draws.
  const std::vector<double> inside_pool = {3.0, 1.0};
  const std::vector<double> outside_pool = {0.0, -2.0};
  std::vector<double> taus;
  std::vector<std::pair<size_t, size_t>> locs;
  for (size_t a0 = 0; a0 < 2; ++a0) {
    for (size_t a1 = 0; a1 < 2; ++a1) {
      for (size_t b0 = 0; b0 < 2; ++b0) {
        for (size_t b1 = 0; b1 < 2; ++b1) {
          const std::vector<double> star = {inside_pool[a0], inside_pool[a1], outside_pool[b0],
                                            outside_pool[b1]};
          const auto hit = tiny_scan(star, c);
          double s = 0.0;
          for (size_t k = hit.i; k <= hit.j; ++k) s += star[k - 1];
          taus.push_back(s / double(hit.j - hit.i + 1));
          locs.emplace_back(hit.i, hit.j);
        }
      }
    }
  }
  REQUIRE(d.boot_tau.size() == 16);

  // Replicate order is an implementation detail; compare as multisets.
  auto got_taus = d.boot_tau;
  std::sort(got_taus.begin(), got_taus.end());
  std::sort(taus.begin(), taus.end());
  for (size_t k = 0; k < 16; ++k) CHECK(got_taus[k] == doctest::Approx(taus[k]).epsilon(1e-12));

  std::vector<std::pair<size_t, size_t>> got_locs;
  for (size_t b = 0; b < 16; ++b) got_locs.emplace_back(d.boot_i[b], d.boot_j[b]);
  std::sort(got_locs.begin(), got_locs.end());
  std::sort(locs.begin(), locs.end());
  CHECK(got_locs == locs);

  CHECK(d.tau_boot_mean == doctest::Approx(mean(taus)).epsilon(1e-12));
}

TEST_CASE("enumerate_all_count guards against explosion") {
  CHECK(enumerate_all_count(1, 1) == 1);
  CHECK(enumerate_all_count(2, 3) == 4 * 27);
  CHECK_THROWS_AS(enumerate_all_count(10, 10), ValidationError);
}

TEST_CASE("full-coverage spots cannot be debiased") {
  const std::vector<double> effects = {1.0, 2.0, 3.0};
  SweetSpotLocation loc;
  loc.i_hat = 1;
  loc.j_hat = 3;
  CHECK_THROWS_AS(bootstrap_debias(effects, loc, ScanConstraints{}, 10, Rng(0, 0)),
                  InfeasibleError);
}

TEST_CASE("frozen-seed null regression: a pure-noise sequence is not significant") {
  // A fixed draw standing in for a null trial's effect sequence; the
  // observed spot must not clear alpha = 0.05 under 400 permutations.
  Rng root(20240817, 0);
  std::vector<double> effects(120);
  {
    Rng gen = root.derive("effects");
    for (auto& x : effects) x = gen.next_normal();
  }
  const ScanConstraints c;
  const auto loc = locate(effects, c);
  const auto r = permutation_test(effects, loc.z_hat, c, 400, root.derive("perm"),
                                  PValueEstimator::plugin);
  CHECK(r.p_value > 0.05);
}
