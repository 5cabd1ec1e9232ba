#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sweetspot/predilection.hpp"
#include "sweetspot/trial_data.hpp"

namespace sweetspot {

// One matched set: a treated patient and its k controls.
struct MatchedSet {
  std::string treated_id;
  std::vector<std::string> control_ids;
  size_t treated_index = 0;             // dataset indices, for direct lookup
  std::vector<size_t> control_indices;
  double mean_score = 0.0;  // average predilection score of all k+1 members
  double effect = 0.0;      // the set's CATE, filled by compute_effects
};

// Matched-set effects and scores ordered by increasing mean score.
struct EffectSequence {
  std::vector<double> effects;  // t_1..t_n, benefit-positive orientation
  std::vector<double> scores;   // s_1..s_n, non-decreasing
  std::vector<MatchedSet> sets;

  size_t size() const { return effects.size(); }
};

// Optimal k:1 matching minimizing total |control score - treated score| over
// all feasible assignments. Exact for scalar scores via a non-crossing
// dynamic program on both lists sorted by score; surplus controls are left
// unmatched. Throws InfeasibleError when |controls| < k * |treated|.
std::vector<MatchedSet> optimal_match(const std::vector<ScoredPatient>& controls,
                                      const std::vector<ScoredPatient>& treated, size_t k);

// Variant for the opposite imbalance: when controls cannot cover every
// treated patient, match the floor(|controls| / k) treated patients that
// minimize total cost and leave the rest out. The choice of which treated to
// drop is part of the same optimization. n_dropped reports the surplus.
std::vector<MatchedSet> optimal_match_drop_surplus(const std::vector<ScoredPatient>& controls,
                                                   const std::vector<ScoredPatient>& treated,
                                                   size_t k, size_t& n_dropped);

double matching_total_cost(const std::vector<MatchedSet>& sets,
                           const std::vector<ScoredPatient>& controls,
                           const std::vector<ScoredPatient>& treated);

// Per-set CATE in benefit-positive orientation: d = treated outcome - mean
// control outcome; effect = +d when higher outcomes are better, -d when
// worse. Sets are ordered by (mean_score, treated_id).
EffectSequence compute_effects(const std::vector<MatchedSet>& sets, const TrialDataset& dataset);

void write_matched_sets_csv(const std::vector<MatchedSet>& sets, const std::string& path);

}  // namespace sweetspot
