#include "sweetspot/matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "sweetspot/error.hpp"
#include "sweetspot/util.hpp"

namespace sweetspot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<size_t> sorted_order(const std::vector<ScoredPatient>& v) {
  std::vector<size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (v[a].score != v[b].score) return v[a].score < v[b].score;
    if (v[a].id != v[b].id) return v[a].id < v[b].id;
    return a < b;
  });
  return order;
}

// Non-crossing block DP over both lists sorted by score. State: first i
// treated, first j controls, d treated dropped so far. Each matched treated
// takes k controls that are consecutive in sorted order; for L1 costs on a
// scalar score an optimal assignment of this shape always exists.
std::vector<MatchedSet> match_core(const std::vector<ScoredPatient>& controls,
                                   const std::vector<ScoredPatient>& treated, size_t k,
                                   size_t n_drop) {
  const std::vector<size_t> corder = sorted_order(controls);
  const std::vector<size_t> torder = sorted_order(treated);
  const size_t nc = controls.size();
  const size_t nt = treated.size();
  const size_t nd = n_drop;

  std::vector<double> cscore(nc);
  for (size_t j = 0; j < nc; ++j) cscore[j] = controls[corder[j]].score;
  std::vector<double> tscore(nt);
  for (size_t i = 0; i < nt; ++i) tscore[i] = treated[torder[i]].score;

  const size_t dlen = nd + 1;
  const size_t row = (nc + 1) * dlen;
  const size_t choice_bytes = (nt + 1) * row;
  if (choice_bytes > (size_t{1} << 29)) {
    throw ValidationError("matching instance too large (" + std::to_string(nt) + " treated x " +
                          std::to_string(nc) + " controls with " + std::to_string(nd) +
                          " surplus)");
  }

  std::vector<double> prev(row, kInf), cur(row, kInf);
  // choices: 0 = leave control j unused, 1 = drop treated i, 2 = match
  // treated i to controls j-k+1..j. 255 = unreachable.
  std::vector<uint8_t> choice(choice_bytes, 255);
  const auto at = [&](std::vector<double>& a, size_t j, size_t d) -> double& {
    return a[j * dlen + d];
  };

  for (size_t j = 0; j <= nc; ++j) at(prev, j, 0) = 0.0;

  for (size_t i = 1; i <= nt; ++i) {
    std::fill(cur.begin(), cur.end(), kInf);
    uint8_t* crow = choice.data() + i * row;
    const double t = tscore[i - 1];
    for (size_t j = 0; j <= nc; ++j) {
      double block_cost = kInf;
      if (j >= k) {
        block_cost = 0.0;
        for (size_t c = j - k; c < j; ++c) block_cost += std::abs(cscore[c] - t);
      }
      for (size_t d = 0; d < dlen; ++d) {
        double best = kInf;
        uint8_t pick = 255;
        if (j >= 1 && at(cur, j - 1, d) < best) {
          best = at(cur, j - 1, d);
          pick = 0;
        }
        if (d >= 1 && at(prev, j, d - 1) < best) {
          best = at(prev, j, d - 1);
          pick = 1;
        }
        if (j >= k && at(prev, j - k, d) + block_cost < best) {
          best = at(prev, j - k, d) + block_cost;
          pick = 2;
        }
        at(cur, j, d) = best;
        crow[j * dlen + d] = pick;
      }
    }
    std::swap(prev, cur);
  }

  if (!(at(prev, nc, nd) < kInf)) {
    throw ContractError("matching DP reached no feasible assignment");
  }

  std::vector<MatchedSet> sets;
  sets.reserve(nt - nd);
  size_t i = nt, j = nc, d = nd;
  while (i > 0) {
    const uint8_t pick = choice[i * row + j * dlen + d];
    if (pick == 0) {
      --j;
    } else if (pick == 1) {
      --i;
      --d;
    } else if (pick == 2) {
      MatchedSet set;
      const ScoredPatient& tp = treated[torder[i - 1]];
      set.treated_id = tp.id;
      set.treated_index = tp.patient_index;
      double sum = tp.score;
      for (size_t c = j - k; c < j; ++c) {
        const ScoredPatient& cp = controls[corder[c]];
        set.control_ids.push_back(cp.id);
        set.control_indices.push_back(cp.patient_index);
        sum += cp.score;
      }
      set.mean_score = sum / static_cast<double>(k + 1);
      sets.push_back(std::move(set));
      --i;
      j -= k;
    } else {
      throw ContractError("matching DP backtrack hit an unreachable state");
    }
  }
  std::reverse(sets.begin(), sets.end());
  return sets;
}

}  // namespace

std::vector<MatchedSet> optimal_match(const std::vector<ScoredPatient>& controls,
                                      const std::vector<ScoredPatient>& treated, size_t k) {
  if (k < 1) throw ValidationError("match ratio k must be >= 1");
  if (treated.empty()) throw ValidationError("no treated patients to match");
  if (controls.size() < k * treated.size()) {
    throw InfeasibleError("need " + std::to_string(k * treated.size()) + " controls for " +
                          std::to_string(treated.size()) + " treated at ratio " +
                          std::to_string(k) + ":1, have " + std::to_string(controls.size()) +
                          " (deficit " + std::to_string(k * treated.size() - controls.size()) +
                          ")");
  }
  return match_core(controls, treated, k, 0);
}

std::vector<MatchedSet> optimal_match_drop_surplus(const std::vector<ScoredPatient>& controls,
                                                   const std::vector<ScoredPatient>& treated,
                                                   size_t k, size_t& n_dropped) {
  if (k < 1) throw ValidationError("match ratio k must be >= 1");
  if (treated.empty()) throw ValidationError("no treated patients to match");
  const size_t m = controls.size() / k;
  if (m == 0) {
    throw InfeasibleError("fewer than " + std::to_string(k) +
                          " controls; no matched set can be formed");
  }
  if (m >= treated.size()) {
    n_dropped = 0;
    return match_core(controls, treated, k, 0);
  }
  n_dropped = treated.size() - m;
  return match_core(controls, treated, k, n_dropped);
}

double matching_total_cost(const std::vector<MatchedSet>& sets,
                           const std::vector<ScoredPatient>& controls,
                           const std::vector<ScoredPatient>& treated) {
  std::unordered_map<size_t, double> score;
  for (const auto& c : controls) score[c.patient_index] = c.score;
  for (const auto& t : treated) score[t.patient_index] = t.score;
  double total = 0.0;
  for (const auto& set : sets) {
    const auto t = score.find(set.treated_index);
    if (t == score.end()) throw IntegrityError("matched set references unknown treated patient");
    for (size_t c : set.control_indices) {
      const auto it = score.find(c);
      if (it == score.end()) throw IntegrityError("matched set references unknown control");
      total += std::abs(it->second - t->second);
    }
  }
  return total;
}

EffectSequence compute_effects(const std::vector<MatchedSet>& sets, const TrialDataset& dataset) {
  if (sets.size() < 2) {
    throw ValidationError("need at least 2 matched sets, have " + std::to_string(sets.size()));
  }
  const size_t n = dataset.patients.size();
  std::vector<size_t> order(sets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (sets[a].mean_score != sets[b].mean_score) return sets[a].mean_score < sets[b].mean_score;
    if (sets[a].treated_id != sets[b].treated_id) return sets[a].treated_id < sets[b].treated_id;
    return a < b;
  });

  EffectSequence seq;
  seq.effects.reserve(sets.size());
  seq.scores.reserve(sets.size());
  seq.sets.reserve(sets.size());
  for (size_t s : order) {
    MatchedSet set = sets[s];
    if (set.treated_index >= n || !dataset.patients[set.treated_index].treated) {
      throw IntegrityError("matched set '" + set.treated_id +
                           "' references a missing or non-treated patient");
    }
    if (set.control_indices.empty()) {
      throw IntegrityError("matched set '" + set.treated_id + "' has no controls");
    }
    double csum = 0.0;
    for (size_t c : set.control_indices) {
      if (c >= n || dataset.patients[c].treated) {
        throw IntegrityError("matched set '" + set.treated_id +
                             "' references a missing or non-control patient");
      }
      csum += dataset.patients[c].outcome;
    }
    const double d = dataset.patients[set.treated_index].outcome -
                     csum / static_cast<double>(set.control_indices.size());
    set.effect = dataset.outcome_direction == OutcomeDirection::higher_is_better ? d : -d;
    if (set.effect == 0.0) set.effect = 0.0;  // never emit negative zero
    seq.effects.push_back(set.effect);
    seq.scores.push_back(set.mean_score);
    seq.sets.push_back(std::move(set));
  }
  return seq;
}

void write_matched_sets_csv(const std::vector<MatchedSet>& sets, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "treated_id,control_ids,mean_score,effect\n";
  char buf[32];
  for (const auto& set : sets) {
    out << set.treated_id << ',';
    for (size_t i = 0; i < set.control_ids.size(); ++i) {
      if (i) out << ';';
      out << set.control_ids[i];
    }
    std::snprintf(buf, sizeof(buf), "%.17g", set.mean_score);
    out << ',' << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", set.effect);
    out << ',' << buf << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace sweetspot
