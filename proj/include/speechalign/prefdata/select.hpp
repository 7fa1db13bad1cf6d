#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "speechalign/align/preference.hpp"
#include "speechalign/prefdata/rollouts.hpp"

namespace speechalign::prefdata {

struct FilterConfig {
  // Instructions whose best rollout scores below this are discarded.
  double min_max_score = 90.0;
  // A rollout qualifies as rejected only if score * margin_factor < chosen score.
  double margin_factor = 1.5;
  // Emit one pair per qualifying rejected rollout instead of only the lowest.
  bool all_rejected = false;

  void validate() const;
};

struct CuratedPair {
  std::string instruction_id;
  std::string instruction;
  RolloutRecord chosen;
  RolloutRecord rejected;
};

enum class GroupOutcome { kPaired, kMaxBelowThreshold, kNoQualifyingRejected };

std::string_view to_string(GroupOutcome o);

struct Selection {
  std::vector<CuratedPair> pairs;
  std::vector<GroupOutcome> outcomes;  // one per input group

  std::map<std::string, std::size_t> outcome_histogram() const;
};

// Margin-based filtering. Per group: discard when the best score is below
// min_max_score; the chosen rollout is the highest-scoring one (first wins
// ties); the rejected rollout is the lowest-scoring rollout with
// score * margin_factor < chosen score (first wins ties). Output follows
// input group order. Every pair is re-validated before it is returned.
Selection select_pairs_detailed(std::span<const RolloutGroup> groups, const FilterConfig& cfg);
std::vector<CuratedPair> select_pairs(std::span<const RolloutGroup> groups, const FilterConfig& cfg);

// Throws ValidationError unless the pair satisfies both inequalities.
void validate_pair(const CuratedPair& pair, const FilterConfig& cfg);

align::PreferenceText to_preference(const CuratedPair& pair);

}  // namespace speechalign::prefdata
