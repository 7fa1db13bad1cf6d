#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "speechalign/judge/judge.hpp"

namespace speechalign::prefdata {

// One scored rollout; score is S in [0, 100].
struct RolloutRecord {
  std::string instruction_id;
  std::string text;
  double score = 0.0;

  void validate() const;
};

struct RolloutGroup {
  std::string instruction_id;
  std::string instruction;
  std::vector<RolloutRecord> rollouts;
};

// Input as read from disk, where scores may still be missing.
struct DraftRollout {
  std::string text;
  std::optional<double> score;
};

struct DraftGroup {
  std::string instruction_id;
  std::string instruction;
  std::vector<DraftRollout> rollouts;
};

// JSONL: {"instruction_id", "instruction", "rollouts": [{"text", "score"?}]}
std::vector<DraftGroup> read_rollouts(const std::filesystem::path& path);
DraftGroup draft_from_json(const nlohmann::json& j);
nlohmann::json group_to_json(const RolloutGroup& g);

bool fully_scored(std::span<const DraftGroup> groups);
// Requires every rollout to carry a score.
std::vector<RolloutGroup> to_scored(std::span<const DraftGroup> groups);

struct ScoringFailure {
  std::string instruction_id;
  std::size_t rollout_index = 0;
  std::string error;
};

struct ScoringResult {
  std::vector<RolloutGroup> groups;
  std::vector<ScoringFailure> failures;
};

// Scores every rollout that lacks a score. A rollout whose scoring fails is
// dropped from its group and recorded as a failure; other rollouts are
// unaffected. Requests run on at most `concurrency` threads.
ScoringResult score_rollouts(std::span<const DraftGroup> groups, judge::SuitabilityScorer& scorer,
                             std::size_t concurrency = 4);

}  // namespace speechalign::prefdata
