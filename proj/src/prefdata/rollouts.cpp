#include "speechalign/prefdata/rollouts.hpp"

#include <cmath>
#include <mutex>

#include "speechalign/common/error.hpp"
#include "speechalign/common/jsonl.hpp"
#include "speechalign/common/parallel.hpp"

namespace speechalign::prefdata {

void RolloutRecord::validate() const {
  if (text.empty()) throw ValidationError("rollout for " + instruction_id + " has empty text");
  if (!(score >= 0.0 && score <= 100.0)) {
    throw ValidationError("rollout score for " + instruction_id + " outside [0, 100]");
  }
}

DraftGroup draft_from_json(const nlohmann::json& j) {
  DraftGroup g;
  try {
    const auto& id = j.at("instruction_id");
    g.instruction_id = id.is_string() ? id.get<std::string>() : id.dump();
    g.instruction = j.value("instruction", std::string());
    for (const auto& r : j.at("rollouts")) {
      DraftRollout d;
      d.text = r.at("text").get<std::string>();
      if (r.contains("score") && !r.at("score").is_null()) d.score = r.at("score").get<double>();
      g.rollouts.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed rollout group: ") + e.what());
  }
  if (g.rollouts.empty()) throw ValidationError("instruction " + g.instruction_id + " has no rollouts");
  for (const auto& r : g.rollouts) {
    if (r.text.empty()) throw ValidationError("instruction " + g.instruction_id + ": empty rollout text");
    if (r.score && !(*r.score >= 0.0 && *r.score <= 100.0)) {
      throw ValidationError("instruction " + g.instruction_id + ": score outside [0, 100]");
    }
  }
  return g;
}

std::vector<DraftGroup> read_rollouts(const std::filesystem::path& path) {
  std::vector<DraftGroup> groups;
  std::size_t n = 0;
  for (const auto& j : read_jsonl(path)) {
    ++n;
    try {
      groups.push_back(draft_from_json(j));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + " record " + std::to_string(n) + ": " + e.what());
    }
  }
  return groups;
}

nlohmann::json group_to_json(const RolloutGroup& g) {
  nlohmann::json rollouts = nlohmann::json::array();
  for (const auto& r : g.rollouts) rollouts.push_back({{"text", r.text}, {"score", r.score}});
  return {{"instruction_id", g.instruction_id}, {"instruction", g.instruction}, {"rollouts", rollouts}};
}

bool fully_scored(std::span<const DraftGroup> groups) {
  for (const auto& g : groups) {
    for (const auto& r : g.rollouts) {
      if (!r.score) return false;
    }
  }
  return true;
}

std::vector<RolloutGroup> to_scored(std::span<const DraftGroup> groups) {
  std::vector<RolloutGroup> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    RolloutGroup s{g.instruction_id, g.instruction, {}};
    for (const auto& r : g.rollouts) {
      if (!r.score) throw ValidationError("instruction " + g.instruction_id + " has an unscored rollout");
      s.rollouts.push_back({g.instruction_id, r.text, *r.score});
    }
    out.push_back(std::move(s));
  }
  return out;
}

ScoringResult score_rollouts(std::span<const DraftGroup> groups, judge::SuitabilityScorer& scorer,
                             std::size_t concurrency) {
  struct Job {
    std::size_t group;
    std::size_t rollout;
  };
  std::vector<Job> jobs;
  std::vector<std::vector<std::optional<double>>> scores(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].rollouts.empty()) {
      throw ValidationError("instruction " + groups[g].instruction_id + " has no rollouts");
    }
    scores[g].resize(groups[g].rollouts.size());
    for (std::size_t r = 0; r < groups[g].rollouts.size(); ++r) {
      if (groups[g].rollouts[r].score) {
        scores[g][r] = groups[g].rollouts[r].score;
      } else {
        jobs.push_back({g, r});
      }
    }
  }

  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), concurrency, [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto& group = groups[job.group];
    const auto result = scorer.score(group.instruction, group.rollouts[job.rollout].text);
    if (result.ok()) {
      scores[job.group][job.rollout] = static_cast<double>(*result.score);
    } else {
      errors[j] = result.error.empty() ? std::string("scoring failed") : result.error;
    }
  });

  ScoringResult out;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!errors[j].empty()) {
      out.failures.push_back({groups[jobs[j].group].instruction_id, jobs[j].rollout, errors[j]});
    }
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    RolloutGroup s{groups[g].instruction_id, groups[g].instruction, {}};
    for (std::size_t r = 0; r < groups[g].rollouts.size(); ++r) {
      if (scores[g][r]) s.rollouts.push_back({s.instruction_id, groups[g].rollouts[r].text, *scores[g][r]});
    }
    out.groups.push_back(std::move(s));
  }
  return out;
}

}  // namespace speechalign::prefdata
