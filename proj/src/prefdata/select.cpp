#include "speechalign/prefdata/select.hpp"

#include <cmath>

#include "speechalign/common/error.hpp"

namespace speechalign::prefdata {

void FilterConfig::validate() const {
  if (!(min_max_score >= 0.0 && min_max_score <= 100.0)) {
    throw ValidationError("min_max_score must lie in [0, 100]");
  }
  if (!(margin_factor > 1.0) || !std::isfinite(margin_factor)) {
    throw ValidationError("margin_factor must be greater than 1");
  }
}

std::string_view to_string(GroupOutcome o) {
  switch (o) {
    case GroupOutcome::kPaired: return "paired";
    case GroupOutcome::kMaxBelowThreshold: return "max_below_threshold";
    case GroupOutcome::kNoQualifyingRejected: return "no_qualifying_rejected";
  }
  return "?";
}

std::map<std::string, std::size_t> Selection::outcome_histogram() const {
  std::map<std::string, std::size_t> h;
  for (auto o : outcomes) ++h[std::string(to_string(o))];
  return h;
}

void validate_pair(const CuratedPair& pair, const FilterConfig& cfg) {
  if (pair.chosen.instruction_id != pair.instruction_id ||
      pair.rejected.instruction_id != pair.instruction_id) {
    throw ValidationError("curated pair mixes instructions");
  }
  if (!(pair.chosen.score >= cfg.min_max_score)) {
    throw ValidationError("curated pair chosen score below min_max_score");
  }
  if (!(pair.rejected.score * cfg.margin_factor < pair.chosen.score)) {
    throw ValidationError("curated pair violates the margin inequality");
  }
}

Selection select_pairs_detailed(std::span<const RolloutGroup> groups, const FilterConfig& cfg) {
  cfg.validate();
  Selection sel;
  sel.outcomes.reserve(groups.size());
  for (const auto& g : groups) {
    if (g.rollouts.empty()) throw ValidationError("instruction " + g.instruction_id + " has no rollouts");
    for (const auto& r : g.rollouts) r.validate();

    std::size_t best = 0;
    for (std::size_t i = 1; i < g.rollouts.size(); ++i) {
      if (g.rollouts[i].score > g.rollouts[best].score) best = i;
    }
    const auto& chosen = g.rollouts[best];
    if (chosen.score < cfg.min_max_score) {
      sel.outcomes.push_back(GroupOutcome::kMaxBelowThreshold);
      continue;
    }

    std::vector<std::size_t> qualifying;
    for (std::size_t i = 0; i < g.rollouts.size(); ++i) {
      if (i != best && g.rollouts[i].score * cfg.margin_factor < chosen.score) {
        qualifying.push_back(i);
      }
    }
    if (qualifying.empty()) {
      sel.outcomes.push_back(GroupOutcome::kNoQualifyingRejected);
      continue;
    }
    // Lowest score first; stable so the earlier rollout wins ties.
    std::stable_sort(qualifying.begin(), qualifying.end(), [&](std::size_t a, std::size_t b) {
      return g.rollouts[a].score < g.rollouts[b].score;
    });
    if (!cfg.all_rejected) qualifying.resize(1);
    for (std::size_t i : qualifying) {
      CuratedPair pair{g.instruction_id, g.instruction, chosen, g.rollouts[i]};
      pair.chosen.instruction_id = g.instruction_id;
      pair.rejected.instruction_id = g.instruction_id;
      validate_pair(pair, cfg);
      sel.pairs.push_back(std::move(pair));
    }
    sel.outcomes.push_back(GroupOutcome::kPaired);
  }
  return sel;
}

std::vector<CuratedPair> select_pairs(std::span<const RolloutGroup> groups, const FilterConfig& cfg) {
  return select_pairs_detailed(groups, cfg).pairs;
}

align::PreferenceText to_preference(const CuratedPair& pair) {
  return {pair.instruction_id, pair.instruction, pair.chosen.text, pair.rejected.text};
}

}  // namespace speechalign::prefdata
