#pragma once

#include <string>
#include <string_view>

#include "speechalign/judge/benchmark.hpp"
#include "speechalign/judge/rubric.hpp"

namespace speechalign::judge {

// Scores are only comparable between runs that used the same template version.
inline constexpr std::string_view kJudgeTemplateVersion = "speech-judge-v1";
inline constexpr std::string_view kSuitabilityTemplateVersion = "speech-suitability-v1";

inline constexpr std::string_view kScoreOpen = "<score>";
inline constexpr std::string_view kScoreClose = "</score>";

inline constexpr std::string_view kJudgeSystemMessage =
    "You are a strict evaluator of Japanese spoken-dialog responses. Follow the rubric "
    "exactly and answer with the score inside <score></score> tags.";

// Deterministic 1-5 judging prompt: rubric levels in ascending order, the
// instruction, the reference response, per-item deductions with the score
// floor, and the candidate.
std::string build_prompt(const BenchmarkItem& item, std::string_view candidate,
                         const RubricSpec& rubric);

// 0-100 speech-suitability prompt used to score rollouts. `instruction` may
// be empty.
std::string build_suitability_prompt(std::string_view instruction, std::string_view candidate);

// Constraints given to an external LLM when rewriting written-style answers
// into speech-worthy ones. Shipped as a documented asset; not used by the
// evaluation path.
std::string_view style_transfer_constraints();

}  // namespace speechalign::judge
