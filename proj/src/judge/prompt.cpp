#include "speechalign/judge/prompt.hpp"

namespace speechalign::judge {

std::string build_prompt(const BenchmarkItem& item, std::string_view candidate,
                         const RubricSpec& rubric) {
  std::string p;
  p += "[template ";
  p += kJudgeTemplateVersion;
  p += "]\n";
  p += "Evaluate the candidate response to a spoken instruction. The response will be "
       "converted to speech and heard, not read.\n\n";

  p += "## Scoring rubric\n";
  for (const auto& level : rubric.levels()) {
    p += "Score " + std::to_string(level.score);
    if (!level.title.empty()) p += " (" + level.title + ")";
    p += ": " + level.description + "\n";
  }

  p += "\n## Instruction\n";
  p += item.instruction;
  p += "\n\n## Reference response\n";
  p += item.reference_response.empty() ? std::string("(none)") : item.reference_response;
  p += "\n";

  if (!item.criteria.empty()) {
    p += "\n## Item-specific deductions\n";
    p += "Start from the maximum score of 5 and subtract the listed points for each aspect "
         "the candidate fails.\n";
    for (const auto& c : item.criteria) {
      p += "- " + c.description + " (-" + std::to_string(c.deduction) + ")\n";
    }
    p += "Even if every deduction applies, the score must not go below " +
         std::to_string(item.score_floor()) + " because of these deductions.\n";
  }

  p += "\n## Candidate response\n";
  p += candidate;
  p += "\n\n## Output format\n";
  p += "Give a short justification, then the final integer score from 1 to 5 exactly once as ";
  p += kScoreOpen;
  p += "N";
  p += kScoreClose;
  p += ".\n";
  return p;
}

std::string build_suitability_prompt(std::string_view instruction, std::string_view candidate) {
  std::string p;
  p += "[template ";
  p += kSuitabilityTemplateVersion;
  p += "]\n";
  p += "Rate how suitable the response is for being spoken aloud by a text-to-speech system "
       "in a Japanese voice conversation. 100 means concise, conversational, and free of "
       "markdown, lists, URLs, symbols, or visual references; 0 means unusable as speech.\n";
  if (!instruction.empty()) {
    p += "\n## Instruction\n";
    p += instruction;
    p += "\n";
  }
  p += "\n## Response\n";
  p += candidate;
  p += "\n\n## Output format\n";
  p += "Answer with a single integer from 0 to 100 as ";
  p += kScoreOpen;
  p += "N";
  p += kScoreClose;
  p += ".\n";
  return p;
}

std::string_view style_transfer_constraints() {
  return "Rewrite the response so that it can be understood purely by listening:\n"
         "1. Remove all markdown formatting and lists.\n"
         "2. Convert written-style predicates into polite spoken forms.\n"
         "3. Simplify complex nested sentences.\n"
         "4. Make the answer understandable through audio alone, without visual aids.\n";
}

}  // namespace speechalign::judge
