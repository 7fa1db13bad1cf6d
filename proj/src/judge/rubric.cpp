#include "speechalign/judge/rubric.hpp"

#include <algorithm>
#include <set>

#include "speechalign/common/error.hpp"

namespace speechalign::judge {

RubricSpec::RubricSpec(std::vector<RubricLevel> levels) : levels_(std::move(levels)) {
  if (levels_.size() != 5) throw ValidationError("rubric must have exactly 5 levels");
  std::set<int> seen;
  for (const auto& l : levels_) {
    if (l.score < 1 || l.score > 5) throw ValidationError("rubric level score outside 1..5");
    if (!seen.insert(l.score).second) {
      throw ValidationError("rubric score " + std::to_string(l.score) + " appears twice");
    }
    if (l.description.empty()) throw ValidationError("rubric level without description");
  }
  std::sort(levels_.begin(), levels_.end(),
            [](const RubricLevel& a, const RubricLevel& b) { return a.score < b.score; });
}

RubricSpec RubricSpec::speech_worthiness() {
  return RubricSpec({
      {1, "Fatal Failure",
       "The response contains fundamental factual errors, hallucinations, or completely fails "
       "to follow the instruction."},
      {2, "Low Quality",
       "The response contains partial errors, incoherent Japanese, or excessive safety refusals "
       "(e.g., declining to answer harmless queries)."},
      {3, "Written Style",
       "The content is factually accurate, but the format is unsuitable for speech, containing "
       "markdown, bullet points, URLs, or visual references (e.g., \"as shown below\")."},
      {4, "Spoken Style",
       "The response is accurate and composed in natural spoken Japanese. It is free of "
       "non-verbalizable artifacts and structurally ready for synthesis."},
      {5, "Auditory Ideal",
       "In addition to meeting the Score 4 criteria, the response is stellar in its "
       "listenability. It uses short sentences to reduce cognitive load and incorporates "
       "natural conversational markers to enhance the tone."},
  });
}

RubricSpec RubricSpec::from_json(const nlohmann::json& j) {
  std::vector<RubricLevel> levels;
  try {
    for (const auto& l : j.at("levels")) {
      levels.push_back({l.at("score").get<int>(), l.value("title", std::string()),
                        l.at("description").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed rubric: ") + e.what());
  }
  return RubricSpec(std::move(levels));
}

nlohmann::json RubricSpec::to_json() const {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : levels_) {
    levels.push_back({{"score", l.score}, {"title", l.title}, {"description", l.description}});
  }
  return {{"levels", levels}};
}

}  // namespace speechalign::judge
