#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace speechalign::judge {

struct RubricLevel {
  int score = 0;
  std::string title;
  std::string description;
};

// Five levels scored 1..5, each exactly once. Stored in ascending score order
// whatever order they were supplied in.
class RubricSpec {
 public:
  explicit RubricSpec(std::vector<RubricLevel> levels);

  // The speech-worthiness rubric: Fatal Failure, Low Quality, Written Style,
  // Spoken Style, Auditory Ideal.
  static RubricSpec speech_worthiness();
  static RubricSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const std::vector<RubricLevel>& levels() const { return levels_; }

 private:
  std::vector<RubricLevel> levels_;
};

}  // namespace speechalign::judge
