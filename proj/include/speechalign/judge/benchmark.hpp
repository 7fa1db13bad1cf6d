#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace speechalign::judge {

inline constexpr int kMaxScore = 5;
inline constexpr int kMinScore = 1;

// One evaluation aspect, expressed as points deducted from the maximum score.
struct Criterion {
  std::string description;
  int deduction = 1;
};

// Benchmark JSONL record:
//   {"id", "instruction", "reference_response", "criteria": [{"description", "deduction"}]}
struct BenchmarkItem {
  std::string id;
  std::string instruction;
  std::string reference_response;
  std::vector<Criterion> criteria;

  int total_deduction() const;
  // Lowest score the judge may give when every deduction applies: max(1, 5 - d).
  int score_floor() const;
  // Each deduction must be in [1, 4] so that applying it alone leaves a score
  // inside [1, 5].
  void validate() const;
};

BenchmarkItem item_from_json(const nlohmann::json& j);
nlohmann::json item_to_json(const BenchmarkItem& item);
std::vector<BenchmarkItem> read_benchmark(const std::filesystem::path& path);

// Candidate JSONL: {"id", "response"}. Duplicate ids are rejected.
std::map<std::string, std::string> read_candidates(const std::filesystem::path& path);

}  // namespace speechalign::judge
