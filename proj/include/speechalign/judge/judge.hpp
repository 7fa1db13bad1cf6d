#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "speechalign/common/error.hpp"
#include "speechalign/judge/benchmark.hpp"
#include "speechalign/judge/endpoint.hpp"
#include "speechalign/judge/rubric.hpp"

namespace speechalign::judge {

struct RetryPolicy {
  int max_attempts = 3;
  int backoff_ms = 0;
};

// Returns the integer inside the last <score>...</score> region when it is a
// bare run of ASCII digits within [lo, hi]; nullopt otherwise.
std::optional<int> parse_delimited_score(std::string_view reply, int lo, int hi);

struct JudgeScore {
  std::string item_id;
  std::optional<int> score;
  std::string raw_output;
  int attempts = 0;
  std::string error;

  bool ok() const { return score.has_value(); }
};

// Asks the judge, retrying on transport or parse failure up to
// retry.max_attempts times. Never throws for endpoint problems; an exhausted
// item comes back with no score.
JudgeScore judge_one(const BenchmarkItem& item, std::string_view candidate,
                     const RubricSpec& rubric, ChatEndpoint& endpoint,
                     const RetryPolicy& retry = {});

struct EvalSummary {
  double mean = 0.0;
  std::size_t success_count = 0;
  std::size_t failure_count = 0;
  std::vector<JudgeScore> items;  // benchmark order

  // Mean rounded to two decimals, e.g. "3.44".
  std::string mean_text() const;
  nlohmann::json to_json() const;
};

class NoSuccessfulItems : public Error {
 public:
  using Error::Error;
};

struct EvalOptions {
  RetryPolicy retry;
  std::size_t concurrency = 4;
};

// Judges every item against candidates[item.id]. Failed items are excluded
// from the mean and counted. Throws ValidationError when a candidate is
// missing and NoSuccessfulItems when nothing could be scored.
EvalSummary evaluate_benchmark(std::span<const BenchmarkItem> items,
                               const std::map<std::string, std::string>& candidates,
                               const RubricSpec& rubric, ChatEndpoint& endpoint,
                               const EvalOptions& options = {});

struct SuitabilityScore {
  std::optional<int> score;  // 0..100
  std::string raw_output;
  int attempts = 0;
  std::string error;

  bool ok() const { return score.has_value(); }
};

// 0-100 speech-suitability score with the same retry contract as judge_one.
SuitabilityScore speech_suitability_score(std::string_view candidate, ChatEndpoint& endpoint,
                                          const RetryPolicy& retry = {},
                                          std::string_view instruction = {});

// Scoring interface consumed by rollout curation.
class SuitabilityScorer {
 public:
  virtual ~SuitabilityScorer() = default;
  virtual SuitabilityScore score(std::string_view instruction, std::string_view candidate) = 0;
};

class EndpointSuitabilityScorer : public SuitabilityScorer {
 public:
  EndpointSuitabilityScorer(ChatEndpoint& endpoint, RetryPolicy retry = {})
      : endpoint_(endpoint), retry_(retry) {}
  SuitabilityScore score(std::string_view instruction, std::string_view candidate) override {
    return speech_suitability_score(candidate, endpoint_, retry_, instruction);
  }

 private:
  ChatEndpoint& endpoint_;
  RetryPolicy retry_;
};

}  // namespace speechalign::judge
