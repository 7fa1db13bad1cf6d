#include "speechalign/judge/judge.hpp"

#include <chrono>
#include <cstdio>
#include <thread>

#include "speechalign/common/parallel.hpp"
#include "speechalign/judge/prompt.hpp"

namespace speechalign::judge {

std::optional<int> parse_delimited_score(std::string_view reply, int lo, int hi) {
  const auto open = reply.rfind(kScoreOpen);
  if (open == std::string_view::npos) return std::nullopt;
  const auto start = open + kScoreOpen.size();
  const auto close = reply.find(kScoreClose, start);
  if (close == std::string_view::npos) return std::nullopt;
  const auto inner = reply.substr(start, close - start);
  // Bounded length keeps the accumulation below from overflowing.
  if (inner.empty() || inner.size() > 6) return std::nullopt;
  int value = 0;
  for (char c : inner) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
  }
  if (value < lo || value > hi) return std::nullopt;
  return value;
}

namespace {

struct Attempted {
  std::optional<int> score;
  std::string raw;
  int attempts = 0;
  std::string error;
};

Attempted ask_with_retry(ChatEndpoint& endpoint, const std::vector<ChatMessage>& messages, int lo,
                         int hi, const RetryPolicy& retry) {
  Attempted a;
  const int max_attempts = std::max(1, retry.max_attempts);
  while (a.attempts < max_attempts) {
    if (a.attempts > 0 && retry.backoff_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(retry.backoff_ms * a.attempts));
    }
    ++a.attempts;
    try {
      a.raw = endpoint.complete(messages);
    } catch (const TransportError& e) {
      a.error = e.what();
      continue;
    }
    a.score = parse_delimited_score(a.raw, lo, hi);
    if (a.score) {
      a.error.clear();
      return a;
    }
    a.error = "no valid score in [" + std::to_string(lo) + ", " + std::to_string(hi) +
              "] inside <score></score>";
  }
  return a;
}

}  // namespace

JudgeScore judge_one(const BenchmarkItem& item, std::string_view candidate,
                     const RubricSpec& rubric, ChatEndpoint& endpoint, const RetryPolicy& retry) {
  const std::vector<ChatMessage> messages{
      {"system", std::string(kJudgeSystemMessage)},
      {"user", build_prompt(item, candidate, rubric)}};
  auto a = ask_with_retry(endpoint, messages, kMinScore, kMaxScore, retry);
  return {item.id, a.score, std::move(a.raw), a.attempts, std::move(a.error)};
}

std::string EvalSummary::mean_text() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", mean);
  return buf;
}

nlohmann::json EvalSummary::to_json() const {
  nlohmann::json items_json = nlohmann::json::array();
  for (const auto& s : items) {
    nlohmann::json j{{"id", s.item_id}, {"attempts", s.attempts}, {"raw_output", s.raw_output}};
    j["score"] = s.score ? nlohmann::json(*s.score) : nlohmann::json(nullptr);
    if (!s.error.empty()) j["error"] = s.error;
    items_json.push_back(std::move(j));
  }
  return {{"mean", mean},
          {"mean_2dp", mean_text()},
          {"success_count", success_count},
          {"failure_count", failure_count},
          {"items", items_json}};
}

EvalSummary evaluate_benchmark(std::span<const BenchmarkItem> items,
                               const std::map<std::string, std::string>& candidates,
                               const RubricSpec& rubric, ChatEndpoint& endpoint,
                               const EvalOptions& options) {
  if (items.empty()) throw ValidationError("benchmark is empty");
  for (const auto& item : items) {
    if (candidates.find(item.id) == candidates.end()) {
      throw ValidationError("no candidate response for benchmark item " + item.id);
    }
  }
  EvalSummary summary;
  summary.items.resize(items.size());
  parallel_for(items.size(), options.concurrency, [&](std::size_t i) {
    summary.items[i] =
        judge_one(items[i], candidates.at(items[i].id), rubric, endpoint, options.retry);
  });
  // Aggregate in benchmark order after the join so the result does not
  // depend on completion order.
  long total = 0;
  for (const auto& s : summary.items) {
    if (s.ok()) {
      total += *s.score;
      ++summary.success_count;
    } else {
      ++summary.failure_count;
    }
  }
  if (summary.success_count == 0) {
    throw NoSuccessfulItems("no benchmark item could be scored (" +
                            std::to_string(summary.failure_count) + " failures)");
  }
  summary.mean = static_cast<double>(total) / static_cast<double>(summary.success_count);
  return summary;
}

SuitabilityScore speech_suitability_score(std::string_view candidate, ChatEndpoint& endpoint,
                                          const RetryPolicy& retry, std::string_view instruction) {
  const std::vector<ChatMessage> messages{
      {"system", std::string(kJudgeSystemMessage)},
      {"user", build_suitability_prompt(instruction, candidate)}};
  auto a = ask_with_retry(endpoint, messages, 0, 100, retry);
  return {a.score, std::move(a.raw), a.attempts, std::move(a.error)};
}

}  // namespace speechalign::judge
