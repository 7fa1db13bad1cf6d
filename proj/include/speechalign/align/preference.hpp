#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "speechalign/tinylm/model.hpp"
#include "speechalign/tinylm/vocab.hpp"

namespace speechalign::align {

// Raw-text preference record, one line of the preference JSONL:
//   {"id"?: string, "prompt": string, "chosen": string, "rejected": string}
struct PreferenceText {
  std::string id;
  std::string prompt;
  std::string chosen;
  std::string rejected;

  bool operator==(const PreferenceText&) const = default;
};

// (x, y_w, y_l) as token sequences.
struct PreferenceExample {
  std::string id;
  tinylm::TokenSequence prompt;
  tinylm::TokenSequence chosen;
  tinylm::TokenSequence rejected;
  tinylm::SequenceScoring scoring;
};

PreferenceText preference_from_json(const nlohmann::json& j);
nlohmann::json preference_to_json(const PreferenceText& p);
std::vector<PreferenceText> read_preferences(const std::filesystem::path& path);
void write_preferences(const std::filesystem::path& path, std::span<const PreferenceText> prefs,
                       const nlohmann::json* meta = nullptr);

// Prompt gets <bos>, responses get <eos>. Validates the result.
PreferenceExample tokenize(const PreferenceText& text, const tinylm::Vocab& vocab);
std::vector<PreferenceExample> tokenize_all(std::span<const PreferenceText> texts,
                                            const tinylm::Vocab& vocab);

// chosen != rejected, responses non-empty, prompt + response fits `context`.
void validate_example(const PreferenceExample& ex, int context);

// Same example with chosen and rejected swapped.
PreferenceExample swapped(const PreferenceExample& ex);

}  // namespace speechalign::align
