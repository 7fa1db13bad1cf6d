#include "speechalign/align/preference.hpp"

#include "speechalign/common/error.hpp"
#include "speechalign/common/jsonl.hpp"

namespace speechalign::align {

PreferenceText preference_from_json(const nlohmann::json& j) {
  auto field = [&](const char* name) {
    if (!j.contains(name) || !j.at(name).is_string()) {
      throw ValidationError(std::string("preference record needs string field '") + name + "'");
    }
    return j.at(name).get<std::string>();
  };
  PreferenceText p;
  p.prompt = field("prompt");
  p.chosen = field("chosen");
  p.rejected = field("rejected");
  if (j.contains("id")) {
    p.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
  }
  return p;
}

nlohmann::json preference_to_json(const PreferenceText& p) {
  nlohmann::json j;
  if (!p.id.empty()) j["id"] = p.id;
  j["prompt"] = p.prompt;
  j["chosen"] = p.chosen;
  j["rejected"] = p.rejected;
  return j;
}

std::vector<PreferenceText> read_preferences(const std::filesystem::path& path) {
  std::vector<PreferenceText> out;
  std::size_t n = 0;
  for (const auto& j : read_jsonl(path)) {
    ++n;
    try {
      out.push_back(preference_from_json(j));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + " record " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_preferences(const std::filesystem::path& path, std::span<const PreferenceText> prefs,
                       const nlohmann::json* meta) {
  std::vector<nlohmann::json> lines;
  lines.reserve(prefs.size());
  for (const auto& p : prefs) lines.push_back(preference_to_json(p));
  write_jsonl(path, lines, meta);
}

PreferenceExample tokenize(const PreferenceText& text, const tinylm::Vocab& vocab) {
  PreferenceExample ex;
  ex.id = text.id;
  ex.prompt = tinylm::make_prompt(vocab, text.prompt);
  ex.chosen = tinylm::make_response(vocab, text.chosen);
  ex.rejected = tinylm::make_response(vocab, text.rejected);
  ex.scoring = {vocab.eos(), vocab.pad()};
  return ex;
}

std::vector<PreferenceExample> tokenize_all(std::span<const PreferenceText> texts,
                                            const tinylm::Vocab& vocab) {
  std::vector<PreferenceExample> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(tokenize(t, vocab));
  return out;
}

void validate_example(const PreferenceExample& ex, int context) {
  const std::string label = ex.id.empty() ? "preference example" : "preference example " + ex.id;
  if (ex.prompt.ids.empty()) throw ValidationError(label + ": empty prompt");
  if (ex.chosen.ids.empty() || ex.rejected.ids.empty()) {
    throw ValidationError(label + ": empty response");
  }
  if (ex.chosen.ids == ex.rejected.ids) {
    throw ValidationError(label + ": chosen and rejected are identical");
  }
  const auto limit = static_cast<std::size_t>(context);
  if (ex.prompt.ids.size() + ex.chosen.ids.size() > limit ||
      ex.prompt.ids.size() + ex.rejected.ids.size() > limit) {
    throw ValidationError(label + ": prompt + response exceeds context length " +
                          std::to_string(context));
  }
}

PreferenceExample swapped(const PreferenceExample& ex) {
  PreferenceExample s = ex;
  std::swap(s.chosen, s.rejected);
  return s;
}

}  // namespace speechalign::align
