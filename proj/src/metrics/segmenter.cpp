#include "speechalign/metrics/segmenter.hpp"

#include <algorithm>

#include "speechalign/common/error.hpp"
#include "speechalign/common/jsonl.hpp"
#include "speechalign/common/utf8.hpp"
#include "speechalign/metrics/charclass.hpp"

namespace speechalign::metrics {

SegmenterLexicon::SegmenterLexicon(std::vector<std::string> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.empty()) throw ValidationError("lexicon entry is empty");
    std::vector<char32_t> cps = utf8::decode(e);
    for (char32_t cp : cps) {
      if (is_whitespace(cp)) throw ValidationError("lexicon entry contains whitespace: '" + e + "'");
    }
    std::u32string form(cps.begin(), cps.end());
    if (!forms_.insert(form).second) throw ValidationError("duplicate lexicon entry: '" + e + "'");
    max_len_ = std::max(max_len_, form.size());
  }
}

SegmenterLexicon SegmenterLexicon::parse(std::string_view text) {
  std::vector<std::string> entries;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    entries.emplace_back(line);
  }
  return SegmenterLexicon(std::move(entries));
}

SegmenterLexicon SegmenterLexicon::load(const std::filesystem::path& path) {
  try {
    return parse(read_text_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

ScriptClass script_of(char32_t cp) {
  if ((cp >= 0x3041 && cp <= 0x309F)) return ScriptClass::kHiragana;
  if ((cp >= 0x30A1 && cp <= 0x30FA) || cp == 0x30FC || (cp >= 0x31F0 && cp <= 0x31FF) ||
      (cp >= 0xFF66 && cp <= 0xFF9F)) {
    return ScriptClass::kKatakana;
  }
  if ((cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
      (cp >= 0xF900 && cp <= 0xFAFF) || cp == 0x3005) {
    return ScriptClass::kKanji;
  }
  if ((cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z') || (cp >= 0xFF21 && cp <= 0xFF3A) ||
      (cp >= 0xFF41 && cp <= 0xFF5A)) {
    return ScriptClass::kLatin;
  }
  if ((cp >= U'0' && cp <= U'9') || (cp >= 0xFF10 && cp <= 0xFF19)) return ScriptClass::kDigit;
  return ScriptClass::kOther;
}

bool is_sentence_boundary(char32_t cp) {
  return cp == U'。' || cp == 0xFF01 || cp == 0xFF1F || cp == U'!' || cp == U'?';
}

LongestMatchSegmenter::LongestMatchSegmenter(std::shared_ptr<const SegmenterLexicon> lexicon)
    : lexicon_(std::move(lexicon)) {
  if (!lexicon_) throw ValidationError("segmenter requires a lexicon");
}

namespace {

// Length of the longest lexicon entry starting at span[i], 0 if none.
std::size_t match_at(const SegmenterLexicon& lex, std::u32string_view span, std::size_t i) {
  std::size_t limit = std::min(lex.max_length(), span.size() - i);
  for (std::size_t len = limit; len > 0; --len) {
    if (lex.contains(span.substr(i, len))) return len;
  }
  return 0;
}

void segment_span(const SegmenterLexicon& lex, std::u32string_view span,
                  std::vector<std::string>& out) {
  std::vector<std::size_t> match(span.size());
  for (std::size_t i = 0; i < span.size(); ++i) match[i] = match_at(lex, span, i);

  std::size_t i = 0;
  while (i < span.size()) {
    std::size_t len = match[i];
    if (len == 0) {
      ScriptClass cls = script_of(span[i]);
      len = 1;
      if (cls != ScriptClass::kOther) {
        while (i + len < span.size() && script_of(span[i + len]) == cls && match[i + len] == 0) ++len;
      }
    }
    std::string tok;
    for (std::size_t k = i; k < i + len; ++k) utf8::append(tok, span[k]);
    out.push_back(std::move(tok));
    i += len;
  }
}

}  // namespace

std::vector<std::string> LongestMatchSegmenter::segment(std::string_view text) const {
  std::vector<char32_t> cps = utf8::decode(text);
  std::vector<std::string> out;
  std::u32string span;
  auto flush = [&] {
    if (!span.empty()) segment_span(*lexicon_, span, out);
    span.clear();
  };
  for (char32_t cp : cps) {
    if (is_whitespace(cp)) {
      flush();
    } else if (is_sentence_boundary(cp)) {
      flush();
      out.push_back(utf8::encode(cp));
    } else {
      span.push_back(cp);
    }
  }
  flush();
  return out;
}

std::size_t word_count(std::string_view text, const WordSegmenter& segmenter) {
  return segmenter.segment(text).size();
}

std::size_t word_count(std::string_view text, const SegmenterLexicon& lexicon) {
  LongestMatchSegmenter seg(std::shared_ptr<const SegmenterLexicon>(std::shared_ptr<void>{}, &lexicon));
  return seg.segment(text).size();
}

}  // namespace speechalign::metrics
