#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace speechalign::metrics {

// Surface forms for longest-match segmentation. Entries are non-empty,
// unique, contain no whitespace and are valid UTF-8.
class SegmenterLexicon {
 public:
  SegmenterLexicon() = default;
  explicit SegmenterLexicon(std::vector<std::string> entries);

  // One surface form per line; blank lines are skipped. Duplicates are an
  // error.
  static SegmenterLexicon load(const std::filesystem::path& path);
  static SegmenterLexicon parse(std::string_view text);

  bool contains(std::u32string_view form) const { return forms_.contains(std::u32string(form)); }
  std::size_t size() const { return entries_.size(); }
  std::size_t max_length() const { return max_len_; }
  const std::vector<std::string>& entries() const { return entries_; }

 private:
  std::vector<std::string> entries_;
  std::unordered_set<std::u32string> forms_;
  std::size_t max_len_ = 0;
};

// Pluggable backend: an external morphological analyzer can implement this.
class WordSegmenter {
 public:
  virtual ~WordSegmenter() = default;
  // Tokens in order, whitespace excluded.
  virtual std::vector<std::string> segment(std::string_view text) const = 0;
};

enum class ScriptClass { kHiragana, kKatakana, kKanji, kLatin, kDigit, kOther };

ScriptClass script_of(char32_t cp);

// Sentence punctuation that always forms its own token and splits spans.
bool is_sentence_boundary(char32_t cp);

// Greedy leftmost-longest match over the lexicon. Whitespace and sentence
// punctuation (。！？!?) are hard boundaries; the punctuation is emitted as a
// token, whitespace is dropped. Where no entry matches, the
// maximal run of one script class is taken, cut short where a lexicon entry
// would begin; characters of class kOther become single-character tokens.
class LongestMatchSegmenter final : public WordSegmenter {
 public:
  explicit LongestMatchSegmenter(std::shared_ptr<const SegmenterLexicon> lexicon);

  std::vector<std::string> segment(std::string_view text) const override;

 private:
  std::shared_ptr<const SegmenterLexicon> lexicon_;
};

std::size_t word_count(std::string_view text, const WordSegmenter& segmenter);
std::size_t word_count(std::string_view text, const SegmenterLexicon& lexicon);

}  // namespace speechalign::metrics
