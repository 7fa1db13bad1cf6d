#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace speechalign::metrics {

struct CodeRange {
  char32_t lo;
  char32_t hi;  // inclusive
};

// Which code points count as vocalizable when measuring NV%. Whitespace is
// neither vocalizable nor non-vocalizable: it is dropped from the denominator.
//
// The default table covers hiragana, katakana (with the prolonged sound mark
// and middle dot), CJK ideographs and the iteration mark, ASCII and
// fullwidth letters and digits, half-width katakana, the Japanese
// punctuation 。、！？「」『』 and ASCII . , ! ? '. Everything else (markdown
// markers, URL punctuation, brackets, math and box drawing) is
// non-vocalizable.
class VocalizableTable {
 public:
  VocalizableTable() = default;

  static const VocalizableTable& default_japanese();

  // File format: one entry per line, either a single code point or a range,
  // written as hex with an optional U+ prefix ("3041-3096", "U+30FC").
  // '#' starts a comment.
  static VocalizableTable load(const std::filesystem::path& path);
  static VocalizableTable parse(std::string_view text);

  void add_range(char32_t lo, char32_t hi);
  void add(char32_t cp) { add_range(cp, cp); }

  bool is_vocalizable(char32_t cp) const;
  const std::vector<CodeRange>& ranges() const { return ranges_; }

 private:
  std::vector<CodeRange> ranges_;  // sorted, non-overlapping
};

bool is_whitespace(char32_t cp);

struct CharCounts {
  std::size_t non_vocalizable = 0;
  std::size_t non_whitespace = 0;
};

CharCounts count_chars(std::string_view text, const VocalizableTable& table);

// 100 * non-vocalizable / non-whitespace; 0 for empty or all-whitespace text.
// Throws ValidationError on malformed UTF-8.
double nv_percent(std::string_view text,
                  const VocalizableTable& table = VocalizableTable::default_japanese());

}  // namespace speechalign::metrics
