#include "speechalign/metrics/charclass.hpp"

#include <algorithm>
#include <charconv>

#include "speechalign/common/error.hpp"
#include "speechalign/common/jsonl.hpp"
#include "speechalign/common/utf8.hpp"

namespace speechalign::metrics {

namespace {

VocalizableTable build_default() {
  VocalizableTable t;
  t.add_range(U'0', U'9');
  t.add_range(U'A', U'Z');
  t.add_range(U'a', U'z');
  for (char32_t c : {U'.', U',', U'!', U'?', U'\''}) t.add(c);

  t.add_range(0x3041, 0x3096);  // hiragana
  t.add_range(0x309D, 0x309F);  // hiragana iteration marks
  t.add_range(0x30A1, 0x30FF);  // katakana incl. ・ and ー
  t.add_range(0x31F0, 0x31FF);  // small katakana extensions
  t.add_range(0x3400, 0x4DBF);  // CJK extension A
  t.add_range(0x4E00, 0x9FFF);  // CJK unified ideographs
  t.add_range(0xF900, 0xFAFF);  // CJK compatibility ideographs
  t.add(0x3005);                // 々

  for (char32_t c : {U'。', U'、', U'「', U'」', U'『', U'』'}) t.add(c);
  t.add(0xFF01);                // ！
  t.add(0xFF1F);                // ？
  t.add_range(0xFF10, 0xFF19);  // fullwidth digits
  t.add_range(0xFF21, 0xFF3A);
  t.add_range(0xFF41, 0xFF5A);
  t.add_range(0xFF66, 0xFF9F);  // half-width katakana
  return t;
}

char32_t parse_cp(std::string_view s, int line) {
  if (s.starts_with("U+") || s.starts_with("u+")) s.remove_prefix(2);
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty() || v > 0x10FFFF) {
    throw ValidationError("vocalizable table line " + std::to_string(line) +
                          ": bad code point '" + std::string(s) + "'");
  }
  return static_cast<char32_t>(v);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

const VocalizableTable& VocalizableTable::default_japanese() {
  static const VocalizableTable table = build_default();
  return table;
}

void VocalizableTable::add_range(char32_t lo, char32_t hi) {
  if (lo > hi || hi > 0x10FFFF) throw ValidationError("invalid code point range");
  ranges_.push_back({lo, hi});
  std::sort(ranges_.begin(), ranges_.end(),
            [](const CodeRange& a, const CodeRange& b) { return a.lo < b.lo; });
  std::vector<CodeRange> merged;
  for (const auto& r : ranges_) {
    if (!merged.empty() && r.lo <= merged.back().hi + 1) {
      merged.back().hi = std::max(merged.back().hi, r.hi);
    } else {
      merged.push_back(r);
    }
  }
  ranges_ = std::move(merged);
}

bool VocalizableTable::is_vocalizable(char32_t cp) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), cp,
                             [](char32_t c, const CodeRange& r) { return c < r.lo; });
  if (it == ranges_.begin()) return false;
  --it;
  return cp <= it->hi;
}

VocalizableTable VocalizableTable::parse(std::string_view text) {
  VocalizableTable t;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto dash = line.find('-');
    if (dash == std::string_view::npos) {
      t.add(parse_cp(line, line_no));
    } else {
      char32_t lo = parse_cp(trim(line.substr(0, dash)), line_no);
      char32_t hi = parse_cp(trim(line.substr(dash + 1)), line_no);
      if (lo > hi) {
        throw ValidationError("vocalizable table line " + std::to_string(line_no) + ": empty range");
      }
      t.add_range(lo, hi);
    }
  }
  if (t.ranges_.empty()) throw ValidationError("vocalizable table is empty");
  return t;
}

VocalizableTable VocalizableTable::load(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

bool is_whitespace(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\v':
    case U'\f':
    case 0x00A0:
    case 0x3000:
    case 0xFEFF:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200B;
  }
}

CharCounts count_chars(std::string_view text, const VocalizableTable& table) {
  CharCounts c;
  for (char32_t cp : utf8::decode(text)) {
    if (is_whitespace(cp)) continue;
    ++c.non_whitespace;
    if (!table.is_vocalizable(cp)) ++c.non_vocalizable;
  }
  return c;
}

double nv_percent(std::string_view text, const VocalizableTable& table) {
  CharCounts c = count_chars(text, table);
  if (c.non_whitespace == 0) return 0.0;
  return 100.0 * static_cast<double>(c.non_vocalizable) / static_cast<double>(c.non_whitespace);
}

}  // namespace speechalign::metrics
