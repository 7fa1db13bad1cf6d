#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace speechalign::utf8 {

// Decodes UTF-8 into code points. Throws ValidationError on malformed input
// (overlong forms, surrogates, truncated sequences, values above U+10FFFF).
std::vector<char32_t> decode(std::string_view text);

void append(std::string& out, char32_t cp);
std::string encode(const std::vector<char32_t>& cps);
std::string encode(char32_t cp);

bool is_valid(std::string_view text);

}  // namespace speechalign::utf8
