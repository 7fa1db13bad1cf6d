#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace speechalign {

inline constexpr const char* kToolName = "speechalign";
inline constexpr const char* kToolVersion = "0.1.0";

// Every JSONL file written by the tools starts with one metadata record of the
// form {"_meta": {...}}. Readers skip it.
nlohmann::json make_meta(const nlohmann::json& config, std::uint64_t seed);

// Reads non-empty lines as JSON objects, skipping a leading "_meta" record.
// Errors carry the file name and 1-based line number.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<nlohmann::json>& records,
                 const nlohmann::json* meta = nullptr);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace speechalign
