#include <cstdio>
#include <fstream>
#include <sstream>

#include "speechalign/common/error.hpp"
#include "speechalign/common/hash.hpp"
#include "speechalign/common/jsonl.hpp"

namespace speechalign {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

nlohmann::json make_meta(const nlohmann::json& config, std::uint64_t seed) {
  return {{"_meta",
           {{"tool", kToolName},
            {"version", kToolVersion},
            {"config_hash", hex64(fnv1a64(config.dump()))},
            {"seed", seed}}}};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<nlohmann::json> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object()) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": expected a JSON object");
    }
    if (j.contains("_meta")) continue;
    records.push_back(std::move(j));
  }
  return records;
}

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<nlohmann::json>& records,
                 const nlohmann::json* meta) {
  std::string text;
  if (meta != nullptr) {
    text += meta->dump();
    text += '\n';
  }
  for (const auto& r : records) {
    text += r.dump();
    text += '\n';
  }
  write_text_file(path, text);
}

}  // namespace speechalign
