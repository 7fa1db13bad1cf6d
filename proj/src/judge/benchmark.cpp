#include "speechalign/judge/benchmark.hpp"

#include <algorithm>

#include "speechalign/common/error.hpp"
#include "speechalign/common/jsonl.hpp"

namespace speechalign::judge {

int BenchmarkItem::total_deduction() const {
  int d = 0;
  for (const auto& c : criteria) d += c.deduction;
  return d;
}

int BenchmarkItem::score_floor() const { return std::max(kMinScore, kMaxScore - total_deduction()); }

void BenchmarkItem::validate() const {
  if (id.empty()) throw ValidationError("benchmark item without id");
  if (instruction.empty()) throw ValidationError("benchmark item " + id + ": empty instruction");
  for (const auto& c : criteria) {
    if (c.description.empty()) {
      throw ValidationError("benchmark item " + id + ": criterion without description");
    }
    if (c.deduction < 1 || c.deduction > kMaxScore - kMinScore) {
      throw ValidationError("benchmark item " + id + ": deduction " +
                            std::to_string(c.deduction) + " outside [1, 4]");
    }
  }
}

namespace {

std::string id_string(const nlohmann::json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

BenchmarkItem item_from_json(const nlohmann::json& j) {
  BenchmarkItem item;
  try {
    item.id = id_string(j.at("id"));
    item.instruction = j.at("instruction").get<std::string>();
    item.reference_response = j.value("reference_response", std::string());
    if (j.contains("criteria")) {
      for (const auto& c : j.at("criteria")) {
        item.criteria.push_back({c.at("description").get<std::string>(), c.at("deduction").get<int>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed benchmark item: ") + e.what());
  }
  item.validate();
  return item;
}

nlohmann::json item_to_json(const BenchmarkItem& item) {
  nlohmann::json criteria = nlohmann::json::array();
  for (const auto& c : item.criteria) {
    criteria.push_back({{"description", c.description}, {"deduction", c.deduction}});
  }
  return {{"id", item.id},
          {"instruction", item.instruction},
          {"reference_response", item.reference_response},
          {"criteria", criteria}};
}

std::vector<BenchmarkItem> read_benchmark(const std::filesystem::path& path) {
  std::vector<BenchmarkItem> items;
  for (const auto& j : read_jsonl(path)) items.push_back(item_from_json(j));
  return items;
}

std::map<std::string, std::string> read_candidates(const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  for (const auto& j : read_jsonl(path)) {
    if (!j.contains("id") || !j.contains("response") || !j.at("response").is_string()) {
      throw ValidationError(path.string() + ": candidate records need id and response");
    }
    const auto id = id_string(j.at("id"));
    if (!out.emplace(id, j.at("response").get<std::string>()).second) {
      throw ValidationError(path.string() + ": duplicate candidate id " + id);
    }
  }
  return out;
}

}  // namespace speechalign::judge
