#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "speechalign/metrics/charclass.hpp"
#include "speechalign/metrics/depth.hpp"
#include "speechalign/metrics/segmenter.hpp"

namespace speechalign::metrics {

struct ResponseText {
  std::string id;
  std::string text;
};

// Reads JSONL records {id?, response}. Missing ids become the 0-based line
// index. Duplicate ids are rejected.
std::vector<ResponseText> read_responses(const std::filesystem::path& path);

struct SurfaceReport {
  std::string id;
  std::size_t word_count = 0;
  std::optional<double> dep_depth;  // absent without parses or for empty text
  double nv_percent = 0.0;
};

struct CorpusReport {
  std::vector<SurfaceReport> responses;
  double mean_word_count = 0.0;
  std::optional<double> mean_dep_depth;
  double mean_nv_percent = 0.0;
  std::size_t depth_count = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
  // Fixed-width table: one row per response, then a MEAN row.
  std::string to_table() const;
};

struct SurfaceOptions {
  SentenceAggregation sentence_aggregation = SentenceAggregation::kMax;
  const VocalizableTable* table = nullptr;  // null: default table
  std::size_t concurrency = 1;
};

SurfaceReport surface_report(const ResponseText& response, const WordSegmenter& segmenter,
                             const VocalizableTable& table);

// Means over all responses for word count and NV%; dependency depth is
// averaged over non-empty responses only, each excluded one adding a
// warning. When parses are given, every parser must cover exactly the
// non-empty responses' ids, otherwise ValidationError. An empty corpus is a
// ValidationError.
CorpusReport corpus_report(std::span<const ResponseText> responses,
                           std::span<const ParserParses> parses, const WordSegmenter& segmenter,
                           const SurfaceOptions& options = {});

}  // namespace speechalign::metrics
