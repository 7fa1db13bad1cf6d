#include "speechalign/metrics/report.hpp"

#include <cstdio>
#include <set>

#include "speechalign/common/error.hpp"
#include "speechalign/common/jsonl.hpp"
#include "speechalign/common/parallel.hpp"

namespace speechalign::metrics {

std::vector<ResponseText> read_responses(const std::filesystem::path& path) {
  std::vector<ResponseText> out;
  std::set<std::string> seen;
  for (const auto& rec : read_jsonl(path)) {
    if (!rec.contains("response") || !rec["response"].is_string()) {
      throw ValidationError(path.string() + ": record " + std::to_string(out.size()) +
                            " lacks a string 'response'");
    }
    std::string id;
    if (rec.contains("id")) {
      id = rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump();
    } else {
      id = std::to_string(out.size());
    }
    if (!seen.insert(id).second) throw ValidationError(path.string() + ": duplicate id '" + id + "'");
    out.push_back({id, rec["response"].get<std::string>()});
  }
  return out;
}

namespace {

bool blank(const std::string& text) {
  return count_chars(text, VocalizableTable::default_japanese()).non_whitespace == 0;
}

}  // namespace

SurfaceReport surface_report(const ResponseText& response, const WordSegmenter& segmenter,
                             const VocalizableTable& table) {
  SurfaceReport r;
  r.id = response.id;
  r.word_count = word_count(response.text, segmenter);
  r.nv_percent = nv_percent(response.text, table);
  return r;
}

CorpusReport corpus_report(std::span<const ResponseText> responses,
                           std::span<const ParserParses> parses, const WordSegmenter& segmenter,
                           const SurfaceOptions& options) {
  if (responses.empty()) throw ValidationError("corpus is empty");
  const VocalizableTable& table =
      options.table ? *options.table : VocalizableTable::default_japanese();

  CorpusReport rep;
  rep.responses.resize(responses.size());
  parallel_for(responses.size(), options.concurrency, [&](std::size_t i) {
    rep.responses[i] = surface_report(responses[i], segmenter, table);
  });

  if (!parses.empty()) {
    std::set<std::string> expected;
    for (const auto& r : responses) {
      if (!blank(r.text)) expected.insert(r.id);
    }
    for (const auto& p : parses) {
      for (const auto& [id, trees] : p.by_response) {
        if (!expected.contains(id)) {
          throw ValidationError("parser '" + p.label + "' has sentences for unknown or empty response '" +
                                id + "'");
        }
      }
      for (const auto& id : expected) {
        if (!p.by_response.contains(id)) {
          throw ValidationError("parser '" + p.label + "' has no parse for response '" + id + "'");
        }
      }
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < responses.size(); ++i) {
      if (!expected.contains(responses[i].id)) {
        rep.warnings.push_back("response '" + responses[i].id +
                               "' is empty; excluded from dependency depth");
        continue;
      }
      std::vector<ParserTrees> sets;
      for (const auto& p : parses) sets.push_back({p.label, p.by_response.at(responses[i].id)});
      double d = dependency_depth(sets, options.sentence_aggregation);
      rep.responses[i].dep_depth = d;
      sum += d;
      ++rep.depth_count;
    }
    if (rep.depth_count > 0) rep.mean_dep_depth = sum / static_cast<double>(rep.depth_count);
  }

  double wc = 0.0;
  double nv = 0.0;
  for (const auto& r : rep.responses) {
    wc += static_cast<double>(r.word_count);
    nv += r.nv_percent;
  }
  rep.mean_word_count = wc / static_cast<double>(rep.responses.size());
  rep.mean_nv_percent = nv / static_cast<double>(rep.responses.size());
  return rep;
}

nlohmann::json CorpusReport::to_json() const {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& r : responses) {
    nlohmann::json j{{"id", r.id}, {"word_count", r.word_count}, {"nv_percent", r.nv_percent}};
    j["dep_depth"] = r.dep_depth ? nlohmann::json(*r.dep_depth) : nlohmann::json(nullptr);
    items.push_back(std::move(j));
  }
  nlohmann::json mean{{"word_count", mean_word_count}, {"nv_percent", mean_nv_percent}};
  mean["dep_depth"] = mean_dep_depth ? nlohmann::json(*mean_dep_depth) : nlohmann::json(nullptr);
  return {{"responses", std::move(items)},
          {"mean", std::move(mean)},
          {"count", responses.size()},
          {"depth_count", depth_count},
          {"warnings", warnings}};
}

std::string CorpusReport::to_table() const {
  std::string out;
  char buf[256];
  auto row = [&](const std::string& id, const std::string& wc, const std::string& dd,
                 const std::string& nv) {
    std::snprintf(buf, sizeof buf, "%-20s %12s %8s %8s\n", id.c_str(), wc.c_str(), dd.c_str(),
                  nv.c_str());
    out += buf;
  };
  auto fmt = [&](double v) {
    char b[64];
    std::snprintf(b, sizeof b, "%.2f", v);
    return std::string(b);
  };
  row("id", "Word Count", "DD", "NV %");
  for (const auto& r : responses) {
    row(r.id, std::to_string(r.word_count), r.dep_depth ? fmt(*r.dep_depth) : "-", fmt(r.nv_percent));
  }
  row("MEAN", fmt(mean_word_count), mean_dep_depth ? fmt(*mean_dep_depth) : "-", fmt(mean_nv_percent));
  return out;
}

}  // namespace speechalign::metrics
