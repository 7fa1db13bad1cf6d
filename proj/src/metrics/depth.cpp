#include "speechalign/metrics/depth.hpp"

#include <algorithm>
#include <charconv>

#include "speechalign/common/jsonl.hpp"

namespace speechalign::metrics {

DependencyTree::DependencyTree(std::vector<int> heads) : heads_(std::move(heads)) {
  const int n = static_cast<int>(heads_.size());
  if (n == 0) throw MalformedTree("dependency tree has no nodes");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    int h = heads_[i];
    if (h < 0 || h > n) {
      throw MalformedTree("node " + std::to_string(i + 1) + " has head " + std::to_string(h) +
                          " outside 0.." + std::to_string(n));
    }
    if (h == i + 1) throw MalformedTree("node " + std::to_string(i + 1) + " is its own head");
    if (h == 0) ++roots;
  }
  if (roots != 1) {
    throw MalformedTree("dependency tree must have exactly one root, found " + std::to_string(roots));
  }
  // With one root and in-range heads, a cycle exists iff some node never
  // reaches the root.
  std::vector<char> state(n, 0);  // 0 unknown, 1 on current path, 2 reaches root
  for (int start = 0; start < n; ++start) {
    std::vector<int> path;
    int v = start;
    while (v >= 0 && state[v] == 0) {
      state[v] = 1;
      path.push_back(v);
      v = heads_[v] - 1;
    }
    if (v >= 0 && state[v] == 1) {
      throw MalformedTree("dependency tree contains a cycle through node " + std::to_string(v + 1));
    }
    for (int p : path) state[p] = 2;
  }
}

int DependencyTree::depth() const {
  const int n = static_cast<int>(heads_.size());
  std::vector<int> level(n, 0);
  int best = 0;
  for (int i = 0; i < n; ++i) {
    std::vector<int> path;
    int v = i;
    while (v >= 0 && level[v] == 0) {
      path.push_back(v);
      v = heads_[v] - 1;
    }
    int base = v >= 0 ? level[v] : 0;
    for (auto it = path.rbegin(); it != path.rend(); ++it) level[*it] = ++base;
    best = std::max(best, level[i]);
  }
  return best;
}

double dependency_depth(std::span<const ParserTrees> parsers, SentenceAggregation agg) {
  if (parsers.empty()) throw ValidationError("dependency_depth needs at least one parser set");
  double total = 0.0;
  for (const auto& p : parsers) {
    if (p.sentences.empty()) throw ValidationError("parser '" + p.label + "' has no sentences");
    double value = 0.0;
    for (const auto& t : p.sentences) {
      double d = t.depth();
      value = agg == SentenceAggregation::kMax ? std::max(value, d) : value + d;
    }
    if (agg == SentenceAggregation::kMean) value /= static_cast<double>(p.sentences.size());
    total += value;
  }
  return total / static_cast<double>(parsers.size());
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    cols.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return cols;
}

bool parse_int(std::string_view s, int& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size() && !s.empty();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<ConlluSentence> parse_conllu(std::string_view text) {
  std::vector<ConlluSentence> out;
  std::string response_id;
  bool have_id = false;
  std::vector<int> heads;
  int line_no = 0;
  int sentence_line = 0;

  auto fail = [&](int line, const std::string& msg) -> ValidationError {
    return ValidationError("conllu line " + std::to_string(line) + ": " + msg);
  };
  auto finish = [&] {
    if (heads.empty()) return;
    if (!have_id) throw fail(sentence_line, "sentence before any '# response_id' comment");
    try {
      out.push_back({response_id, DependencyTree(std::move(heads))});
    } catch (const MalformedTree& e) {
      throw MalformedTree("conllu sentence at line " + std::to_string(sentence_line) + ": " + e.what());
    }
    heads.clear();
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (trim(line).empty()) {
      finish();
      continue;
    }
    if (line.front() == '#') {
      std::string_view body = trim(line.substr(1));
      if (body.starts_with("response_id")) {
        std::string_view rest = trim(body.substr(11));
        if (rest.empty() || rest.front() != '=') continue;
        if (!heads.empty()) finish();
        response_id = std::string(trim(rest.substr(1)));
        if (response_id.empty()) throw fail(line_no, "empty response_id");
        have_id = true;
      }
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() < 7) throw fail(line_no, "expected 10 tab-separated columns");
    std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) continue;
    int idx = 0;
    int head = 0;
    if (!parse_int(id, idx)) throw fail(line_no, "bad ID '" + std::string(id) + "'");
    if (!parse_int(cols[6], head)) throw fail(line_no, "bad HEAD '" + std::string(cols[6]) + "'");
    if (heads.empty()) sentence_line = line_no;
    if (idx != static_cast<int>(heads.size()) + 1) {
      throw fail(line_no, "token IDs must be consecutive from 1");
    }
    heads.push_back(head);
  }
  finish();
  return out;
}

ParserParses parses_from_conllu(std::string label, std::string_view text) {
  ParserParses p{std::move(label), {}};
  for (auto& s : parse_conllu(text)) p.by_response[s.response_id].push_back(std::move(s.tree));
  return p;
}

std::vector<ParserParses> load_parse_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ValidationError("parse directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".conllu") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no .conllu files in " + dir.string());
  std::vector<ParserParses> out;
  for (const auto& f : files) {
    try {
      out.push_back(parses_from_conllu(f.stem().string(), read_text_file(f)));
    } catch (const MalformedTree& e) {
      throw MalformedTree(f.string() + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(f.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace speechalign::metrics
