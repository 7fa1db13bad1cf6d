#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "speechalign/common/error.hpp"

namespace speechalign::metrics {

class MalformedTree : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// One sentence. heads[i] is the head of node i+1; 0 marks the root.
class DependencyTree {
 public:
  // Throws MalformedTree unless there is exactly one root, every head names
  // an existing node or 0, and the head links are acyclic.
  explicit DependencyTree(std::vector<int> heads);

  std::size_t size() const { return heads_.size(); }
  const std::vector<int>& heads() const { return heads_; }

  // Number of nodes on the longest root-to-leaf path.
  int depth() const;

 private:
  std::vector<int> heads_;
};

enum class SentenceAggregation { kMax, kMean };

struct ParserTrees {
  std::string label;
  std::vector<DependencyTree> sentences;
};

// Depth of one response: per parser, aggregate over its sentences (max by
// default); the result is the mean across parsers. Throws ValidationError
// when there are no parsers or a parser has no sentences.
double dependency_depth(std::span<const ParserTrees> parsers,
                        SentenceAggregation agg = SentenceAggregation::kMax);

struct ConlluSentence {
  std::string response_id;
  DependencyTree tree;
};

// Reads the ID and HEAD columns. Multiword-token (1-2) and empty-node (1.1)
// lines are skipped. A "# response_id = X" comment assigns every following
// sentence to response X until the next such comment; a sentence before the
// first one is an error.
std::vector<ConlluSentence> parse_conllu(std::string_view text);

// Sentences per response id for one parser.
struct ParserParses {
  std::string label;
  std::map<std::string, std::vector<DependencyTree>> by_response;
};

ParserParses parses_from_conllu(std::string label, std::string_view text);

// Loads every "<label>.conllu" file in a directory, sorted by label.
std::vector<ParserParses> load_parse_dir(const std::filesystem::path& dir);

}  // namespace speechalign::metrics
