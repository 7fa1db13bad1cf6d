#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace speechalign::tinylm {

using TokenId = std::int32_t;

// Character-level vocabulary: one token per Unicode code point plus the
// special tokens <pad>, <bos>, <eos> and (optionally) <unk>.
class Vocab {
 public:
  static constexpr std::string_view kPad = "<pad>";
  static constexpr std::string_view kBos = "<bos>";
  static constexpr std::string_view kEos = "<eos>";
  static constexpr std::string_view kUnk = "<unk>";

  // Specials must appear in `tokens` under the names above; <unk> may be absent.
  explicit Vocab(std::vector<std::string> tokens);

  // Specials at ids 0..3 (pad, bos, eos, unk), then every distinct code point
  // of `corpus` in ascending code-point order.
  static Vocab from_corpus(std::span<const std::string> corpus);

  // One token per line. '\n', '\t', '\r' and '\\' inside tokens are written as
  // backslash escapes.
  static Vocab load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  TokenId pad() const { return pad_; }
  TokenId bos() const { return bos_; }
  TokenId eos() const { return eos_; }
  std::optional<TokenId> unk() const { return unk_; }
  bool is_special(TokenId id) const;
  bool contains(TokenId id) const { return id >= 0 && static_cast<std::size_t>(id) < size(); }

  // Code points missing from the vocabulary map to <unk>; without <unk> they
  // raise ValidationError.
  std::vector<TokenId> encode(std::string_view text) const;
  // Special tokens are dropped.
  std::string decode(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId pad_ = -1;
  TokenId bos_ = -1;
  TokenId eos_ = -1;
  std::optional<TokenId> unk_;
};

enum class SequenceRole { kPrompt, kResponse };

struct TokenSequence {
  std::vector<TokenId> ids;
  SequenceRole role = SequenceRole::kResponse;
};

// <bos> + characters of `text`.
TokenSequence make_prompt(const Vocab& vocab, std::string_view text);
// characters of `text` + <eos>.
TokenSequence make_response(const Vocab& vocab, std::string_view text);

}  // namespace speechalign::tinylm
