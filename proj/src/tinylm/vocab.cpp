#include "speechalign/tinylm/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "speechalign/common/error.hpp"
#include "speechalign/common/jsonl.hpp"
#include "speechalign/common/utf8.hpp"

namespace speechalign::tinylm {

namespace {

std::string escape_token(const std::string& tok) {
  std::string out;
  for (char c : tok) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_token(const std::string& line, std::size_t lineno) {
  std::string out;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] != '\\') {
      out.push_back(line[i]);
      continue;
    }
    if (i + 1 >= line.size()) {
      throw ValidationError("vocab line " + std::to_string(lineno) + ": dangling backslash");
    }
    switch (line[++i]) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'r': out.push_back('\r'); break;
      case '\\': out.push_back('\\'); break;
      default:
        throw ValidationError("vocab line " + std::to_string(lineno) + ": unknown escape");
    }
  }
  return out;
}

}  // namespace

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw ValidationError("vocab: empty token at id " + std::to_string(i));
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw ValidationError("vocab: duplicate token '" + tokens_[i] + "'");
    }
  }
  auto need = [&](std::string_view name) {
    auto id = find(name);
    if (!id) throw ValidationError("vocab: missing special token " + std::string(name));
    return *id;
  };
  pad_ = need(kPad);
  bos_ = need(kBos);
  eos_ = need(kEos);
  unk_ = find(kUnk);
  if (tokens_.size() < 4) throw ValidationError("vocab: size must be at least 4");
}

Vocab Vocab::from_corpus(std::span<const std::string> corpus) {
  std::set<char32_t> chars;
  for (const auto& text : corpus) {
    for (char32_t cp : utf8::decode(text)) chars.insert(cp);
  }
  std::vector<std::string> tokens{std::string(kPad), std::string(kBos), std::string(kEos),
                                  std::string(kUnk)};
  for (char32_t cp : chars) tokens.push_back(utf8::encode(cp));
  return Vocab(std::move(tokens));
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open vocab " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!utf8::is_valid(line)) {
      throw ValidationError("vocab line " + std::to_string(lineno) + ": invalid UTF-8");
    }
    tokens.push_back(unescape_token(line, lineno));
  }
  return Vocab(std::move(tokens));
}

void Vocab::save(const std::filesystem::path& path) const {
  std::string text;
  for (const auto& t : tokens_) {
    text += escape_token(t);
    text += '\n';
  }
  write_text_file(path, text);
}

const std::string& Vocab::token(TokenId id) const {
  if (!contains(id)) throw ValidationError("token id out of range: " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Vocab::is_special(TokenId id) const {
  return id == pad_ || id == bos_ || id == eos_ || (unk_ && id == *unk_);
}

std::vector<TokenId> Vocab::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (char32_t cp : utf8::decode(text)) {
    if (auto id = find(utf8::encode(cp))) {
      ids.push_back(*id);
    } else if (unk_) {
      ids.push_back(*unk_);
    } else {
      throw ValidationError("character U+" + std::to_string(static_cast<unsigned>(cp)) +
                            " not in vocabulary");
    }
  }
  return ids;
}

std::string Vocab::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (is_special(id)) continue;
    out += token(id);
  }
  return out;
}

TokenSequence make_prompt(const Vocab& vocab, std::string_view text) {
  TokenSequence seq{{vocab.bos()}, SequenceRole::kPrompt};
  auto body = vocab.encode(text);
  seq.ids.insert(seq.ids.end(), body.begin(), body.end());
  return seq;
}

TokenSequence make_response(const Vocab& vocab, std::string_view text) {
  TokenSequence seq{vocab.encode(text), SequenceRole::kResponse};
  seq.ids.push_back(vocab.eos());
  return seq;
}

}  // namespace speechalign::tinylm
