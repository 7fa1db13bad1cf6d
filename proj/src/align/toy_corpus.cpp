#include "speechalign/align/toy_corpus.hpp"

#include <algorithm>
#include <array>
#include <random>

#include "speechalign/common/error.hpp"

namespace speechalign::align {

namespace {

constexpr std::array<const char*, 25> kSubjects = {
    "富士山", "東京", "京都", "桜", "猫", "犬", "海", "空", "月",
    "雪",     "夏",   "冬",   "朝", "夜", "駅", "川", "森", "花",
    "雨",     "風",   "星",   "本", "茶", "魚", "鳥"};

constexpr std::array<const char*, 20> kPredicates = {
    "高い", "広い",   "古い", "赤い", "青い", "白い", "長い",   "早い", "遠い",   "近い",
    "強い", "美しい", "明るい", "暗い", "新しい", "楽しい", "大きい", "小さい", "甘い", "静か"};

}  // namespace

std::size_t toy_corpus_capacity() { return kSubjects.size() * kPredicates.size(); }

std::vector<PreferenceText> make_toy_style_corpus(std::size_t n_pairs, std::uint64_t seed) {
  if (n_pairs > toy_corpus_capacity()) {
    throw ValidationError("toy corpus holds at most " + std::to_string(toy_corpus_capacity()) +
                          " distinct pairs");
  }
  std::vector<PreferenceText> all;
  all.reserve(toy_corpus_capacity());
  for (const char* s : kSubjects) {
    for (const char* p : kPredicates) {
      const std::string subj = s;
      const std::string pred = p;
      PreferenceText t;
      t.prompt = subj + "と" + pred + "について";
      t.chosen = subj + "は" + pred + "です。";
      t.rejected = "- **" + subj + "**: " + pred + "\n";
      all.push_back(std::move(t));
    }
  }
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(n_pairs);
  for (std::size_t i = 0; i < all.size(); ++i) all[i].id = "toy-" + std::to_string(i);
  return all;
}

CorpusSplit split_corpus(std::vector<PreferenceText> corpus, std::size_t heldout_count,
                         std::uint64_t seed) {
  if (heldout_count >= corpus.size()) {
    throw ValidationError("held-out count must be smaller than the corpus");
  }
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(corpus.begin(), corpus.end(), rng);
  CorpusSplit s;
  const auto cut = corpus.size() - heldout_count;
  s.train.assign(corpus.begin(), corpus.begin() + static_cast<std::ptrdiff_t>(cut));
  s.heldout.assign(corpus.begin() + static_cast<std::ptrdiff_t>(cut), corpus.end());
  return s;
}

}  // namespace speechalign::align
