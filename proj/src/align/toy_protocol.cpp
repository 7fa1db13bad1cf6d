#include "speechalign/align/toy_protocol.hpp"

#include <algorithm>

#include "speechalign/align/toy_corpus.hpp"
#include "speechalign/common/error.hpp"
#include "speechalign/tinylm/model.hpp"

namespace speechalign::align {

ToySetup setup_from_texts(std::vector<PreferenceText> corpus, std::size_t heldout,
                          std::uint64_t split_seed, const tinylm::Vocab* vocab) {
  if (corpus.empty()) throw ValidationError("preference corpus is empty");
  if (heldout >= corpus.size()) throw ValidationError("held-out count must leave training examples");
  std::vector<std::string> text;
  if (!vocab) {
    text.reserve(corpus.size() * 3);
    for (const auto& p : corpus) {
      text.push_back(p.prompt);
      text.push_back(p.chosen);
      text.push_back(p.rejected);
    }
  }
  tinylm::Vocab v = vocab ? *vocab : tinylm::Vocab::from_corpus(text);
  CorpusSplit split = split_corpus(std::move(corpus), heldout, split_seed);
  auto train = tokenize_all(split.train, v);
  auto held = tokenize_all(split.heldout, v);
  return {std::move(v), std::move(split.train), std::move(split.heldout), std::move(train),
          std::move(held)};
}

ToySetup make_toy_setup(const ToyCorpusConfig& cfg) {
  return setup_from_texts(make_toy_style_corpus(cfg.pairs, cfg.corpus_seed), cfg.heldout,
                          cfg.split_seed);
}

tinylm::ModelParams pretrain_reference(const tinylm::ModelParams& init,
                                       std::span<const PreferenceExample> examples,
                                       const PretrainConfig& cfg) {
  if (cfg.spoken_share < 0.0 || cfg.spoken_share > 1.0) {
    throw ValidationError("spoken_share must lie in [0, 1]");
  }
  if (cfg.epochs == 0) return init;
  std::vector<PreferenceExample> data;
  data.reserve(examples.size() * 2);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    data.push_back(swapped(examples[i]));
    if (static_cast<double>(i % 100) < cfg.spoken_share * 100.0) data.push_back(examples[i]);
  }
  AlignConfig pc;
  pc.dpo_weight = 0.0;
  pc.mask = {MaskStrategy::Kind::kNone, 0};
  pc.optimizer = Optimizer::kAdam;
  pc.learning_rate = cfg.learning_rate;
  pc.epochs = cfg.epochs;
  pc.seed = cfg.seed;
  return train(init, init, data, pc).policy;
}

AlignConfig toy_align_config() {
  AlignConfig c;
  c.beta = 0.1;
  c.dpo_weight = 0.9;
  c.learning_rate = 3e-4;
  c.epochs = 2;
  c.mask = {MaskStrategy::Kind::kKqLn, 4};
  c.optimizer = Optimizer::kAdam;
  c.seed = 3;
  return c;
}

tinylm::ModelConfig toy_model_config(int vocab_size) {
  tinylm::ModelConfig c;
  c.n_layers = 2;
  c.d_model = 64;
  c.n_heads = 4;
  c.context = 128;
  c.vocab_size = vocab_size;
  return c;
}

std::vector<std::string> decode_prompts(const tinylm::ModelParams& params,
                                        const tinylm::Vocab& vocab,
                                        std::span<const PreferenceExample> examples,
                                        std::size_t count, std::size_t max_len) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(count, examples.size()); ++i) {
    auto resp = tinylm::greedy_decode(params, examples[i].prompt, max_len, vocab.eos());
    out.push_back(vocab.decode(resp.ids));
  }
  return out;
}

}  // namespace speechalign::align
