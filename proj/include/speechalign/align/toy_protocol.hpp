#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "speechalign/align/preference.hpp"
#include "speechalign/align/train.hpp"
#include "speechalign/tinylm/params.hpp"
#include "speechalign/tinylm/vocab.hpp"

namespace speechalign::align {

// End-to-end recipe for the synthetic style-transfer experiment: build a
// corpus, pretrain a reference that leans towards the written style, then
// align it towards the spoken style.

struct ToyCorpusConfig {
  std::size_t pairs = 500;
  std::uint64_t corpus_seed = 7;
  std::size_t heldout = 50;
  std::uint64_t split_seed = 7;
};

struct ToySetup {
  tinylm::Vocab vocab;
  std::vector<PreferenceText> train_text;
  std::vector<PreferenceText> heldout_text;
  std::vector<PreferenceExample> train;
  std::vector<PreferenceExample> heldout;
};

// Character vocabulary over every prompt and response of the corpus, unless
// `vocab` is given.
ToySetup make_toy_setup(const ToyCorpusConfig& cfg);
ToySetup setup_from_texts(std::vector<PreferenceText> corpus, std::size_t heldout,
                          std::uint64_t split_seed, const tinylm::Vocab* vocab = nullptr);

struct PretrainConfig {
  double learning_rate = 1e-3;
  int epochs = 3;
  std::uint64_t seed = 1;
  // Share of prompts whose spoken (chosen) response is also part of the
  // pretraining data, next to every written (rejected) response.
  double spoken_share = 0.3;
};

// Supervised pretraining from `init` on the written side of every pair plus
// the spoken side of a spoken_share fraction, with Adam over all tensors.
// The result plays the role of the frozen reference.
tinylm::ModelParams pretrain_reference(const tinylm::ModelParams& init,
                                       std::span<const PreferenceExample> train,
                                       const PretrainConfig& cfg);

// Alignment settings for the toy model: Adam, lr 3e-4, 2 epochs, beta 0.1,
// KQ-LN, w = 0.9.
AlignConfig toy_align_config();

tinylm::ModelConfig toy_model_config(int vocab_size);

// Greedy decodes of the first `count` prompts.
std::vector<std::string> decode_prompts(const tinylm::ModelParams& params,
                                        const tinylm::Vocab& vocab,
                                        std::span<const PreferenceExample> examples,
                                        std::size_t count = 10, std::size_t max_len = 40);

}  // namespace speechalign::align
