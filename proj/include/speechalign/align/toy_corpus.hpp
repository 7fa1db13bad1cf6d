#pragma once

#include <cstdint>
#include <vector>

#include "speechalign/align/preference.hpp"

namespace speechalign::align {

// Synthetic written-vs-spoken style corpus. Each pair shares one piece of
// content: the chosen side is a short polite sentence with no
// non-vocalizable characters, the rejected side wraps the same content in
// markdown bullets and emphasis. Deterministic for a given seed; at most
// toy_corpus_capacity() distinct pairs.
std::vector<PreferenceText> make_toy_style_corpus(std::size_t n_pairs, std::uint64_t seed);
std::size_t toy_corpus_capacity();

struct CorpusSplit {
  std::vector<PreferenceText> train;
  std::vector<PreferenceText> heldout;
};

// Deterministic split; the last `heldout_count` records after a seeded
// shuffle are held out.
CorpusSplit split_corpus(std::vector<PreferenceText> corpus, std::size_t heldout_count,
                         std::uint64_t seed);

}  // namespace speechalign::align
