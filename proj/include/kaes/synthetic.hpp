#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kaes/corpus.hpp"
#include "kaes/embeddings.hpp"

namespace kaes {

struct SyntheticOptions {
  int prompt = 1;
  std::size_t words_per_essay = 60;
  std::size_t filler_vocabulary = 200;
  std::string keyword = "omega";
  /// Keyword counts are drawn uniformly from [0, max_keyword_count].
  int max_keyword_count = 12;
  std::size_t embedding_dim = 16;
};

struct SyntheticCorpus {
  std::vector<Essay> essays;
  EmbeddingModel embeddings;
};

/// Essays of random filler words with a planted keyword. The raw score is
/// min + count, clipped to the prompt's range, so it is a clipped linear
/// function of the keyword count. Every word (keyword included) has an
/// embedding; the keyword vector sits far from the filler cloud.
SyntheticCorpus make_synthetic_corpus(std::size_t essay_count, std::uint64_t seed,
                                      const SyntheticOptions& options = {});

}  // namespace kaes
