#include "kaes/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kaes/error.hpp"
#include "kaes/random.hpp"

namespace kaes {

namespace {

// Box-Muller on the portable uniform generator.
double gaussian(Rng& rng) {
  const double u1 = 1.0 - uniform_real(rng);
  const double u2 = uniform_real(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(std::size_t essay_count, std::uint64_t seed,
                                      const SyntheticOptions& options) {
  if (options.words_per_essay < static_cast<std::size_t>(options.max_keyword_count) + 1)
    throw ValidationError("synthetic essays too short for the keyword count");
  if (options.embedding_dim == 0 || options.filler_vocabulary == 0)
    throw ValidationError("synthetic corpus needs a vocabulary and an embedding dim");
  const ScoreRange range = asap_score_range(options.prompt);
  Rng rng(derive_seed(seed, 0x73796e746865ULL));

  // Pseudo-words that never contain the keyword.
  constexpr std::string_view letters = "abcdefghijklmnopqrstuvwxyz";
  std::set<std::string> seen;
  std::vector<std::string> filler;
  while (filler.size() < options.filler_vocabulary) {
    const auto len = 3 + static_cast<std::size_t>(uniform_index(rng, 6));
    std::string w;
    for (std::size_t i = 0; i < len; ++i) w.push_back(letters[uniform_index(rng, letters.size())]);
    if (w.find(options.keyword) != std::string::npos || w == options.keyword) continue;
    if (seen.insert(w).second) filler.push_back(w);
  }

  SyntheticCorpus out;
  out.embeddings = EmbeddingModel(options.embedding_dim);
  std::vector<float> v(options.embedding_dim);
  for (const auto& w : filler) {
    for (auto& x : v) x = static_cast<float>(gaussian(rng));
    out.embeddings.add(w, v);
  }
  for (std::size_t d = 0; d < v.size(); ++d) v[d] = d == 0 ? 12.0f : static_cast<float>(0.1 * gaussian(rng));
  out.embeddings.add(options.keyword, v);

  for (std::size_t e = 0; e < essay_count; ++e) {
    const int count = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(options.max_keyword_count) + 1));
    std::vector<std::string> words;
    for (std::size_t i = 0; i < options.words_per_essay - static_cast<std::size_t>(count); ++i)
      words.push_back(filler[uniform_index(rng, filler.size())]);
    for (int c = 0; c < count; ++c) words.push_back(options.keyword);
    shuffle(std::span(words), rng);

    Essay essay;
    essay.id = "syn" + std::to_string(options.prompt) + "-" + std::to_string(e);
    essay.prompt = options.prompt;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i > 0) essay.text.push_back(' ');
      essay.text += words[i];
      if (i + 1 < words.size() && uniform_index(rng, 12) == 0) essay.text.push_back(',');
    }
    essay.text.push_back('.');
    essay.raw_score = std::clamp(range.min + count, range.min, range.max);
    essay.unit_score = scale_score(essay.raw_score, range);
    out.essays.push_back(std::move(essay));
  }
  return out;
}

}  // namespace kaes
