#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kaes {

/// Pre-trained word vectors, immutable after loading.
class EmbeddingModel {
public:
  EmbeddingModel() = default;
  explicit EmbeddingModel(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }

  /// Appends a word; a repeated word keeps its first vector.
  void add(std::string word, std::span<const float> vector);

  std::optional<std::size_t> index(std::string_view word) const;
  std::span<const float> vector(std::size_t index) const {
    return {vectors_.data() + index * dim_, dim_};
  }

private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<float> vectors_;
  std::unordered_map<std::string, std::size_t> vocab_;
};

inline constexpr std::size_t kDefaultVocabLimit = 500000;

/// Reads the word2vec binary layout: "<vocab> <dim>\n", then per entry the
/// token bytes, one space, dim little-endian float32 values and an optional
/// newline. Loads the first min(vocab_limit, vocab) entries.
EmbeddingModel load_word2vec_binary(std::istream& in,
                                    std::optional<std::size_t> vocab_limit = std::nullopt);
EmbeddingModel load_word2vec_binary_file(const std::string& path,
                                         std::optional<std::size_t> vocab_limit = std::nullopt);

/// Writes the same layout, one newline after each vector.
void write_word2vec_binary(std::ostream& out, const EmbeddingModel& model);

/// Lowercase ASCII tokens split at anything that is not a letter or digit.
/// Bytes >= 0x80 count as letters so UTF-8 words stay whole. "@CAPS12"-style
/// anonymization markers ('@' + letters + optional digits) are single tokens.
std::vector<std::string> tokenize(std::string_view text);

std::optional<std::span<const float>> lookup(const EmbeddingModel& model, std::string_view token);

}  // namespace kaes
