#include "kaes/embeddings.hpp"

#include <bit>
#include <charconv>
#include <fstream>

#include "kaes/binary_io.hpp"
#include "kaes/error.hpp"

namespace kaes {

void EmbeddingModel::add(std::string word, std::span<const float> vector) {
  if (vector.size() != dim_)
    throw ValidationError("vector for '" + word + "' has " + std::to_string(vector.size()) +
                          " components, model dim is " + std::to_string(dim_));
  if (vocab_.contains(word)) return;
  vocab_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  vectors_.insert(vectors_.end(), vector.begin(), vector.end());
}

std::optional<std::size_t> EmbeddingModel::index(std::string_view word) const {
  const auto it = vocab_.find(std::string(word));
  if (it == vocab_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::size_t parse_header_number(io::Reader& r, char terminator, const char* what) {
  std::string digits;
  for (;;) {
    const int c = r.get();
    if (c < 0) throw FormatError(std::string("truncated header while reading ") + what);
    if (c == terminator) break;
    if (c == '\r' && terminator == '\n') continue;
    digits.push_back(static_cast<char>(c));
  }
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size())
    throw FormatError(std::string("non-numeric ") + what + " in header: '" + digits + "'");
  return v;
}

}  // namespace

EmbeddingModel load_word2vec_binary(std::istream& in, std::optional<std::size_t> vocab_limit) {
  io::Reader r(in);
  const std::size_t vocab = parse_header_number(r, ' ', "vocab size");
  const std::size_t dim = parse_header_number(r, '\n', "dimension");
  if (dim == 0) throw FormatError("dimension must be positive");
  const std::size_t count = vocab_limit ? std::min(*vocab_limit, vocab) : vocab;

  EmbeddingModel model(dim);
  std::vector<float> vec(dim);
  std::vector<char> raw(dim * 4);
  for (std::size_t n = 0; n < count; ++n) {
    std::string word;
    for (;;) {
      const int c = r.get();
      if (c < 0)
        throw FormatError("truncated input at byte offset " + std::to_string(r.offset()) +
                          " inside token of entry " + std::to_string(n));
      if (c == ' ') break;
      // Newline left over from the previous entry.
      if (c == '\n' && word.empty()) continue;
      word.push_back(static_cast<char>(c));
    }
    r.read_exact(raw.data(), raw.size(), "vector of '" + word + "'");
    for (std::size_t d = 0; d < dim; ++d) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b)
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[d * 4 + b])) << (8 * b);
      vec[d] = std::bit_cast<float>(bits);
    }
    model.add(std::move(word), vec);
  }
  return model;
}

EmbeddingModel load_word2vec_binary_file(const std::string& path,
                                         std::optional<std::size_t> vocab_limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open embeddings file " + path);
  return load_word2vec_binary(in, vocab_limit);
}

void write_word2vec_binary(std::ostream& out, const EmbeddingModel& model) {
  out << model.size() << ' ' << model.dim() << '\n';
  for (std::size_t i = 0; i < model.size(); ++i) {
    out << model.words()[i] << ' ';
    for (const float v : model.vector(i)) io::write_f32(out, v);
    out << '\n';
  }
  if (!out) throw Error("failed writing embeddings");
}

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool is_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  while (i < n) {
    if (text[i] == '@' && i + 1 < n && is_alpha(byte(i + 1))) {
      std::size_t j = i + 1;
      while (j < n && is_alpha(byte(j))) ++j;
      while (j < n && is_digit(byte(j))) ++j;
      // A marker must end at a token boundary; otherwise '@' is punctuation.
      if (j == n || !is_word_byte(byte(j))) {
        std::string tok;
        for (std::size_t k = i; k < j; ++k) tok.push_back(lower(text[k]));
        tokens.push_back(std::move(tok));
        i = j;
        continue;
      }
      ++i;
      continue;
    }
    if (!is_word_byte(byte(i))) {
      ++i;
      continue;
    }
    std::string tok;
    while (i < n && is_word_byte(byte(i))) tok.push_back(lower(text[i++]));
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::optional<std::span<const float>> lookup(const EmbeddingModel& model, std::string_view token) {
  const auto idx = model.index(token);
  if (!idx) return std::nullopt;
  return model.vector(*idx);
}

}  // namespace kaes
