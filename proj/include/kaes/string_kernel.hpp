#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kaes/kernel_matrix.hpp"

namespace kaes {

struct NGramRange {
  int min = 1;
  int max = 15;
  friend bool operator==(const NGramRange&, const NGramRange&) = default;
};

/// Lowercases, collapses every whitespace run to a single space, and keeps
/// everything else (punctuation, "@PERSON1" markers) verbatim.
std::u32string normalize_text(std::string_view utf8);

/// Blended character n-gram counts of one document, all lengths in one
/// sorted table. Entries are keyed by a 64-bit hash of the code points plus
/// the length; ties on (hash, length) are resolved by comparing the actual
/// substrings, so colliding n-grams stay distinct.
class NGramProfile {
public:
  struct Entry {
    std::uint64_t hash;
    std::uint32_t start;  // first occurrence in text()
    std::uint32_t count;
    std::uint16_t length;
  };

  NGramProfile() = default;
  /// Profiles `text` as given; call normalize_text first for essay input.
  NGramProfile(std::u32string text, NGramRange range);

  NGramRange range() const noexcept { return range_; }
  std::uint64_t total() const noexcept { return total_; }
  std::size_t distinct() const noexcept { return entries_.size(); }
  const std::u32string& text() const noexcept { return text_; }
  std::span<const Entry> entries() const noexcept { return entries_; }

  std::u32string_view ngram(const Entry& e) const { return std::u32string_view(text_).substr(e.start, e.length); }
  /// Occurrence count of an n-gram; 0 when absent or outside the range.
  std::uint32_t count(std::u32string_view ngram) const;
  /// All (n-gram, count) pairs in table order.
  std::vector<std::pair<std::u32string, std::uint32_t>> items() const;

private:
  std::u32string text_;
  NGramRange range_{};
  std::uint64_t total_ = 0;
  std::vector<Entry> entries_;
};

/// Normalizes `text` and counts every n-gram with length in [n_min, n_max].
NGramProfile extract_ngram_counts(std::string_view text, int n_min, int n_max);

/// Histogram intersection string kernel: sum over shared n-grams of the
/// smaller count. Throws ValidationError when the ranges differ.
std::uint64_t hisk_pair(const NGramProfile& p, const NGramProfile& q);

/// values[i][j] = hisk_pair(rows[i], cols[j]). Diagonals are the profile totals.
KernelMatrix kernel_matrix(std::span<const NGramProfile> rows, std::span<const std::string> row_ids,
                           std::span<const NGramProfile> cols, std::span<const std::string> col_ids,
                           unsigned threads = 0);

/// Symmetric Gram matrix; each unordered pair is computed once and mirrored.
KernelMatrix gram_matrix(std::span<const NGramProfile> docs, std::span<const std::string> ids,
                         unsigned threads = 0);

/// K(i,j) / sqrt(diag_rows[i] * diag_cols[j]). Throws ValidationError naming
/// the first document with zero self-similarity.
KernelMatrix normalize_kernel(const KernelMatrix& k);

}  // namespace kaes
