#include "kaes/string_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kaes/error.hpp"
#include "kaes/parallel.hpp"
#include "kaes/text.hpp"

namespace kaes {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t finalize(std::uint64_t h, std::uint64_t length) {
  h ^= length * 0x9E3779B97F4A7C15ULL;
  h = (h ^ (h >> 33)) * 0xff51afd7ed558ccdULL;
  h = (h ^ (h >> 33)) * 0xc4ceb9fe1a85ec53ULL;
  return h ^ (h >> 33);
}

std::uint64_t hash_ngram(std::u32string_view s) {
  std::uint64_t h = kFnvOffset;
  for (const char32_t c : s) h = (h ^ static_cast<std::uint64_t>(c)) * kFnvPrime;
  return finalize(h, s.size());
}

// Strict order on (hash, length, content).
int compare_entries(const NGramProfile::Entry& a, std::u32string_view text_a,
                    const NGramProfile::Entry& b, std::u32string_view text_b) {
  if (a.hash != b.hash) return a.hash < b.hash ? -1 : 1;
  if (a.length != b.length) return a.length < b.length ? -1 : 1;
  const int c = text_a.substr(a.start, a.length).compare(text_b.substr(b.start, b.length));
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

void check_range(NGramRange range) {
  if (range.min < 1 || range.max < range.min)
    throw ValidationError("invalid n-gram range [" + std::to_string(range.min) + ", " +
                          std::to_string(range.max) + "]");
  if (range.max > std::numeric_limits<std::uint16_t>::max())
    throw ValidationError("n-gram length too large");
}

}  // namespace

std::u32string normalize_text(std::string_view utf8) {
  const std::u32string decoded = text::utf8_to_u32(utf8);
  std::u32string out;
  out.reserve(decoded.size());
  bool in_space = false;
  for (const char32_t c : decoded) {
    if (text::is_space(c)) {
      if (!in_space) out.push_back(U' ');
      in_space = true;
    } else {
      out.push_back(text::to_lower(c));
      in_space = false;
    }
  }
  return out;
}

NGramProfile::NGramProfile(std::u32string text, NGramRange range)
    : text_(std::move(text)), range_(range) {
  check_range(range);
  if (text_.size() > std::numeric_limits<std::uint32_t>::max())
    throw ValidationError("document too long for n-gram profiling");
  const std::size_t len = text_.size();
  const auto n_min = static_cast<std::size_t>(range.min);
  const auto n_max = static_cast<std::size_t>(range.max);

  std::vector<Entry> all;
  std::size_t positions = 0;
  for (std::size_t n = n_min; n <= n_max && n <= len; ++n) positions += len - n + 1;
  all.reserve(positions);

  // Extend each start position one code point at a time, emitting every
  // length in range.
  for (std::size_t start = 0; start < len; ++start) {
    std::uint64_t h = kFnvOffset;
    const std::size_t stop = std::min(len, start + n_max);
    for (std::size_t end = start; end < stop; ++end) {
      h = (h ^ static_cast<std::uint64_t>(text_[end])) * kFnvPrime;
      const std::size_t n = end - start + 1;
      if (n < n_min) continue;
      all.push_back({finalize(h, n), static_cast<std::uint32_t>(start), 1,
                     static_cast<std::uint16_t>(n)});
    }
  }
  total_ = all.size();

  const std::u32string_view view(text_);
  std::sort(all.begin(), all.end(), [&](const Entry& a, const Entry& b) {
    const int c = compare_entries(a, view, b, view);
    return c < 0 || (c == 0 && a.start < b.start);
  });
  for (const Entry& e : all) {
    if (!entries_.empty() && compare_entries(entries_.back(), view, e, view) == 0)
      ++entries_.back().count;
    else
      entries_.push_back(e);
  }
  entries_.shrink_to_fit();
}

std::uint32_t NGramProfile::count(std::u32string_view ngram) const {
  if (ngram.size() < static_cast<std::size_t>(range_.min) ||
      ngram.size() > static_cast<std::size_t>(range_.max))
    return 0;
  // Probe entry pointing into the query itself.
  const Entry probe{hash_ngram(ngram), 0, 0, static_cast<std::uint16_t>(ngram.size())};
  const std::u32string_view view(text_);
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), probe,
                                   [&](const Entry& e, const Entry& p) {
                                     return compare_entries(e, view, p, ngram) < 0;
                                   });
  if (it != entries_.end() && compare_entries(*it, view, probe, ngram) == 0) return it->count;
  return 0;
}

std::vector<std::pair<std::u32string, std::uint32_t>> NGramProfile::items() const {
  std::vector<std::pair<std::u32string, std::uint32_t>> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.emplace_back(std::u32string(ngram(e)), e.count);
  return out;
}

NGramProfile extract_ngram_counts(std::string_view text, int n_min, int n_max) {
  return NGramProfile(normalize_text(text), NGramRange{n_min, n_max});
}

std::uint64_t hisk_pair(const NGramProfile& p, const NGramProfile& q) {
  if (p.range() != q.range())
    throw ValidationError("n-gram ranges differ: [" + std::to_string(p.range().min) + "," +
                          std::to_string(p.range().max) + "] vs [" + std::to_string(q.range().min) +
                          "," + std::to_string(q.range().max) + "]");
  const auto a = p.entries();
  const auto b = q.entries();
  const std::u32string_view ta(p.text()), tb(q.text());
  std::uint64_t sum = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    // Hash-only comparison settles almost every step.
    if (a[i].hash < b[j].hash) {
      ++i;
      continue;
    }
    if (b[j].hash < a[i].hash) {
      ++j;
      continue;
    }
    const int c = compare_entries(a[i], ta, b[j], tb);
    if (c < 0) {
      ++i;
    } else if (c > 0) {
      ++j;
    } else {
      sum += std::min(a[i].count, b[j].count);
      ++i;
      ++j;
    }
  }
  return sum;
}

namespace {

void check_inputs(std::span<const NGramProfile> docs, std::span<const std::string> ids,
                  const char* what) {
  if (docs.empty()) throw ValidationError(std::string("empty ") + what + " document list");
  if (docs.size() != ids.size())
    throw ValidationError(std::string(what) + ": profile and id counts differ");
}

}  // namespace

KernelMatrix kernel_matrix(std::span<const NGramProfile> rows, std::span<const std::string> row_ids,
                           std::span<const NGramProfile> cols, std::span<const std::string> col_ids,
                           unsigned threads) {
  check_inputs(rows, row_ids, "row");
  check_inputs(cols, col_ids, "col");
  for (const auto& c : cols)
    if (c.range() != rows.front().range()) throw ValidationError("n-gram ranges differ across documents");

  KernelMatrix k({row_ids.begin(), row_ids.end()}, {col_ids.begin(), col_ids.end()},
                 KernelKind::hisk_raw);
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < cols.size(); ++j)
      k.at(i, j) = static_cast<double>(hisk_pair(rows[i], cols[j]));
  });
  for (const auto& r : rows) k.diag_rows.push_back(static_cast<double>(r.total()));
  for (const auto& c : cols) k.diag_cols.push_back(static_cast<double>(c.total()));
  return k;
}

KernelMatrix gram_matrix(std::span<const NGramProfile> docs, std::span<const std::string> ids,
                         unsigned threads) {
  check_inputs(docs, ids, "gram");
  for (const auto& d : docs)
    if (d.range() != docs.front().range()) throw ValidationError("n-gram ranges differ across documents");

  const std::size_t n = docs.size();
  KernelMatrix k({ids.begin(), ids.end()}, {ids.begin(), ids.end()}, KernelKind::hisk_raw);
  // Row i fills the upper triangle j >= i; rows are independent.
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j)
      k.at(i, j) = static_cast<double>(hisk_pair(docs[i], docs[j]));
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) k.at(j, i) = k.at(i, j);
  for (const auto& d : docs) k.diag_rows.push_back(static_cast<double>(d.total()));
  k.diag_cols = k.diag_rows;
  return k;
}

KernelMatrix normalize_kernel(const KernelMatrix& k) {
  if (k.kind != KernelKind::hisk_raw)
    throw ValidationError("normalize_kernel expects a hisk-raw matrix, got " +
                          std::string(to_string(k.kind)));
  if (k.diag_rows.size() != k.rows || k.diag_cols.size() != k.cols)
    throw ValidationError("kernel matrix lacks self-similarities for normalization");
  for (std::size_t i = 0; i < k.rows; ++i)
    if (!(k.diag_rows[i] > 0.0))
      throw ValidationError("document " + k.row_ids[i] + " has zero self-similarity");
  for (std::size_t j = 0; j < k.cols; ++j)
    if (!(k.diag_cols[j] > 0.0))
      throw ValidationError("document " + k.col_ids[j] + " has zero self-similarity");

  KernelMatrix out = k;
  out.kind = KernelKind::hisk_normalized;
  const bool square = k.is_square();
  for (std::size_t i = 0; i < k.rows; ++i)
    for (std::size_t j = 0; j < k.cols; ++j)
      out.at(i, j) = (square && i == j) ? 1.0 : k.at(i, j) / std::sqrt(k.diag_rows[i] * k.diag_cols[j]);
  out.diag_rows.assign(k.rows, 1.0);
  out.diag_cols.assign(k.cols, 1.0);
  return out;
}

}  // namespace kaes
