#include <doctest.h>

#include <random>
#include <sstream>

#include "kaes/error.hpp"
#include "kaes/random.hpp"
#include "kaes/string_kernel.hpp"
#include "kaes/text.hpp"
#include "oracles/naive_hisk.hpp"
#include "oracles/psd.hpp"

using namespace kaes;

namespace {

std::string random_string(Rng& rng, std::size_t max_len, std::string_view alphabet = "abc ") {
  const std::size_t len = uniform_index(rng, max_len + 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[uniform_index(rng, alphabet.size())]);
  return s;
}

std::u32string u32(std::string_view s) { return text::utf8_to_u32(s); }

}  // namespace

TEST_CASE("normalize_text") {
  CHECK(normalize_text("Hello   World\t\n!") == U"hello world !");
  CHECK(normalize_text("@PERSON1 Went") == U"@person1 went");
  CHECK(normalize_text("\xC3\x89TAT") == U"état");
  CHECK(normalize_text("") == U"");
}

TEST_CASE("extract_ngram_counts examples") {
  const auto p = extract_ngram_counts("abab", 1, 2);
  CHECK(p.total() == 7);
  CHECK(p.distinct() == 4);
  CHECK(p.count(U"a") == 2);
  CHECK(p.count(U"b") == 2);
  CHECK(p.count(U"ab") == 2);
  CHECK(p.count(U"ba") == 1);
  CHECK(p.count(U"aba") == 0);  // outside range

  const auto oracle_counts = oracle::counts("abab", 1, 2);
  CHECK(oracle_counts.size() == p.distinct());
  for (const auto& [gram, n] : oracle_counts) CHECK(p.count(u32(gram)) == n);

  const auto empty = extract_ngram_counts("", 1, 15);
  CHECK(empty.total() == 0);
  CHECK(empty.distinct() == 0);

  const auto x = extract_ngram_counts("x", 1, 2);
  CHECK(x.total() == 1);
  CHECK(x.count(U"x") == 1);

  CHECK_THROWS_AS(extract_ngram_counts("abc", 0, 2), ValidationError);
  CHECK_THROWS_AS(extract_ngram_counts("abc", 3, 2), ValidationError);
}

TEST_CASE("profile total matches the positional count") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const std::string s = random_string(rng, 40, "abcd");
    const auto p = extract_ngram_counts(s, 1, 15);
    std::uint64_t expected = 0;
    for (std::size_t n = 1; n <= 15; ++n)
      if (s.size() >= n) expected += s.size() - n + 1;
    CHECK(p.total() == expected);
    std::uint64_t sum = 0;
    for (const auto& e : p.entries()) {
      CHECK(e.count >= 1);
      CHECK(e.length >= 1);
      CHECK(e.length <= 15);
      sum += e.count;
    }
    CHECK(sum == p.total());
  }
}

TEST_CASE("hisk_pair examples") {
  const auto abab = extract_ngram_counts("abab", 1, 2);
  const auto ba = extract_ngram_counts("ba", 1, 2);
  CHECK(oracle::hisk("abab", "ba", 1, 2) == 3);
  CHECK(hisk_pair(abab, ba) == 3);
  CHECK(hisk_pair(abab, abab) == abab.total());
  CHECK(hisk_pair(abab, extract_ngram_counts("", 1, 2)) == 0);
  CHECK_THROWS_AS(hisk_pair(abab, extract_ngram_counts("ba", 1, 3)), ValidationError);
}

TEST_CASE("hisk_pair matches the naive oracle") {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const std::string a = random_string(rng, 30), b = random_string(rng, 30);
    const int n_max = 1 + static_cast<int>(uniform_index(rng, 5));
    const auto pa = extract_ngram_counts(a, 1, n_max), pb = extract_ngram_counts(b, 1, n_max);
    CHECK(hisk_pair(pa, pb) == oracle::hisk(a, b, 1, n_max));
    CHECK(hisk_pair(pa, pb) == hisk_pair(pb, pa));
    CHECK(hisk_pair(pa, pb) <= std::min(pa.total(), pb.total()));
  }
}

TEST_CASE("blended kernel equals the sum of fixed-length kernels") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const std::string a = random_string(rng, 25), b = random_string(rng, 25);
    std::uint64_t sum = 0;
    for (int n = 1; n <= 5; ++n) sum += hisk_pair(extract_ngram_counts(a, n, n), extract_ngram_counts(b, n, n));
    CHECK(hisk_pair(extract_ngram_counts(a, 1, 5), extract_ngram_counts(b, 1, 5)) == sum);
  }
}

TEST_CASE("non-ASCII code points are single characters") {
  const auto p = extract_ngram_counts("\xC3\xA9\xC3\xA9", 1, 2);  // "éé"
  CHECK(p.total() == 3);
  CHECK(p.count(U"é") == 2);
  CHECK(p.count(U"éé") == 1);
}

TEST_CASE("kernel_matrix shapes") {
  std::vector<NGramProfile> same(3, extract_ngram_counts("same text", 1, 4));
  std::vector<std::string> ids{"a", "b", "c"};
  const auto k = gram_matrix(same, ids);
  for (double v : k.values) CHECK(v == static_cast<double>(same[0].total()));
  CHECK(k.kind == KernelKind::hisk_raw);
  CHECK(k.is_square());

  std::vector<NGramProfile> disjoint{extract_ngram_counts("aaaa", 1, 3), extract_ngram_counts("bbbb", 1, 3)};
  std::vector<std::string> two{"x", "y"};
  const auto kd = gram_matrix(disjoint, two);
  CHECK(kd.at(0, 1) == 0.0);
  CHECK(kd.at(1, 0) == 0.0);

  const auto rect = kernel_matrix(std::span(disjoint).first(1), std::span(two).first(1), disjoint, two);
  CHECK(rect.rows == 1);
  CHECK(rect.cols == 2);
  CHECK(rect.at(0, 0) == kd.at(0, 0));

  CHECK_THROWS_AS(gram_matrix({}, {}), ValidationError);
}

TEST_CASE("gram_matrix is PSD, symmetric, and independent of the thread count") {
  Rng rng(17);
  for (int t = 0; t < 5; ++t) {
    std::vector<NGramProfile> docs;
    std::vector<std::string> ids;
    for (int i = 0; i < 8; ++i) {
      docs.push_back(extract_ngram_counts(random_string(rng, 40), 1, 15));
      ids.push_back(std::to_string(i));
    }
    const auto k1 = gram_matrix(docs, ids, 1);
    const auto k4 = gram_matrix(docs, ids, 4);
    CHECK(k1.values == k4.values);
    CHECK(k1.asymmetry() == 0.0);
    CHECK(oracle::is_psd(k1));
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j) CHECK(k1.at(i, j) <= std::min(k1.diag_rows[i], k1.diag_cols[j]));
    const auto r = kernel_matrix(docs, ids, docs, ids, 3);
    CHECK(r.values == k1.values);
  }
}

TEST_CASE("normalize_kernel") {
  std::vector<NGramProfile> docs{extract_ngram_counts("the cat sat", 1, 15), extract_ngram_counts("the cat sat", 1, 15),
                                 extract_ngram_counts("zzzz", 1, 15)};
  std::vector<std::string> ids{"a", "b", "c"};
  const auto n = normalize_kernel(gram_matrix(docs, ids));
  CHECK(n.kind == KernelKind::hisk_normalized);
  for (std::size_t i = 0; i < 3; ++i) CHECK(n.at(i, i) == 1.0);
  CHECK(n.at(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n.at(0, 2) == 0.0);

  std::vector<NGramProfile> with_empty{extract_ngram_counts("abc", 1, 3), extract_ngram_counts("", 1, 3)};
  std::vector<std::string> ids2{"full", "blank"};
  try {
    normalize_kernel(gram_matrix(with_empty, ids2));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("blank") != std::string::npos);
  }

  // Rectangular blocks normalize with the carried diagonals, matching the
  // corresponding block of the normalized Gram.
  const auto full = normalize_kernel(gram_matrix(docs, ids));
  const auto rect = normalize_kernel(kernel_matrix(std::span(docs).last(1), std::span(ids).last(1), docs, ids));
  for (std::size_t j = 0; j < 3; ++j) CHECK(rect.at(0, j) == doctest::Approx(full.at(2, j)).epsilon(1e-15));
}

TEST_CASE("kernel cache round trip is bit exact") {
  std::vector<NGramProfile> docs{extract_ngram_counts("one essay", 1, 5), extract_ngram_counts("another one", 1, 5)};
  std::vector<std::string> ids{"id-1", "\xC3\xA9-2"};
  const auto k = normalize_kernel(gram_matrix(docs, ids));
  std::stringstream buf;
  write_kernel_cache(buf, k);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 8) == "KAESKM01");
  CHECK(bytes.size() == 8 + 4 + 4 + 1 + 4 * 8 + (4 + 4) + (4 + 4) + (4 + 4) + (4 + 4));
  CHECK(static_cast<unsigned char>(bytes[16]) == 1);  // kind tag

  std::istringstream in(bytes);
  const auto back = read_kernel_cache(in);
  CHECK(back.values == k.values);
  CHECK(back.row_ids == k.row_ids);
  CHECK(back.col_ids == k.col_ids);
  CHECK(back.kind == k.kind);
  std::stringstream again;
  write_kernel_cache(again, back);
  CHECK(again.str() == bytes);

  std::istringstream truncated(bytes.substr(0, 30));
  CHECK_THROWS_AS(read_kernel_cache(truncated), FormatError);
  std::istringstream bad("KAESXX01");
  CHECK_THROWS_AS(read_kernel_cache(bad), FormatError);
}

TEST_CASE("slice keeps the diagonals") {
  std::vector<NGramProfile> docs{extract_ngram_counts("aa", 1, 2), extract_ngram_counts("ab", 1, 2),
                                 extract_ngram_counts("bb", 1, 2)};
  std::vector<std::string> ids{"0", "1", "2"};
  const auto k = gram_matrix(docs, ids);
  const std::vector<std::size_t> rows{2}, cols{0, 1};
  const auto s = k.slice(rows, cols);
  CHECK(s.row_ids == std::vector<std::string>{"2"});
  CHECK(s.at(0, 1) == k.at(2, 1));
  CHECK(s.diag_rows == std::vector<double>{k.at(2, 2)});
  CHECK(s.diag_cols == std::vector<double>{k.at(0, 0), k.at(1, 1)});
}
