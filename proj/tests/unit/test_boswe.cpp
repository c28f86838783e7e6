#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "kaes/boswe.hpp"
#include "kaes/error.hpp"
#include "kaes/kdtree.hpp"
#include "kaes/random.hpp"
#include "oracles/psd.hpp"

using namespace kaes;

namespace {

std::vector<float> random_points(Rng& rng, std::size_t n, std::size_t dim, double scale = 1.0) {
  std::vector<float> p(n * dim);
  for (auto& x : p) x = static_cast<float>((uniform_real(rng) * 2 - 1) * scale);
  return p;
}

// Word model whose vectors equal the given centroids, one word per centroid.
EmbeddingModel model_from(std::span<const float> pts, std::size_t dim) {
  EmbeddingModel m(dim);
  for (std::size_t i = 0; i < pts.size() / dim; ++i) m.add("w" + std::to_string(i), pts.subspan(i * dim, dim));
  return m;
}

std::size_t brute_nearest(std::span<const float> pts, std::size_t dim, std::span<const float> q) {
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t i = 0; i < pts.size() / dim; ++i) {
    double d = 0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double t = static_cast<double>(pts[i * dim + k]) - q[k];
      d += t * t;
    }
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("exact k-d tree matches linear scan on 1000 random queries") {
  Rng rng(21);
  for (std::size_t dim : {2u, 5u, 16u}) {
    const auto pts = random_points(rng, 500, dim);
    const KdForest tree(pts, dim);
    for (int q = 0; q < 1000; ++q) {
      const auto query = random_points(rng, 1, dim, 1.2);
      const auto lin = nearest_linear(pts, dim, query);
      CHECK(tree.nearest(query) == lin);
      CHECK(lin == brute_nearest(pts, dim, query));
    }
  }
}

TEST_CASE("ties break toward the lowest id") {
  // Centroids on a line; 3 and 7 are equidistant from the query.
  std::vector<float> c(10 * 2, 100.0f);
  for (int i = 0; i < 10; ++i) c[i * 2 + 1] = static_cast<float>(i * 50);
  c[3 * 2] = -1.0f;
  c[3 * 2 + 1] = 0.0f;
  c[7 * 2] = 1.0f;
  c[7 * 2 + 1] = 0.0f;
  const Codebook cb(c, 2, 0);
  const float q[2] = {0.0f, 0.0f};
  CHECK(cb.assign(q) == 3);
  CHECK(cb.assign_linear(q) == 3);

  std::vector<float> dup{1, 1, 0, 0, 1, 1, 1, 1};
  const KdForest tree(dup, 2);
  const float q2[2] = {1, 1};
  CHECK(tree.nearest(q2) == 0);
}

TEST_CASE("vector equal to a centroid maps to it") {
  Rng rng(4);
  const auto pts = random_points(rng, 50, 3);
  const Codebook cb(pts, 3, 0);
  for (std::size_t i = 0; i < 50; ++i) CHECK(cb.assign(cb.centroid(i)) == i);
}

TEST_CASE("approximate forest returns valid ids and is usually right") {
  Rng rng(8);
  const auto pts = random_points(rng, 400, 8);
  KdTreeOptions opt;
  opt.trees = 4;
  opt.max_checks = 64;
  opt.seed = 3;
  const KdForest forest(pts, 8, opt);
  int agree = 0;
  for (int q = 0; q < 200; ++q) {
    const auto query = random_points(rng, 1, 8);
    const auto got = forest.nearest(query);
    CHECK(got < 400);
    agree += got == nearest_linear(pts, 8, query);
  }
  CHECK(agree > 100);
}

TEST_CASE("k equal to the number of distinct points") {
  Rng rng(2);
  auto pts = random_points(rng, 12, 4);
  KMeansOptions opt;
  opt.k = 12;
  opt.seed = 5;
  const auto cb = fit_codebook(pts, 4, opt);
  CHECK(cb.distortion == 0.0);
  std::set<std::vector<float>> want, got;
  for (std::size_t i = 0; i < 12; ++i) {
    want.insert(std::vector<float>(pts.begin() + i * 4, pts.begin() + i * 4 + 4));
    auto c = cb.centroid(i);
    got.insert(std::vector<float>(c.begin(), c.end()));
  }
  CHECK(want == got);

  // Duplicates do not count as distinct points.
  std::vector<float> dup(pts.begin(), pts.begin() + 8);
  dup.insert(dup.end(), pts.begin(), pts.begin() + 8);
  KMeansOptions three = opt;
  three.k = 3;
  CHECK_THROWS_AS(fit_codebook(dup, 4, three), ValidationError);
}

TEST_CASE("two separated blobs land on their means") {
  const std::vector<float> pts{0, 0, 0, 2, 100, 100, 102, 100};
  KMeansOptions opt;
  opt.k = 2;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    opt.seed = seed;
    const auto cb = fit_codebook(pts, 2, opt);
    std::set<std::pair<float, float>> cs{{cb.centroid(0)[0], cb.centroid(0)[1]}, {cb.centroid(1)[0], cb.centroid(1)[1]}};
    CHECK(cs == std::set<std::pair<float, float>>{{0.0f, 1.0f}, {101.0f, 100.0f}});
    // Each blob contributes squared deviation 1 per point.
    CHECK(cb.distortion == doctest::Approx(1.0));
    CHECK(cb.converged);
  }
}

TEST_CASE("k-means is deterministic and monotone") {
  Rng rng(30);
  const auto pts = random_points(rng, 600, 6);
  KMeansOptions opt;
  opt.k = 20;
  opt.seed = 42;
  opt.threads = 1;
  const auto a = fit_codebook(pts, 6, opt);
  opt.threads = 4;
  const auto b = fit_codebook(pts, 6, opt);
  CHECK(std::vector<float>(a.centroids().begin(), a.centroids().end()) ==
        std::vector<float>(b.centroids().begin(), b.centroids().end()));
  CHECK(a.distortion_trace == b.distortion_trace);
  REQUIRE(a.distortion_trace.size() >= 2);
  for (std::size_t i = 1; i < a.distortion_trace.size(); ++i)
    CHECK(a.distortion_trace[i] <= a.distortion_trace[i - 1] * (1 + 1e-12));
  opt.seed = 43;
  const auto c = fit_codebook(pts, 6, opt);
  CHECK(a.fingerprint() != c.fingerprint());
}

TEST_CASE("histogram examples") {
  std::vector<float> cents(8 * 2);
  for (int i = 0; i < 8; ++i) {
    cents[i * 2] = static_cast<float>(i * 10);
    cents[i * 2 + 1] = 0;
  }
  const Codebook cb(cents, 2, 0);
  const auto model = model_from(cents, 2);

  const std::vector<std::string> all5{"w5", "w5", "w5"};
  const auto h5 = build_histogram(cb, all5, model);
  REQUIRE(h5.bins.size() == 1);
  CHECK(h5.bins[0].first == 5);
  CHECK(h5.bins[0].second == 1.0);

  const auto empty = build_histogram(cb, std::vector<std::string>{}, model);
  CHECK(empty.bins.empty());
  CHECK(empty.token_count == 0);

  const std::vector<std::string> split{"w1", "w2", "w1", "w1", "unknown"};
  const auto raw = build_histogram(cb, split, model, false);
  CHECK(raw.token_count == 4);
  CHECK(raw.oov_count == 1);
  CHECK(raw.weight(1) == 3.0);
  CHECK(raw.weight(2) == 1.0);
  CHECK(raw.mass() == 4.0);
  const auto h = build_histogram(cb, split, model);
  CHECK(h.weight(1) == 0.75);
  CHECK(h.weight(2) == 0.25);

  const std::vector<std::string> flipped{"w1", "w2", "w2", "w2"};
  const auto g = build_histogram(cb, flipped, model);
  CHECK(hik_pair(h, g) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(hik_pair(h, h) == 1.0);
  CHECK(hik_pair(h, h5) == 0.0);

  const Codebook other(std::vector<float>(cents.begin(), cents.begin() + 4), 2, 0);
  const auto foreign = build_histogram(other, all5, model);
  CHECK_THROWS_AS(hik_pair(h, foreign), ValidationError);

  const EmbeddingModel wrong_dim(3);
  CHECK_THROWS_AS(build_histogram(cb, all5, wrong_dim), ValidationError);
}

TEST_CASE("histogram mass and kernel properties on random data") {
  Rng rng(12);
  const auto vocab = random_points(rng, 60, 4);
  const auto model = model_from(vocab, 4);
  KMeansOptions opt;
  opt.k = 8;
  opt.seed = 1;
  const auto cb = fit_codebook(vocab, 4, opt);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<BosweHistogram> hs;
    std::vector<std::string> ids;
    const std::size_t docs = 2 + uniform_index(rng, 11);
    for (std::size_t d = 0; d < docs; ++d) {
      std::vector<std::string> toks;
      const std::size_t n = 1 + uniform_index(rng, 30);
      for (std::size_t t = 0; t < n; ++t) toks.push_back("w" + std::to_string(uniform_index(rng, 60)));
      const auto raw = build_histogram(cb, toks, model, false);
      CHECK(raw.mass() == static_cast<double>(raw.token_count));
      hs.push_back(build_histogram(cb, toks, model));
      CHECK(std::abs(hs.back().mass() - 1.0) <= 1e-12);
      ids.push_back(std::to_string(d));
    }
    const auto k = boswe_gram_matrix(hs, ids);
    CHECK(k.kind == KernelKind::boswe);
    CHECK(k.asymmetry() <= 1e-12);
    CHECK(oracle::is_psd(k));
    for (std::size_t i = 0; i < docs; ++i)
      for (std::size_t j = 0; j < docs; ++j) {
        CHECK(k.at(i, j) == hik_pair(hs[j], hs[i]));
        CHECK(k.at(i, j) <= std::min(k.at(i, i), k.at(j, j)) + 1e-15);
      }
  }
  std::vector<BosweHistogram> same(4, build_histogram(cb, std::vector<std::string>{"w1", "w9"}, model));
  std::vector<std::string> ids{"a", "b", "c", "d"};
  const auto ones = boswe_gram_matrix(same, ids);
  for (double v : ones.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mean/std document embedding") {
  EmbeddingModel m(3);
  const float v[3] = {1.0f, -2.0f, 0.5f};
  const float neg[3] = {-1.0f, 2.0f, -0.5f};
  m.add("v", v);
  m.add("neg", neg);
  const auto one = mean_std_doc_embedding(std::vector<std::string>{"v"}, m);
  CHECK(one.defined);
  CHECK(one.features == std::vector<double>{1.0, -2.0, 0.5, 0.0, 0.0, 0.0});
  const auto pair = mean_std_doc_embedding(std::vector<std::string>{"v", "neg", "oov"}, m);
  CHECK(pair.token_count == 2);
  CHECK(pair.features == std::vector<double>{0.0, 0.0, 0.0, 1.0, 2.0, 0.5});
  const auto none = mean_std_doc_embedding(std::vector<std::string>{"oov"}, m);
  CHECK_FALSE(none.defined);
  CHECK(none.features == std::vector<double>(6, 0.0));

  EmbeddingModel big(300);
  big.add("x", std::vector<float>(300, 0.25f));
  CHECK(mean_std_doc_embedding(std::vector<std::string>{"x"}, big).features.size() == 600);
}

TEST_CASE("codebook file round trip") {
  Rng rng(6);
  const auto pts = random_points(rng, 30, 5);
  KMeansOptions opt;
  opt.k = 6;
  opt.seed = 77;
  const auto cb = fit_codebook(pts, 5, opt);
  std::stringstream buf;
  write_codebook(buf, cb);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 8) == "KAESCB01");
  CHECK(bytes.size() == 8 + 4 + 4 + 8 + 6 * 5 * 4);
  std::istringstream in(bytes);
  const auto back = read_codebook(in);
  CHECK(back.k() == 6);
  CHECK(back.seed() == 77);
  CHECK(back.fingerprint() == cb.fingerprint());
  CHECK(std::vector<float>(back.centroids().begin(), back.centroids().end()) ==
        std::vector<float>(cb.centroids().begin(), cb.centroids().end()));
  std::istringstream cut(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_codebook(cut), FormatError);
}
