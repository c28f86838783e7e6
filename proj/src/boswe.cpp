#include "kaes/boswe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "kaes/binary_io.hpp"
#include "kaes/error.hpp"
#include "kaes/parallel.hpp"
#include "kaes/random.hpp"

namespace kaes {

namespace {

constexpr std::string_view kMagic = "KAESCB01";

std::uint64_t fingerprint_of(std::span<const float> centroids, std::size_t dim, std::uint64_t seed) {
  std::uint64_t h = splitmix64(dim) ^ splitmix64(seed + centroids.size());
  for (const float v : centroids) h = splitmix64(h ^ std::bit_cast<std::uint32_t>(v));
  return h;
}

double squared_distance_d(std::span<const float> p, std::span<const double> c) {
  double sum = 0.0;
  for (std::size_t d = 0; d < p.size(); ++d) {
    const double diff = static_cast<double>(p[d]) - c[d];
    sum += diff * diff;
  }
  return sum;
}

std::size_t count_distinct(std::span<const float> vectors, std::size_t dim) {
  const std::size_t n = vectors.size() / dim;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto row = [&](std::size_t i) { return vectors.subspan(i * dim, dim); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = row(a), rb = row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  std::size_t distinct = n == 0 ? 0 : 1;
  for (std::size_t i = 1; i < n; ++i) {
    const auto ra = row(order[i - 1]), rb = row(order[i]);
    if (!std::equal(ra.begin(), ra.end(), rb.begin())) ++distinct;
  }
  return distinct;
}

}  // namespace

Codebook::Codebook(std::vector<float> centroids, std::size_t dim, std::uint64_t seed, KdTreeOptions index)
    : centroids_(std::move(centroids)), dim_(dim), seed_(seed) {
  if (dim_ == 0 || centroids_.empty() || centroids_.size() % dim_ != 0)
    throw ValidationError("codebook needs a non-empty k x dim centroid matrix");
  for (const float v : centroids_)
    if (!std::isfinite(v)) throw ValidationError("codebook centroid is not finite");
  fingerprint_ = fingerprint_of(centroids_, dim_, seed_);
  index_ = KdForest(centroids_, dim_, index);
}

std::size_t Codebook::assign(std::span<const float> vector) const { return index_.nearest(vector); }

std::size_t Codebook::assign_linear(std::span<const float> vector) const {
  if (vector.size() != dim_) throw ValidationError("vector dimension does not match codebook");
  return nearest_linear(centroids_, dim_, vector);
}

Codebook fit_codebook(std::span<const float> vectors, std::size_t dim, const KMeansOptions& options) {
  if (dim == 0 || vectors.size() % dim != 0) throw ValidationError("vectors must form an n x dim matrix");
  if (options.k < 1) throw ValidationError("k must be >= 1");
  if (options.max_iters < 1) throw ValidationError("max_iters must be >= 1");
  const std::size_t n = vectors.size() / dim;
  const auto k = static_cast<std::size_t>(options.k);
  const std::size_t distinct = count_distinct(vectors, dim);
  if (distinct < k)
    throw ValidationError("k-means needs at least k = " + std::to_string(k) + " distinct vectors, got " +
                          std::to_string(distinct));
  auto point = [&](std::size_t i) { return vectors.subspan(i * dim, dim); };

  // k-means++ seeding.
  Rng rng(derive_seed(options.seed, 0x6b6d65616e73ULL));
  std::vector<double> centers(k * dim);
  auto center = [&](std::size_t c) { return std::span<double>(centers).subspan(c * dim, dim); };
  auto set_center = [&](std::size_t c, std::size_t p) {
    const auto src = point(p);
    std::copy(src.begin(), src.end(), center(c).begin());
  };
  set_center(0, static_cast<std::size_t>(uniform_index(rng, n)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance_d(point(i), center(0));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (const double v : d2) total += v;
    const double target = uniform_real(rng) * total;
    std::size_t chosen = n;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      chosen = i;
      if (acc > target) break;
    }
    set_center(c, chosen);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance_d(point(i), center(c)));
  }

  // Lloyd iterations. Assignment is parallel per point; centroid sums run in
  // point order so the result does not depend on the thread count.
  std::vector<std::uint32_t> label(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::uint32_t> next(n);
  std::vector<double> dist(n);
  std::vector<double> trace;
  bool converged = false;
  int iter = 0;
  while (iter < options.max_iters) {
    parallel_for(n, options.threads, [&](std::size_t i) {
      std::uint32_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance_d(point(i), center(c));
        if (d < best_d) {
          best_d = d;
          best = static_cast<std::uint32_t>(c);
        }
      }
      next[i] = best;
      dist[i] = best_d;
    });
    ++iter;
    double sum = 0.0;
    for (const double v : dist) sum += v;
    trace.push_back(sum / static_cast<double>(n));
    if (next == label) {
      converged = true;
      break;
    }
    label = next;

    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = point(i);
      double* s = sums.data() + label[i] * dim;
      for (std::size_t d = 0; d < dim; ++d) s[d] += p[d];
      ++counts[label[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t d = 0; d < dim; ++d)
        centers[c * dim + d] = sums[c * dim + d] / static_cast<double>(counts[c]);
    }
  }

  std::vector<float> stored(centers.begin(), centers.end());
  Codebook book(std::move(stored), dim, options.seed, options.index);
  book.distortion_trace = std::move(trace);
  book.iterations = iter;
  book.converged = converged;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    total += squared_distance(point(i), book.centroid(book.assign_linear(point(i))));
  book.distortion = total / static_cast<double>(n);
  return book;
}

void write_codebook(std::ostream& out, const Codebook& codebook) {
  io::write_magic(out, kMagic);
  io::write_u32(out, static_cast<std::uint32_t>(codebook.k()));
  io::write_u32(out, static_cast<std::uint32_t>(codebook.dim()));
  io::write_u64(out, codebook.seed());
  for (const float v : codebook.centroids()) io::write_f32(out, v);
  if (!out) throw Error("failed writing codebook");
}

Codebook read_codebook(std::istream& in, KdTreeOptions index) {
  io::Reader r(in);
  r.expect_magic(kMagic);
  const std::uint32_t k = r.u32("k");
  const std::uint32_t dim = r.u32("dim");
  const std::uint64_t seed = r.u64("seed");
  if (k == 0 || dim == 0) throw FormatError("codebook with zero k or dim");
  std::vector<float> centroids(static_cast<std::size_t>(k) * dim);
  for (auto& v : centroids) v = r.f32("centroids");
  return Codebook(std::move(centroids), dim, seed, index);
}

void save_codebook(const std::string& path, const Codebook& codebook) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_codebook(out, codebook);
}

Codebook load_codebook(const std::string& path, KdTreeOptions index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open codebook " + path);
  return read_codebook(in, index);
}

double BosweHistogram::mass() const {
  double m = 0.0;
  for (const auto& [id, w] : bins) m += w;
  return m;
}

double BosweHistogram::weight(std::uint32_t cluster) const {
  const auto it = std::lower_bound(bins.begin(), bins.end(), cluster,
                                   [](const auto& bin, std::uint32_t c) { return bin.first < c; });
  return (it != bins.end() && it->first == cluster) ? it->second : 0.0;
}

BosweHistogram build_histogram(const Codebook& codebook, std::span<const std::string> tokens,
                               const EmbeddingModel& model, bool normalize) {
  if (model.dim() != codebook.dim())
    throw ValidationError("embedding dim " + std::to_string(model.dim()) + " does not match codebook dim " +
                          std::to_string(codebook.dim()));
  BosweHistogram h;
  h.codebook = codebook.fingerprint();
  h.normalized = normalize;
  std::vector<std::size_t> counts(static_cast<std::size_t>(codebook.k()), 0);
  std::unordered_map<std::size_t, std::size_t> cluster_of;  // vocab index -> cluster
  for (const auto& tok : tokens) {
    const auto idx = model.index(tok);
    if (!idx) {
      ++h.oov_count;
      continue;
    }
    auto it = cluster_of.find(*idx);
    if (it == cluster_of.end()) it = cluster_of.emplace(*idx, codebook.assign(model.vector(*idx))).first;
    ++counts[it->second];
    ++h.token_count;
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    const double w = static_cast<double>(counts[c]);
    h.bins.emplace_back(static_cast<std::uint32_t>(c), normalize ? w / static_cast<double>(h.token_count) : w);
  }
  return h;
}

double hik_pair(const BosweHistogram& a, const BosweHistogram& b) {
  if (a.codebook != b.codebook) throw ValidationError("histograms were built against different codebooks");
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.bins.size() && j < b.bins.size()) {
    if (a.bins[i].first < b.bins[j].first) {
      ++i;
    } else if (b.bins[j].first < a.bins[i].first) {
      ++j;
    } else {
      sum += std::min(a.bins[i].second, b.bins[j].second);
      ++i;
      ++j;
    }
  }
  return sum;
}

KernelMatrix boswe_kernel_matrix(std::span<const BosweHistogram> rows, std::span<const std::string> row_ids,
                                 std::span<const BosweHistogram> cols, std::span<const std::string> col_ids,
                                 unsigned threads) {
  if (rows.empty() || cols.empty()) throw ValidationError("empty histogram list");
  if (rows.size() != row_ids.size() || cols.size() != col_ids.size())
    throw ValidationError("histogram and id counts differ");
  KernelMatrix k({row_ids.begin(), row_ids.end()}, {col_ids.begin(), col_ids.end()}, KernelKind::boswe);
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < cols.size(); ++j) k.at(i, j) = hik_pair(rows[i], cols[j]);
  });
  for (const auto& h : rows) k.diag_rows.push_back(hik_pair(h, h));
  for (const auto& h : cols) k.diag_cols.push_back(hik_pair(h, h));
  return k;
}

KernelMatrix boswe_gram_matrix(std::span<const BosweHistogram> docs, std::span<const std::string> ids,
                               unsigned threads) {
  if (docs.empty()) throw ValidationError("empty histogram list");
  if (docs.size() != ids.size()) throw ValidationError("histogram and id counts differ");
  const std::size_t n = docs.size();
  KernelMatrix k({ids.begin(), ids.end()}, {ids.begin(), ids.end()}, KernelKind::boswe);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) k.at(i, j) = hik_pair(docs[i], docs[j]);
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) k.at(j, i) = k.at(i, j);
  for (std::size_t i = 0; i < n; ++i) k.diag_rows.push_back(k.at(i, i));
  k.diag_cols = k.diag_rows;
  return k;
}

DocEmbedding mean_std_doc_embedding(std::span<const std::string> tokens, const EmbeddingModel& model) {
  const std::size_t dim = model.dim();
  DocEmbedding out;
  out.features.assign(2 * dim, 0.0);
  std::vector<std::span<const float>> hits;
  for (const auto& tok : tokens)
    if (const auto v = lookup(model, tok)) hits.push_back(*v);
  out.token_count = hits.size();
  if (hits.empty()) return out;
  out.defined = true;
  const auto count = static_cast<double>(hits.size());
  for (const auto& v : hits)
    for (std::size_t d = 0; d < dim; ++d) out.features[d] += v[d];
  for (std::size_t d = 0; d < dim; ++d) out.features[d] /= count;
  // Two-pass variance around the mean.
  for (const auto& v : hits)
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = v[d] - out.features[d];
      out.features[dim + d] += diff * diff;
    }
  for (std::size_t d = 0; d < dim; ++d) out.features[dim + d] = std::sqrt(out.features[dim + d] / count);
  return out;
}

}  // namespace kaes
