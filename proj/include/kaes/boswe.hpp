#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kaes/embeddings.hpp"
#include "kaes/kdtree.hpp"
#include "kaes/kernel_matrix.hpp"

namespace kaes {

struct KMeansOptions {
  int k = 500;
  std::uint64_t seed = 0;
  int max_iters = 100;
  unsigned threads = 0;
  KdTreeOptions index{};
};

/// k super word vectors (k-means centroids) and a nearest-centroid index.
class Codebook {
public:
  Codebook() = default;
  /// Wraps precomputed centroids (row-major k x dim).
  Codebook(std::vector<float> centroids, std::size_t dim, std::uint64_t seed, KdTreeOptions index = {});

  int k() const noexcept { return static_cast<int>(dim_ == 0 ? 0 : centroids_.size() / dim_); }
  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const float> centroids() const noexcept { return centroids_; }
  std::span<const float> centroid(std::size_t id) const { return std::span(centroids_).subspan(id * dim_, dim_); }

  /// Identifies the centroid set; histograms from different codebooks differ here.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  /// Final mean squared distance of the training vectors to their centroid.
  double distortion = 0.0;
  /// Mean squared distance after each Lloyd assignment step.
  std::vector<double> distortion_trace;
  int iterations = 0;
  bool converged = false;

  /// Nearest centroid through the index; ties go to the lowest id.
  std::size_t assign(std::span<const float> vector) const;
  std::size_t assign_linear(std::span<const float> vector) const;

private:
  std::vector<float> centroids_;
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  std::uint64_t fingerprint_ = 0;
  KdForest index_;
};

/// Lloyd's algorithm with k-means++ seeding on row-major n x dim vectors.
/// Stops when no assignment changes or after max_iters. Throws
/// ValidationError when there are fewer than k distinct vectors.
Codebook fit_codebook(std::span<const float> vectors, std::size_t dim, const KMeansOptions& options);

/// Codebook file: "KAESCB01", u32 k, u32 dim, u64 seed, k x dim float32.
void write_codebook(std::ostream& out, const Codebook& codebook);
Codebook read_codebook(std::istream& in, KdTreeOptions index = {});
void save_codebook(const std::string& path, const Codebook& codebook);
Codebook load_codebook(const std::string& path, KdTreeOptions index = {});

struct BosweHistogram {
  /// (cluster id, weight), ascending by id, zero weights omitted.
  std::vector<std::pair<std::uint32_t, double>> bins;
  std::size_t token_count = 0;  // in-vocabulary tokens histogrammed
  std::size_t oov_count = 0;
  bool normalized = false;
  std::uint64_t codebook = 0;

  double mass() const;
  double weight(std::uint32_t cluster) const;
};

/// Counts in-vocabulary tokens per nearest centroid; OOV tokens are skipped.
/// With normalize, weights are divided by token_count.
BosweHistogram build_histogram(const Codebook& codebook, std::span<const std::string> tokens,
                               const EmbeddingModel& model, bool normalize = true);

/// Sum over clusters of the smaller weight.
double hik_pair(const BosweHistogram& a, const BosweHistogram& b);

KernelMatrix boswe_kernel_matrix(std::span<const BosweHistogram> rows, std::span<const std::string> row_ids,
                                 std::span<const BosweHistogram> cols, std::span<const std::string> col_ids,
                                 unsigned threads = 0);
KernelMatrix boswe_gram_matrix(std::span<const BosweHistogram> docs, std::span<const std::string> ids,
                               unsigned threads = 0);

struct DocEmbedding {
  /// Per-component mean followed by per-component population std (2 x dim).
  std::vector<double> features;
  std::size_t token_count = 0;
  /// False when no token was in vocabulary; features are then all zero.
  bool defined = false;
};

/// Mean/std document embedding baseline.
DocEmbedding mean_std_doc_embedding(std::span<const std::string> tokens, const EmbeddingModel& model);

}  // namespace kaes
