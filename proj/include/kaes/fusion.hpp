#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "kaes/kernel_matrix.hpp"

namespace kaes {

/// Row-wise sparse feature matrix (r documents x m features).
class SparseFeatureMatrix {
public:
  using Row = std::vector<std::pair<std::size_t, double>>;  // ascending column, no zeros

  SparseFeatureMatrix() = default;
  explicit SparseFeatureMatrix(std::size_t cols) : cols_(cols) {}
  /// Builds from a dense row-major buffer, dropping zeros.
  static SparseFeatureMatrix from_dense(const std::vector<double>& values, std::size_t rows, std::size_t cols,
                                        std::vector<std::string> ids = {});

  std::size_t rows() const noexcept { return data_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  const Row& row(std::size_t i) const { return data_.at(i); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  /// Entries must be finite; column order within the row does not matter.
  void add_row(Row row, std::string id = {});

private:
  std::size_t cols_ = 0;
  std::vector<Row> data_;
  std::vector<std::string> ids_;
};

/// [X1 X2]: same rows, columns of X2 shifted past those of X1.
SparseFeatureMatrix hconcat(const SparseFeatureMatrix& x1, const SparseFeatureMatrix& x2);

/// X * Y' as a kernel matrix of kind linear.
KernelMatrix linear_gram(const SparseFeatureMatrix& x, const SparseFeatureMatrix& y);

/// K1 + K2 elementwise (kind fused). Shapes and id lists must match exactly;
/// the error names the first divergent id.
KernelMatrix sum_kernels(const KernelMatrix& k1, const KernelMatrix& k2);

}  // namespace kaes
