#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kaes {

enum class KernelKind : std::uint8_t {
  hisk_raw = 0,
  hisk_normalized = 1,
  boswe = 2,
  fused = 3,
  linear = 4,
};

std::string_view to_string(KernelKind kind);

/// Dense similarity matrix between two document lists. Square Gram matrices
/// have row_ids == col_ids. diag_rows/diag_cols hold the self-similarity of
/// every row/col document so rectangular blocks can be normalized.
struct KernelMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  KernelKind kind = KernelKind::hisk_raw;
  std::vector<double> diag_rows;
  std::vector<double> diag_cols;

  KernelMatrix() = default;
  KernelMatrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids, KernelKind kind);

  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }

  bool is_square() const noexcept { return rows == cols && row_ids == col_ids; }
  double trace() const;
  /// Largest |K(i,j) - K(j,i)| relative to max |K|; 0 for non-square.
  double asymmetry() const;

  /// Sub-block with the given row and column positions, diagonals carried along.
  KernelMatrix slice(std::span<const std::size_t> row_idx, std::span<const std::size_t> col_idx) const;
};

/// Kernel cache file: "KAESKM01", u32 rows, u32 cols, u8 kind, row-major
/// f64 values, then row ids and col ids as u32-length-prefixed strings.
/// Diagonals are not stored; reading a square matrix restores them from
/// the main diagonal.
void write_kernel_cache(std::ostream& out, const KernelMatrix& k);
KernelMatrix read_kernel_cache(std::istream& in);
void save_kernel_cache(const std::string& path, const KernelMatrix& k);
KernelMatrix load_kernel_cache(const std::string& path);

}  // namespace kaes
