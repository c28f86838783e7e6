#include "kaes/kernel_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "kaes/binary_io.hpp"
#include "kaes/error.hpp"

namespace kaes {

namespace {
constexpr std::string_view kMagic = "KAESKM01";
}

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::hisk_raw: return "hisk-raw";
    case KernelKind::hisk_normalized: return "hisk-normalized";
    case KernelKind::boswe: return "boswe";
    case KernelKind::fused: return "fused";
    case KernelKind::linear: return "linear";
  }
  return "unknown";
}

KernelMatrix::KernelMatrix(std::vector<std::string> r, std::vector<std::string> c, KernelKind k)
    : rows(r.size()),
      cols(c.size()),
      values(r.size() * c.size(), 0.0),
      row_ids(std::move(r)),
      col_ids(std::move(c)),
      kind(k) {}

double KernelMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(rows, cols); ++i) t += at(i, i);
  return t;
}

double KernelMatrix::asymmetry() const {
  if (rows != cols) return 0.0;
  double scale = 0.0;
  for (const double v : values) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = i + 1; j < cols; ++j) worst = std::max(worst, std::abs(at(i, j) - at(j, i)));
  return worst / scale;
}

KernelMatrix KernelMatrix::slice(std::span<const std::size_t> row_idx,
                                 std::span<const std::size_t> col_idx) const {
  std::vector<std::string> r, c;
  r.reserve(row_idx.size());
  c.reserve(col_idx.size());
  for (const auto i : row_idx) r.push_back(row_ids.at(i));
  for (const auto j : col_idx) c.push_back(col_ids.at(j));
  KernelMatrix out(std::move(r), std::move(c), kind);
  for (std::size_t a = 0; a < row_idx.size(); ++a)
    for (std::size_t b = 0; b < col_idx.size(); ++b) out.at(a, b) = at(row_idx[a], col_idx[b]);
  if (!diag_rows.empty())
    for (const auto i : row_idx) out.diag_rows.push_back(diag_rows[i]);
  if (!diag_cols.empty())
    for (const auto j : col_idx) out.diag_cols.push_back(diag_cols[j]);
  return out;
}

void write_kernel_cache(std::ostream& out, const KernelMatrix& k) {
  if (k.values.size() != k.rows * k.cols) throw Error("kernel matrix shape inconsistent");
  io::write_magic(out, kMagic);
  io::write_u32(out, static_cast<std::uint32_t>(k.rows));
  io::write_u32(out, static_cast<std::uint32_t>(k.cols));
  io::write_u8(out, static_cast<std::uint8_t>(k.kind));
  for (const double v : k.values) io::write_f64(out, v);
  for (const auto& id : k.row_ids) io::write_string(out, id);
  for (const auto& id : k.col_ids) io::write_string(out, id);
  if (!out) throw Error("failed writing kernel cache");
}

KernelMatrix read_kernel_cache(std::istream& in) {
  io::Reader r(in);
  r.expect_magic(kMagic);
  const std::uint32_t rows = r.u32("row count");
  const std::uint32_t cols = r.u32("col count");
  const std::uint8_t kind = r.u8("kind tag");
  if (kind > static_cast<std::uint8_t>(KernelKind::linear))
    throw FormatError("unknown kernel kind tag " + std::to_string(kind));
  std::vector<double> values(static_cast<std::size_t>(rows) * cols);
  for (auto& v : values) v = r.f64("matrix values");
  std::vector<std::string> row_ids(rows), col_ids(cols);
  for (auto& id : row_ids) id = r.string("row id");
  for (auto& id : col_ids) id = r.string("col id");
  KernelMatrix k(std::move(row_ids), std::move(col_ids), static_cast<KernelKind>(kind));
  k.values = std::move(values);
  if (k.is_square()) {
    for (std::size_t i = 0; i < k.rows; ++i) k.diag_rows.push_back(k.at(i, i));
    k.diag_cols = k.diag_rows;
  }
  return k;
}

void save_kernel_cache(const std::string& path, const KernelMatrix& k) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_kernel_cache(out, k);
}

KernelMatrix load_kernel_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open kernel cache " + path);
  return read_kernel_cache(in);
}

}  // namespace kaes
