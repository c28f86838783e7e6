#include "kaes/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "kaes/error.hpp"

namespace kaes {

SparseFeatureMatrix SparseFeatureMatrix::from_dense(const std::vector<double>& values, std::size_t rows,
                                                    std::size_t cols, std::vector<std::string> ids) {
  if (values.size() != rows * cols) throw ValidationError("dense buffer does not match rows x cols");
  if (!ids.empty() && ids.size() != rows) throw ValidationError("id count does not match rows");
  SparseFeatureMatrix m(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    Row row;
    for (std::size_t j = 0; j < cols; ++j)
      if (values[i * cols + j] != 0.0) row.emplace_back(j, values[i * cols + j]);
    m.add_row(std::move(row), ids.empty() ? std::to_string(i) : ids[i]);
  }
  return m;
}

void SparseFeatureMatrix::add_row(Row row, std::string id) {
  std::sort(row.begin(), row.end());
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k].first >= cols_) throw ValidationError("feature column out of range");
    if (!std::isfinite(row[k].second)) throw ValidationError("feature value is not finite");
    if (k > 0 && row[k].first == row[k - 1].first) throw ValidationError("duplicate feature column");
  }
  std::erase_if(row, [](const auto& e) { return e.second == 0.0; });
  if (id.empty()) id = std::to_string(data_.size());
  data_.push_back(std::move(row));
  ids_.push_back(std::move(id));
}

SparseFeatureMatrix hconcat(const SparseFeatureMatrix& x1, const SparseFeatureMatrix& x2) {
  if (x1.rows() != x2.rows()) throw ValidationError("hconcat needs equal row counts");
  SparseFeatureMatrix out(x1.cols() + x2.cols());
  for (std::size_t i = 0; i < x1.rows(); ++i) {
    auto row = x1.row(i);
    for (const auto& [j, v] : x2.row(i)) row.emplace_back(j + x1.cols(), v);
    out.add_row(std::move(row), x1.ids()[i]);
  }
  return out;
}

KernelMatrix linear_gram(const SparseFeatureMatrix& x, const SparseFeatureMatrix& y) {
  if (x.cols() != y.cols())
    throw ValidationError("feature counts differ: " + std::to_string(x.cols()) + " vs " + std::to_string(y.cols()));
  KernelMatrix k(x.ids(), y.ids(), KernelKind::linear);
  auto dot = [](const SparseFeatureMatrix::Row& a, const SparseFeatureMatrix::Row& b) {
    double s = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i].first < b[j].first) ++i;
      else if (b[j].first < a[i].first) ++j;
      else s += a[i++].second * b[j++].second;
    }
    return s;
  };
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j) k.at(i, j) = dot(x.row(i), y.row(j));
  for (std::size_t i = 0; i < x.rows(); ++i) k.diag_rows.push_back(dot(x.row(i), x.row(i)));
  for (std::size_t j = 0; j < y.rows(); ++j) k.diag_cols.push_back(dot(y.row(j), y.row(j)));
  return k;
}

namespace {

void check_ids(const std::vector<std::string>& a, const std::vector<std::string>& b, const char* axis) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    if (a[i] != b[i])
      throw ValidationError(std::string(axis) + " id mismatch at position " + std::to_string(i) + ": '" + a[i] +
                            "' vs '" + b[i] + "'");
  if (a.size() != b.size())
    throw ValidationError(std::string(axis) + " counts differ: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + " (first divergent id '" +
                          (a.size() > b.size() ? a[n] : b[n]) + "')");
}

}  // namespace

KernelMatrix sum_kernels(const KernelMatrix& k1, const KernelMatrix& k2) {
  check_ids(k1.row_ids, k2.row_ids, "row");
  check_ids(k1.col_ids, k2.col_ids, "col");
  if (k1.rows != k2.rows || k1.cols != k2.cols) throw ValidationError("kernel shapes differ");
  KernelMatrix out = k1;
  out.kind = KernelKind::fused;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = k1.values[i] + k2.values[i];
  auto add_diag = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> s;
    if (a.size() != b.size()) return s;
    for (std::size_t i = 0; i < a.size(); ++i) s.push_back(a[i] + b[i]);
    return s;
  };
  out.diag_rows = add_diag(k1.diag_rows, k2.diag_rows);
  out.diag_cols = add_diag(k1.diag_cols, k2.diag_cols);
  return out;
}

}  // namespace kaes
