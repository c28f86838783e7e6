#include <doctest.h>

#include <cmath>

#include "kaes/error.hpp"
#include "kaes/fusion.hpp"
#include "kaes/random.hpp"
#include "oracles/psd.hpp"

using namespace kaes;

namespace {

std::vector<double> random_dense(Rng& rng, std::size_t rows, std::size_t cols) {
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = uniform_real(rng) < 0.4 ? 0.0 : uniform_real(rng) * 4 - 2;
  return v;
}

std::vector<std::string> ids_for(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("d" + std::to_string(i));
  return ids;
}

}  // namespace

TEST_CASE("linear_gram examples") {
  const auto eye = SparseFeatureMatrix::from_dense({1, 0, 0, 0, 1, 0, 0, 0, 1}, 3, 3, ids_for(3));
  const auto g = linear_gram(eye, eye);
  CHECK(g.kind == KernelKind::linear);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(g.at(i, j) == (i == j ? 1.0 : 0.0));

  const auto x = SparseFeatureMatrix::from_dense({3, 0, -4}, 1, 3, {"x"});
  const auto one = linear_gram(x, x);
  CHECK(one.rows == 1);
  CHECK(one.at(0, 0) == 25.0);

  const auto wide = SparseFeatureMatrix::from_dense({1, 2, 3, 4}, 1, 4, {"w"});
  CHECK_THROWS_AS(linear_gram(x, wide), ValidationError);
}

TEST_CASE("add_row sorts and validates") {
  SparseFeatureMatrix m(5);
  m.add_row({{3, 2.0}, {0, 1.0}, {1, 0.0}}, "a");
  CHECK(m.row(0) == SparseFeatureMatrix::Row{{0, 1.0}, {3, 2.0}});
  CHECK_THROWS_AS(m.add_row({{5, 1.0}}), ValidationError);
  CHECK_THROWS_AS(m.add_row({{1, NAN}}), ValidationError);
  CHECK_THROWS_AS(m.add_row({{1, 1.0}, {1, 2.0}}), ValidationError);
}

TEST_CASE("concatenation equivalence") {
  Rng rng(99);
  for (int t = 0; t < 20; ++t) {
    const std::size_t r = 1 + uniform_index(rng, 20);
    const std::size_t m1 = 1 + uniform_index(rng, 20), m2 = 1 + uniform_index(rng, 20);
    const auto ids = ids_for(r);
    const auto x1 = SparseFeatureMatrix::from_dense(random_dense(rng, r, m1), r, m1, ids);
    const auto x2 = SparseFeatureMatrix::from_dense(random_dense(rng, r, m2), r, m2, ids);
    const auto cat = hconcat(x1, x2);
    CHECK(cat.cols() == m1 + m2);
    const auto fused = sum_kernels(linear_gram(x1, x1), linear_gram(x2, x2));
    const auto direct = linear_gram(cat, cat);
    for (std::size_t i = 0; i < fused.values.size(); ++i) CHECK(std::abs(fused.values[i] - direct.values[i]) <= 1e-10);
  }
}

TEST_CASE("sum_kernels") {
  Rng rng(7);
  const auto ids = ids_for(6);
  const auto x = SparseFeatureMatrix::from_dense(random_dense(rng, 6, 4), 6, 4, ids);
  const auto y = SparseFeatureMatrix::from_dense(random_dense(rng, 6, 9), 6, 9, ids);
  const auto z = SparseFeatureMatrix::from_dense(random_dense(rng, 6, 2), 6, 2, ids);
  const auto kx = linear_gram(x, x), ky = linear_gram(y, y), kz = linear_gram(z, z);

  KernelMatrix zero = kx;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  std::fill(zero.diag_rows.begin(), zero.diag_rows.end(), 0.0);
  std::fill(zero.diag_cols.begin(), zero.diag_cols.end(), 0.0);
  const auto same = sum_kernels(kx, zero);
  CHECK(same.values == kx.values);
  CHECK(same.kind == KernelKind::fused);

  CHECK(sum_kernels(kx, ky).values == sum_kernels(ky, kx).values);
  const auto left = sum_kernels(sum_kernels(kx, ky), kz), right = sum_kernels(kx, sum_kernels(ky, kz));
  for (std::size_t i = 0; i < left.values.size(); ++i) CHECK(left.values[i] == doctest::Approx(right.values[i]));

  const auto s = sum_kernels(kx, ky);
  CHECK(s.asymmetry() == 0.0);
  CHECK(oracle::is_psd(s));
  for (std::size_t i = 0; i < 6; ++i) CHECK(s.diag_rows[i] == doctest::Approx(kx.at(i, i) + ky.at(i, i)));

  auto renamed = ky;
  renamed.row_ids[3] = "other";
  renamed.col_ids[3] = "other";
  try {
    sum_kernels(kx, renamed);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("d3") != std::string::npos);
  }
  const auto small = linear_gram(SparseFeatureMatrix::from_dense({1, 2}, 1, 2, {"d0"}),
                                 SparseFeatureMatrix::from_dense({1, 2}, 1, 2, {"d0"}));
  CHECK_THROWS_AS(sum_kernels(kx, small), ValidationError);
}
