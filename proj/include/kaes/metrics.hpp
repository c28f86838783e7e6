#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "kaes/corpus.hpp"

namespace kaes {

struct QwkReport {
  double kappa = 0.0;
  /// confusion[i][j]: items with pred = min + i and gold = min + j.
  std::vector<std::vector<std::size_t>> confusion;
  std::size_t n_items = 0;
  ScoreRange score_range{};
  /// Both ratings use a single score level each; expected disagreement can
  /// vanish, so kappa is defined by convention (1 if the levels match, else 0).
  bool degenerate = false;
};

/// Quadratic weighted kappa over the full declared score range:
/// 1 - sum(w * O) / sum(w * E), w_ij = (i - j)^2 / (N - 1)^2, E the outer
/// product of the marginals divided by n.
QwkReport qwk(std::span<const int> pred, std::span<const int> gold, ScoreRange range);

/// Unweighted mean of the kappas.
double average_qwk(std::span<const QwkReport> reports);
double average(std::span<const double> values);

/// "qwk kappa=0.785000 n_items=356 range=2-12 degenerate=0"
void write_qwk_block(std::ostream& out, const QwkReport& report);

}  // namespace kaes
