#include "kaes/metrics.hpp"

#include <cstdio>

#include "kaes/error.hpp"

namespace kaes {

QwkReport qwk(std::span<const int> pred, std::span<const int> gold, ScoreRange range) {
  if (pred.size() != gold.size())
    throw ValidationError("qwk: " + std::to_string(pred.size()) + " predictions vs " +
                          std::to_string(gold.size()) + " gold scores");
  if (pred.empty()) throw ValidationError("qwk needs at least one item");
  if (range.levels() < 2) throw ValidationError("qwk needs a range with at least two levels");
  const auto n_levels = static_cast<std::size_t>(range.levels());

  QwkReport rep;
  rep.score_range = range;
  rep.n_items = pred.size();
  rep.confusion.assign(n_levels, std::vector<std::size_t>(n_levels, 0));
  std::vector<double> pred_marg(n_levels, 0.0), gold_marg(n_levels, 0.0);
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (!range.contains(pred[t]) || !range.contains(gold[t]))
      throw ValidationError("qwk: score outside range " + std::to_string(range.min) + "-" +
                            std::to_string(range.max) + " at item " + std::to_string(t));
    const auto i = static_cast<std::size_t>(pred[t] - range.min);
    const auto j = static_cast<std::size_t>(gold[t] - range.min);
    ++rep.confusion[i][j];
    pred_marg[i] += 1.0;
    gold_marg[j] += 1.0;
  }

  std::size_t pred_levels = 0, gold_levels = 0;
  for (std::size_t i = 0; i < n_levels; ++i) {
    pred_levels += pred_marg[i] > 0.0;
    gold_levels += gold_marg[i] > 0.0;
  }
  if (pred_levels == 1 && gold_levels == 1) {
    rep.degenerate = true;
    rep.kappa = pred.front() == gold.front() ? 1.0 : 0.0;
    return rep;
  }

  const double n = static_cast<double>(rep.n_items);
  const double denom_w = static_cast<double>((n_levels - 1) * (n_levels - 1));
  double observed = 0.0, expected = 0.0;
  for (std::size_t i = 0; i < n_levels; ++i)
    for (std::size_t j = 0; j < n_levels; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      const double w = d * d / denom_w;
      observed += w * static_cast<double>(rep.confusion[i][j]);
      expected += w * pred_marg[i] * gold_marg[j] / n;
    }
  // expected > 0 whenever either rating uses two or more levels.
  rep.kappa = 1.0 - observed / expected;
  return rep;
}

double average(std::span<const double> values) {
  if (values.empty()) throw ValidationError("average of an empty list");
  double s = 0.0;
  for (const double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double average_qwk(std::span<const QwkReport> reports) {
  if (reports.empty()) throw ValidationError("average_qwk of an empty list");
  double s = 0.0;
  for (const auto& r : reports) s += r.kappa;
  return s / static_cast<double>(reports.size());
}

void write_qwk_block(std::ostream& out, const QwkReport& report) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "qwk kappa=%.6f n_items=%zu range=%d-%d degenerate=%d\n", report.kappa,
                report.n_items, report.score_range.min, report.score_range.max, report.degenerate ? 1 : 0);
  out << buf;
}

}  // namespace kaes
