#include "kaes/svr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "kaes/binary_io.hpp"
#include "kaes/error.hpp"

namespace kaes {

namespace {

constexpr std::string_view kMagic = "KAESSV01";
constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void SvrConfig::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("SVR c must be positive");
  if (!(nu > 0.0 && nu <= 1.0)) throw ValidationError("SVR nu must lie in (0, 1]");
  if (!(kkt_tolerance > 0.0)) throw ValidationError("SVR kkt_tolerance must be positive");
  if (max_iterations == 0) throw ValidationError("SVR max_iterations must be positive");
}

std::vector<std::string> SvrModel::support_ids() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < coefficients.size(); ++i)
    if (coefficients[i] != 0.0) out.push_back(train_ids[i]);
  return out;
}

double svr_dual_objective(const KernelMatrix& k, std::span<const double> y, std::span<const double> coef) {
  if (k.rows != k.cols || coef.size() != k.rows || y.size() != k.rows)
    throw ValidationError("objective needs a square kernel and matching vectors");
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < k.rows; ++i) {
    if (coef[i] == 0.0) continue;
    double f = 0.0;
    for (std::size_t j = 0; j < k.cols; ++j) f += k.at(i, j) * coef[j];
    quad += coef[i] * f;
    lin += y[i] * coef[i];
  }
  return 0.5 * quad - lin;
}

SvrModel train_nu_svr(const KernelMatrix& k, std::span<const double> y, const SvrConfig& config,
                      std::uint64_t seed) {
  config.validate();
  if (k.rows == 0 || k.rows != k.cols) throw ValidationError("nu-SVR needs a non-empty square kernel");
  if (k.row_ids != k.col_ids) throw ValidationError("training kernel rows and columns name different documents");
  if (y.size() != k.rows)
    throw ValidationError("target count " + std::to_string(y.size()) + " does not match kernel size " +
                          std::to_string(k.rows));
  for (const double v : y)
    if (!std::isfinite(v)) throw ValidationError("nu-SVR target is not finite");
  for (const double v : k.values)
    if (!std::isfinite(v)) throw ValidationError("kernel matrix entry is not finite");
  if (k.asymmetry() > 1e-12) throw ValidationError("training kernel is not symmetric");

  const std::size_t r = k.rows;
  const double rd = static_cast<double>(r);
  const double bound = config.scaling == BoundScaling::libsvm ? config.c : config.c / rd;
  const double budget = config.scaling == BoundScaling::libsvm ? config.c * config.nu * rd : config.c * config.nu;

  // beta[0, r) = alpha (sign +1), beta[r, 2r) = alpha* (sign -1). Each half
  // sums to budget / 2; pair updates stay within one half, so both sums
  // (and sum of coefficients = 0) are invariant.
  std::vector<double> beta(2 * r, 0.0);
  {
    double remaining = budget / 2.0;
    for (std::size_t i = 0; i < r; ++i) {
      beta[i] = beta[i + r] = std::min(remaining, bound);
      remaining -= beta[i];
    }
  }
  // f = K * coef; gradient G_s = sign_s * f_{s mod r} - sign_s * y_{s mod r}.
  std::vector<double> f(r, 0.0);  // coef starts at zero
  auto coef_of = [&](std::size_t i) { return beta[i] - beta[i + r]; };
  auto gradient = [&](std::size_t s) {
    return s < r ? f[s] - y[s] : y[s - r] - f[s - r];
  };

  SvrModel model;
  model.config = config;
  model.seed = seed;
  model.upper_bound = bound;
  model.budget = budget;

  auto objective = [&] {
    double quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      const double c = coef_of(i);
      quad += c * f[i];
      lin += y[i] * c;
    }
    return 0.5 * quad - lin;
  };
  if (config.trace_objective) model.objective_trace.push_back(objective());

  std::uint64_t iter = 0;
  double violation = 0.0;
  model.termination = Termination::max_iterations;
  for (;;) {
    // Maximal violating pair within each half.
    double max_p = -kInf, min_p = kInf, max_n = -kInf, min_n = kInf;
    std::size_t ip = 0, jp = 0, in = 0, jn = 0;
    for (std::size_t i = 0; i < r; ++i) {
      const double g = gradient(i);
      if (beta[i] < bound && -g > max_p) {
        max_p = -g;
        ip = i;
      }
      if (beta[i] > 0.0 && -g < min_p) {
        min_p = -g;
        jp = i;
      }
      const std::size_t s = i + r;
      const double gs = gradient(s);
      if (beta[s] > 0.0 && gs > max_n) {
        max_n = gs;
        in = s;
      }
      if (beta[s] < bound && gs < min_n) {
        min_n = gs;
        jn = s;
      }
    }
    const double gap_p = max_p - min_p;
    const double gap_n = max_n - min_n;
    violation = std::max(gap_p, gap_n);
    if (!(violation >= config.kkt_tolerance)) {
      model.termination = Termination::converged;
      break;
    }
    if (iter >= config.max_iterations) break;
    ++iter;

    const std::size_t a = gap_p >= gap_n ? ip : in;
    const std::size_t b = gap_p >= gap_n ? jp : jn;
    const std::size_t ra = a % r, rb = b % r;
    double quad = k.at(ra, ra) + k.at(rb, rb) - 2.0 * k.at(ra, rb);
    if (quad <= 0.0) quad = kTau;
    const double old_a = beta[a], old_b = beta[b];
    const double delta = (gradient(a) - gradient(b)) / quad;
    const double sum = old_a + old_b;
    double na = old_a - delta, nb = old_b + delta;
    if (sum > bound) {
      if (na > bound) {
        na = bound;
        nb = sum - bound;
      }
    } else if (nb < 0.0) {
      nb = 0.0;
      na = sum;
    }
    if (sum > bound) {
      if (nb > bound) {
        nb = bound;
        na = sum - bound;
      }
    } else if (na < 0.0) {
      na = 0.0;
      nb = sum;
    }
    beta[a] = na;
    beta[b] = nb;

    const double sign = a < r ? 1.0 : -1.0;
    const double da = sign * (na - old_a), db = sign * (nb - old_b);
    for (std::size_t t = 0; t < r; ++t) f[t] += k.at(t, ra) * da + k.at(t, rb) * db;
    if (config.trace_objective) model.objective_trace.push_back(objective());
  }

  // Offset and tube width from the KKT conditions of each half.
  auto half_level = [&](std::size_t begin) {
    double ub = kInf, lb = -kInf, free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t s = begin; s < begin + r; ++s) {
      const double g = gradient(s);
      if (beta[s] >= bound)
        lb = std::max(lb, g);
      else if (beta[s] <= 0.0)
        ub = std::min(ub, g);
      else {
        free_sum += g;
        ++free_count;
      }
    }
    if (free_count > 0) return free_sum / static_cast<double>(free_count);
    if (!std::isfinite(ub)) return lb;
    if (!std::isfinite(lb)) return ub;
    return (ub + lb) / 2.0;
  };
  const double r1 = half_level(0);
  const double r2 = half_level(r);
  const double rho = (r1 - r2) / 2.0;

  model.train_ids = k.row_ids;
  model.dual = beta;
  model.coefficients.resize(r);
  for (std::size_t i = 0; i < r; ++i) model.coefficients[i] = coef_of(i);
  model.bias = -rho;
  model.epsilon_star = -(r1 + r2) / 2.0;
  model.objective = objective();
  model.iterations = iter;
  model.final_violation = violation;
  return model;
}

std::vector<double> predict(const SvrModel& model, const KernelMatrix& k) {
  if (k.values.size() != k.rows * k.cols) throw ValidationError("kernel matrix shape inconsistent");
  std::vector<double> out(k.rows, model.bias);
  if (k.col_ids == model.train_ids) {
    for (std::size_t i = 0; i < k.rows; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < k.cols; ++j) s += model.coefficients[j] * k.at(i, j);
      out[i] += s;
    }
    return out;
  }
  std::unordered_map<std::string, std::size_t> model_row;
  for (std::size_t j = 0; j < model.train_ids.size(); ++j) model_row.emplace(model.train_ids[j], j);
  std::vector<double> coef(k.cols);
  std::vector<char> covered(model.train_ids.size(), 0);
  for (std::size_t j = 0; j < k.cols; ++j) {
    const auto it = model_row.find(k.col_ids[j]);
    if (it == model_row.end())
      throw ValidationError("kernel column '" + k.col_ids[j] + "' is not a training row of the model");
    coef[j] = model.coefficients[it->second];
    covered[it->second] = 1;
  }
  for (std::size_t j = 0; j < model.train_ids.size(); ++j)
    if (!covered[j] && model.coefficients[j] != 0.0)
      throw ValidationError("support row '" + model.train_ids[j] + "' has no kernel column");
  for (std::size_t i = 0; i < k.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k.cols; ++j) s += coef[j] * k.at(i, j);
    out[i] += s;
  }
  return out;
}

void write_svr_model(std::ostream& out, const SvrModel& m) {
  io::write_magic(out, kMagic);
  io::write_u32(out, static_cast<std::uint32_t>(m.train_ids.size()));
  for (std::size_t i = 0; i < m.train_ids.size(); ++i) {
    io::write_string(out, m.train_ids[i]);
    io::write_f64(out, m.coefficients[i]);
  }
  io::write_f64(out, m.bias);
  io::write_f64(out, m.epsilon_star);
  io::write_f64(out, m.config.c);
  io::write_f64(out, m.config.nu);
  io::write_f64(out, m.config.kkt_tolerance);
  io::write_u64(out, m.config.max_iterations);
  io::write_u8(out, static_cast<std::uint8_t>(m.config.scaling));
  io::write_u8(out, static_cast<std::uint8_t>(m.termination));
  io::write_u64(out, m.iterations);
  io::write_f64(out, m.objective);
  io::write_u64(out, m.seed);
  if (!out) throw Error("failed writing SVR model");
}

SvrModel read_svr_model(std::istream& in) {
  io::Reader r(in);
  r.expect_magic(kMagic);
  SvrModel m;
  const std::uint32_t rows = r.u32("row count");
  for (std::uint32_t i = 0; i < rows; ++i) {
    m.train_ids.push_back(r.string("row id"));
    m.coefficients.push_back(r.f64("coefficient"));
  }
  m.bias = r.f64("bias");
  m.epsilon_star = r.f64("epsilon");
  m.config.c = r.f64("c");
  m.config.nu = r.f64("nu");
  m.config.kkt_tolerance = r.f64("kkt tolerance");
  m.config.max_iterations = r.u64("max iterations");
  const auto scaling = r.u8("bound scaling");
  if (scaling > 1) throw FormatError("unknown bound scaling tag");
  m.config.scaling = static_cast<BoundScaling>(scaling);
  const auto term = r.u8("termination");
  if (term > 1) throw FormatError("unknown termination tag");
  m.termination = static_cast<Termination>(term);
  m.iterations = r.u64("iterations");
  m.objective = r.f64("objective");
  m.seed = r.u64("seed");
  const double rd = static_cast<double>(rows);
  m.upper_bound = m.config.scaling == BoundScaling::libsvm ? m.config.c : m.config.c / rd;
  m.budget = m.config.scaling == BoundScaling::libsvm ? m.config.c * m.config.nu * rd : m.config.c * m.config.nu;
  return m;
}

void save_svr_model(const std::string& path, const SvrModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_svr_model(out, model);
}

SvrModel load_svr_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path);
  return read_svr_model(in);
}

}  // namespace kaes
