#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kaes/kernel_matrix.hpp"

namespace kaes {

/// How c maps onto the dual box of r training rows.
enum class BoundScaling : std::uint8_t {
  /// 0 <= alpha <= c, sum(alpha + alpha*) = c * nu * r (LibSVM's solver).
  libsvm = 0,
  /// 0 <= alpha <= c / r, sum(alpha + alpha*) = c * nu (textbook form).
  per_sample = 1,
};

struct SvrConfig {
  double c = 1000.0;
  double nu = 0.1;
  double kkt_tolerance = 1e-3;
  std::uint64_t max_iterations = 10'000'000;  // pair updates
  BoundScaling scaling = BoundScaling::libsvm;
  /// Records the dual objective after every update (testing aid; O(r) per step).
  bool trace_objective = false;

  void validate() const;
};

enum class Termination : std::uint8_t { converged = 0, max_iterations = 1 };

struct SvrModel {
  std::vector<std::string> train_ids;
  /// alpha_i - alpha*_i per training row.
  std::vector<double> coefficients;
  /// Raw dual variables: alpha for rows 0..r-1, then alpha* for rows 0..r-1.
  std::vector<double> dual;
  double bias = 0.0;
  /// Tube half-width implied by nu at the optimum.
  double epsilon_star = 0.0;
  double objective = 0.0;
  double upper_bound = 0.0;
  double budget = 0.0;
  double final_violation = 0.0;
  std::uint64_t iterations = 0;
  Termination termination = Termination::converged;
  std::uint64_t seed = 0;
  SvrConfig config{};
  std::vector<double> objective_trace;

  bool warning() const noexcept { return termination != Termination::converged; }
  std::vector<std::string> support_ids() const;
};

/// 1/2 c'Kc - y'c for signed coefficients c.
double svr_dual_objective(const KernelMatrix& k, std::span<const double> y, std::span<const double> coefficients);

/// nu-SVR on a precomputed square kernel by SMO on the maximal violating
/// pair. The solver is deterministic and draws no random numbers; `seed` is
/// recorded in the model for provenance.
SvrModel train_nu_svr(const KernelMatrix& k, std::span<const double> y, const SvrConfig& config = {},
                      std::uint64_t seed = 0);

/// prediction[i] = sum_j coef[j] * K(i, j) + bias, columns matched to
/// training rows by id.
std::vector<double> predict(const SvrModel& model, const KernelMatrix& k_test_train);

/// Model file: "KAESSV01", u32 rows, per row an id string and f64
/// coefficient, f64 bias, f64 epsilon*, then the config and solver status.
void write_svr_model(std::ostream& out, const SvrModel& model);
SvrModel read_svr_model(std::istream& in);
void save_svr_model(const std::string& path, const SvrModel& model);
SvrModel load_svr_model(const std::string& path);

}  // namespace kaes
