/// @file solvers.hpp
/// @brief CG and PCG on the normal equation AᵀAx = Aᵀb, the row-sampling
/// preconditioned driver, and a small dense oracle used for verification.

#ifndef RSLS_SOLVERS_HPP
#define RSLS_SOLVERS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsls/matrix.hpp"
#include "rsls/precond.hpp"

namespace rsls {

struct SolverConfig {
  double tol = 1e-7;
  /// Unset means 5n.
  std::optional<std::size_t> max_iter;
  std::size_t sgs_sweeps = kDefaultSgsSweeps;
  double sample_factor = 4.0;
  std::uint64_t seed = 0;
  std::size_t retries_on_degenerate_sample = 3;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  std::size_t resolved_max_iter(std::size_t n) const { return max_iter.value_or(5 * n); }
};

struct SolveReport {
  std::size_t iterations = 0;
  bool converged = false;
  /// ‖Aᵀb − AᵀAx_k‖ / ‖Aᵀb‖ from the recurrence, one entry per iterate.
  std::vector<double> residual_history;
  /// Same quantity recomputed from scratch at the returned iterate.
  double final_relres = 0.0;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  /// 0 for unpreconditioned CG.
  std::size_t sample_size = 0;
  /// Sample plans thrown away because their Gram had an empty column.
  std::size_t sample_redraws = 0;
};

struct SolveResult {
  Vector x;
  SolveReport report;
};

/// pᵀAᵀAp <= 0 during the iteration.
class SolverBreakdown : public std::runtime_error {
 public:
  SolverBreakdown(std::size_t iteration, double curvature)
      : std::runtime_error("CG breakdown at iteration " + std::to_string(iteration) +
                           ": pᵀAᵀAp = " + std::to_string(curvature)),
        iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Plain CG on AᵀAx = Aᵀb from x₀ = 0 using only A·u and Aᵀ·v. Non-convergence
/// within max_iter is reported, not thrown.
SolveResult cg_normal(const Matrix& a, std::span<const double> b, const SolverConfig& cfg);

/// Preconditioned CG on the same system; `p` must be symmetric positive
/// definite. With IdentityPreconditioner this reproduces cg_normal.
SolveResult pcg_normal(const Matrix& a, std::span<const double> b, const Preconditioner& p,
                       const SolverConfig& cfg);

/// The full pipeline: normalize columns, sample ⌈factor·n·ln n⌉ rows by
/// squared row norm, build the SGS preconditioner from the sample, run PCG on
/// the normalized system, then unscale. Report residuals refer to the
/// normalized system.
SolveResult lsq_solve_rs(const Matrix& a, std::span<const double> b, const SolverConfig& cfg);

/// Baseline used in the benchmark tables: CG on the column-normalized system
/// (equivalently, PCG with a diagonal preconditioner), unscaled on return.
SolveResult lsq_solve_cg(const Matrix& a, std::span<const double> b, const SolverConfig& cfg);

/// Dense Cholesky solve of AᵀAx = Aᵀb. Throws std::runtime_error("rank
/// deficient ...") when a pivot falls below 1e-12 · max diag(AᵀA).
Vector dense_lsq_oracle(const DenseMatrix& a, std::span<const double> b);

/// ‖Aᵀb − AᵀAx‖ / ‖Aᵀb‖ (0 when Aᵀb = 0).
double normal_relative_residual(const Matrix& a, std::span<const double> b,
                                std::span<const double> x);

void to_json(nlohmann::json& j, const SolverConfig& cfg);
void to_json(nlohmann::json& j, const SolveReport& report);
std::string solve_report_csv_header();
std::string solve_report_csv_row(const SolveReport& report);

}  // namespace rsls

#endif  // RSLS_SOLVERS_HPP
