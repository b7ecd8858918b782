/// @file experiment.hpp
/// @brief Benchmark harness: matrix families, CG vs PCG-RS comparisons with
/// repeated trials, and CSV/Markdown table output.

#ifndef RSLS_EXPERIMENT_HPP
#define RSLS_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rsls/matrix.hpp"
#include "rsls/solvers.hpp"

namespace rsls {

enum class Family { gaussian, semi_gaussian, sprand, udv, graph_laplacian, coherent };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

/// One generated instance. Fields not used by the family are ignored.
struct FamilyParams {
  Family family = Family::gaussian;
  std::size_t m = 0;
  std::size_t n = 0;
  double density = 0.0;  // sprand
  double cond = 1.0;     // sprand, udv
  // graph_laplacian: n is the per-graph vertex count before gluing.
  double beta1 = 5.0;
  double d1 = 30.0;
  double beta2 = 8.0;
  std::optional<double> d2;
  double i0 = 11.0;

  /// Throws std::invalid_argument when the parameters do not suit the family.
  void validate() const;
};

Matrix generate(const FamilyParams& p, std::uint64_t seed);

/// All parameters relevant to the family, for manifests.
nlohmann::json describe(const FamilyParams& p);

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<FamilyParams> rows;
  SolverConfig solver;
  std::size_t repeats = 10;
  std::uint64_t seed = 1;
  /// Gaussian noise added to the consistent rhs, relative to ‖b‖.
  double noise = 0.0;
  /// Whether to compute κ(AᵀA) and μ(A) per row (dense eigensolve).
  bool spectral = true;

  void validate() const;
};

/// Reads {"name", "family", "rows": [{...}], "repeats", "seed", "noise",
/// "spectral", "solver": {"tol", "max_iter", "sgs_sweeps", "sample_factor"}}.
/// A top-level "family" applies to rows that do not name their own.
ExperimentConfig experiment_from_json(const nlohmann::json& j);

struct TableRow {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t nnz = 0;
  std::optional<double> kappa_normal;
  std::optional<double> mu;
  double residual_cg = 0.0;
  std::size_t iter_cg = 0;
  double residual_rs = 0.0;
  std::size_t iter_rs = 0;
  double time_cg = 0.0;
  double setup_cg = 0.0;
  double time_rs = 0.0;
  double setup_rs = 0.0;
  // PCG-RS statistics over the repeats; std fields only when repeats > 1.
  double iter_mean = 0.0;
  std::optional<double> iter_std;
  double time_mean = 0.0;
  std::optional<double> time_std;
  double setup_mean = 0.0;
  std::optional<double> setup_std;
  bool converged_cg = false;
  bool converged_rs = false;
};

/// Per row: generates A with seed + row index, builds a consistent rhs, runs
/// CG once (it is deterministic) and PCG-RS `repeats` times with solver seed
/// seed + trial. The first trial fills the single-run RS columns.
std::vector<TableRow> run_experiment(const ExperimentConfig& cfg);

/// Sample mean and (n − 1) standard deviation; std is absent for one value.
std::pair<double, std::optional<double>> mean_std(const std::vector<double>& v);

/// Column names in TableRow field order.
const std::vector<std::string>& table_columns();
/// Columns whose values depend on wall-clock time.
bool is_timing_column(std::string_view name);

std::string table_csv(const std::vector<TableRow>& rows);

/// Residual/iteration, time, and mean/std tables in Markdown, with Sum
/// columns (Time + Setup) on the time table.
std::string table_markdown(const std::vector<TableRow>& rows, std::string_view title);

}  // namespace rsls

#endif  // RSLS_EXPERIMENT_HPP
