/// @file sampling.hpp
/// @brief Row sampling with probability proportional to the squared row norm.
///
/// Row i of A is drawn with probability p_i = ‖a_i‖² / ‖A‖_F². After s
/// i.i.d. draws i_1..i_s, the sampled matrix A_s has row t equal to
/// a_{i_t} / sqrt(s · p_{i_t}), which makes A_sᵀA_s an unbiased estimator of
/// AᵀA.

#ifndef RSLS_SAMPLING_HPP
#define RSLS_SAMPLING_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "rsls/matrix.hpp"

namespace rsls {

/// Probabilities below this are treated as exactly zero.
inline constexpr double kMinSamplingProbability = 1e-300;

/// Probability mass over the rows of a matrix.
class SamplingDensity {
 public:
  /// Normalizes nonnegative weights into a density. Throws if every weight
  /// is zero or any weight is negative / non-finite.
  explicit SamplingDensity(std::vector<double> weights);

  /// Equal mass on every row. Only useful to demonstrate why uniform
  /// sampling fails on coherent matrices.
  static SamplingDensity uniform(std::size_t rows);

  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }

  /// Inverse-CDF lookup: smallest row whose cumulative mass exceeds u·total.
  /// Rows with zero probability are never returned.
  std::size_t draw(double u) const;

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

/// p_k = ‖a_k‖² / ‖A‖_F². Throws std::invalid_argument for a zero matrix.
SamplingDensity row_sampling_density(const Matrix& a);

/// ⌈4 n ln n⌉; `factor` replaces the 4. Throws for n < 2.
std::size_t default_sample_size(std::size_t n, double factor = 4.0);

/// The row selection and scaling that defines the sampling operator S.
struct SamplePlan {
  std::uint64_t seed = 0;
  std::size_t sample_size = 0;
  std::vector<std::size_t> indices;
  std::vector<double> weights;  // 1 / sqrt(s · p_index)
};

/// Draws s rows i.i.d. with replacement. Deterministic in `seed`.
SamplePlan draw_sample_plan(const SamplingDensity& density, std::size_t s, std::uint64_t seed);

/// A_s = S·A. Sparse input stays sparse.
Matrix apply_sample(const Matrix& a, const SamplePlan& plan);
DenseMatrix apply_sample(const DenseMatrix& a, const SamplePlan& plan);
SparseMatrix apply_sample(const SparseMatrix& a, const SamplePlan& plan);

void to_json(nlohmann::json& j, const SamplePlan& plan);
void from_json(const nlohmann::json& j, SamplePlan& plan);

}  // namespace rsls

#endif  // RSLS_SAMPLING_HPP
