/// @file diagnostics.hpp
/// @brief Spectral quantities (condition number, effective condition number,
/// coherence) and Monte Carlo checks of the row-sampling estimator.

#ifndef RSLS_DIAGNOSTICS_HPP
#define RSLS_DIAGNOSTICS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsls/matrix.hpp"

namespace rsls {

/// Largest n for which AᵀA is formed and eigensolved densely.
inline constexpr std::size_t kDenseSpectralLimit = 2000;

struct SpectralSummary {
  double lambda_max = 0.0;
  /// Smallest eigenvalue of AᵀA above rank_tolerance.
  double lambda_min_nonzero = 0.0;
  double rank_tolerance = 0.0;
  /// λmax / λmin-nonzero: κ(AᵀA), or the effective condition number when
  /// AᵀA is singular.
  double kappa_normal = 0.0;
  std::size_t numerical_rank = 0;
  /// Coherence max_i ‖u_i‖²; absent for rank-deficient A or approximate runs.
  std::optional<double> coherence;
  /// True when n exceeded kDenseSpectralLimit and power iteration was used.
  bool approximate = false;
};

SpectralSummary spectral_summary(const Matrix& a);

/// AᵀA as a dense matrix, accumulated in row order.
DenseMatrix dense_gram(const Matrix& a);

/// Ascending eigenvalues of a symmetric matrix.
Vector symmetric_eigenvalues(const DenseMatrix& g);

/// max |λ| of a symmetric matrix.
double symmetric_spectral_norm(const DenseMatrix& g);

struct ConcentrationReport {
  std::size_t trials = 0;
  std::size_t sample_size = 0;
  double epsilon = 0.0;
  std::size_t successes = 0;
  /// ‖A_sᵀA_s − AᵀA‖ per trial.
  std::vector<double> norms;
  double lambda_min = 0.0;  // of AᵀA
  double lambda_max = 0.0;
  std::vector<double> sampled_lambda_min;
  std::vector<double> sampled_lambda_max;
  /// Successful trials whose sampled spectrum lies in
  /// [λmin − ε, λmax + ε].
  std::size_t sandwich_holds = 0;
};

/// Draws `trials` independent plans (seed + trial) of size s and measures
/// the spectral deviation of the sampled Gram. `a` must be column-normalized
/// (‖A‖_F² = n) and n ≤ 500.
ConcentrationReport concentration_test(const Matrix& a, std::size_t s, double epsilon,
                                       std::size_t trials, std::uint64_t seed);

struct HighFrequencyReport {
  std::size_t trials = 0;
  double c_h = 0.0;
  /// Eigenvectors x of AᵀA with λmax ≤ C_h·λ(x).
  std::size_t high_frequency_vectors = 0;
  /// (trial, vector) pairs violating (1 ∓ C_h ε)(AᵀAx,x) bounds with ε the
  /// trial's measured deviation.
  std::size_t violations = 0;
  /// Mean over trials of |(A_sᵀA_s x,x)/(AᵀA x,x) − 1| for the top and the
  /// bottom eigenvector.
  double top_ratio_deviation = 0.0;
  double bottom_ratio_deviation = 0.0;
};

HighFrequencyReport high_frequency_test(const Matrix& a, std::size_t s, double c_h_proxy,
                                        std::size_t trials, std::uint64_t seed);

struct GramEdge {
  std::size_t i;
  std::size_t j;
  double value;
  bool operator==(const GramEdge&) const = default;
};

/// Off-diagonal entries (i < j) of a symmetric matrix with |value| ≥ theta.
std::vector<GramEdge> filtered_edges(const DenseMatrix& g, double theta);

/// |E1 ∩ E2| / |E1 ∪ E2| on the (i, j) pairs; 1 when both are empty.
double edge_jaccard(const std::vector<GramEdge>& e1, const std::vector<GramEdge>& e2);

struct FilteredGramReport {
  double theta = 0.0;
  std::size_t full_edges = 0;
  std::size_t sampled_edges = 0;
  double jaccard = 0.0;
  std::filesystem::path full_path;
  std::filesystem::path sampled_path;
};

/// Writes `<prefix>_full.tsv` and `<prefix>_sampled.tsv` with the thresholded
/// edges of AᵀA and A_sᵀA_s (0-based, tab-separated i, j, value).
FilteredGramReport filtered_gram_export(const Matrix& a, const Matrix& a_s, double theta,
                                        const std::filesystem::path& prefix);

void to_json(nlohmann::json& j, const SpectralSummary& s);
void to_json(nlohmann::json& j, const ConcentrationReport& r);
void to_json(nlohmann::json& j, const HighFrequencyReport& r);
void to_json(nlohmann::json& j, const FilteredGramReport& r);

}  // namespace rsls

#endif  // RSLS_DIAGNOSTICS_HPP
