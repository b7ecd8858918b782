/// @file generators.hpp
/// @brief Test-matrix families: Gaussian, semi-Gaussian, sparse random with a
/// prescribed condition number, UDV, and power-law random-graph incidence
/// matrices. Every generator is a pure function of its parameters and seed.

#ifndef RSLS_GENERATORS_HPP
#define RSLS_GENERATORS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "rsls/matrix.hpp"

namespace rsls {

/// i.i.d. N(0,1) entries.
DenseMatrix gen_gaussian(std::size_t m, std::size_t n, std::uint64_t seed);

/// [[G, 0], [0, I_{n/2}]] with G an (m − n/2) × (n/2) Gaussian block.
/// Coherence is exactly 1 because of the identity block. Requires even n.
SparseMatrix gen_semi_gaussian(std::size_t m, std::size_t n, std::uint64_t seed);

/// [I_n; 0], the maximally coherent m × n matrix.
SparseMatrix gen_coherent(std::size_t m, std::size_t n);

/// Sparse m × n matrix with about density·m·n nonzeros and condition number
/// `cond`. Starts from a scattered diagonal holding the geometric profile
/// σ_j = cond^{−j/(n−1)} and applies random Givens rotations to row pairs and
/// column pairs until the nonzero target is met (at most 4·target
/// rotations). Row rotations split the row of largest leverage into an empty
/// row, which keeps the coherence near 4n/m. Rotations are orthogonal, so the
/// singular values are exact.
SparseMatrix gen_sprand(std::size_t m, std::size_t n, double density, double cond,
                        std::uint64_t seed);

/// U·D·V with U (m × n, orthonormal columns) and V (n × n orthogonal) from
/// QR of Gaussian matrices and D = diag of n equally spaced values from 1 to
/// `cond`.
DenseMatrix gen_udv(std::size_t m, std::size_t n, double cond, std::uint64_t seed);

/// Power-law expected-degree model parameters. Exactly one of `i0` or
/// `max_degree` is used; `i0` wins when both are set.
struct PowerLawParams {
  std::size_t n = 0;
  double beta = 5.0;
  double d = 30.0;
  std::optional<double> i0;
  std::optional<double> max_degree;

  /// i0 given directly, or n·[d(β−2) / (max_degree·(β−1))]^{β−1}.
  double resolved_i0() const;
};

struct GraphModel {
  PowerLawParams params;
  double i0 = 0.0;
  std::vector<double> weights;  // expected degrees w_i
  SparseMatrix adjacency;       // symmetric 0/1, zero diagonal
  SparseMatrix incidence;       // edges from the pattern of adjacency²
};

/// Weights w_i = c·i^{−1/(β−1)} for i = i0, …, i0+n−1 with
/// c = (β−2)/(β−1) · d · n^{−1/(β−1)}.
std::vector<double> powerlaw_weights(const PowerLawParams& params);

/// Draws each pair i < j independently with probability min(w_i w_j ρ, 1),
/// ρ = 1/Σw, then builds the incidence matrix from the squared adjacency.
GraphModel gen_powerlaw_graph(const PowerLawParams& params, std::uint64_t seed);

/// Edges are the strictly upper nonzeros (i < j) of adjacencyᵀ·adjacency;
/// each row carries +1 at i and −1 at j. Throws if there are no edges.
SparseMatrix build_incidence_from_square(const SparseMatrix& adjacency);

/// Stacks two incidence matrices, identifying the last `overlap` vertices of
/// the first graph with the first `overlap` vertices of the second.
SparseMatrix glue_graphs(const SparseMatrix& b1, const SparseMatrix& b2,
                         std::size_t overlap = 5);

/// Drops all-zero columns (isolated vertices).
SparseMatrix filter_isolated(const SparseMatrix& b);

/// Full graph-Laplacian pipeline: B1 (β=5, d=30) and B2 (β=8, d=5n), both with
/// i0 = 11, glued with a 5-vertex overlap, isolated vertices removed.
struct GraphLaplacianParams {
  std::size_t n = 100;
  double beta1 = 5.0;
  double d1 = 30.0;
  double beta2 = 8.0;
  /// Unset means 5n.
  std::optional<double> d2;
  double i0 = 11.0;
  std::size_t overlap = 5;
};
SparseMatrix gen_graph_laplacian_incidence(const GraphLaplacianParams& params,
                                           std::uint64_t seed);

struct ConsistentRhs {
  Vector b;
  Vector x_true;
};

/// b = A·x_true with x_true ~ N(0, I). With noise > 0, adds a Gaussian
/// perturbation scaled to noise·‖A x_true‖.
ConsistentRhs consistent_rhs(const Matrix& a, std::uint64_t seed, double noise = 0.0);

}  // namespace rsls

#endif  // RSLS_GENERATORS_HPP
