/// @file precond.hpp
/// @brief Sampled Gram assembly and the symmetric Gauss-Seidel preconditioner.

#ifndef RSLS_PRECOND_HPP
#define RSLS_PRECOND_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include "rsls/matrix.hpp"

namespace rsls {

/// A Gram diagonal entry at or below this is treated as a missing column.
inline constexpr double kMinGramDiagonal = 1e-14;
inline constexpr std::size_t kDefaultSgsSweeps = 5;

/// Thrown when a column of A_s is (numerically) empty, so A_sᵀA_s has a
/// zero diagonal and Gauss-Seidel cannot divide by it.
class DegenerateGramError : public std::runtime_error {
 public:
  DegenerateGramError(std::size_t column, double value)
      : std::runtime_error("Gram diagonal " + std::to_string(column) + " is " +
                           std::to_string(value) + " (column missed by the sample)"),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

/// Symmetric n×n Gram matrix MᵀM with the full pattern in CSR.
class GramMatrix {
 public:
  GramMatrix() = default;
  /// Symmetrizes `m` as (M + Mᵀ)/2 and checks the diagonal.
  explicit GramMatrix(const SparseMatrix& m);

  std::size_t dim() const noexcept { return storage_.rows(); }
  const SparseMatrix& storage() const noexcept { return storage_; }
  const Vector& diag() const noexcept { return diag_; }

 private:
  SparseMatrix storage_;
  Vector diag_;
};

/// Explicit product A_sᵀA_s. The sparse path is a row-by-row Gustavson
/// product over the transpose; the dense path is a plain triple loop.
GramMatrix assemble_gram(const SparseMatrix& a_s);
GramMatrix assemble_gram(const DenseMatrix& a_s);
GramMatrix assemble_gram(const Matrix& a_s);

/// Interface PCG uses: e = P r, a fixed symmetric positive definite map.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual std::size_t dim() const = 0;
  virtual void apply(std::span<const double> r, std::span<double> e) const = 0;

  Vector apply(std::span<const double> r) const {
    Vector e(r.size());
    apply(r, e);
    return e;
  }
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  explicit IdentityPreconditioner(std::size_t n) : n_(n) {}
  std::size_t dim() const override { return n_; }
  void apply(std::span<const double> r, std::span<double> e) const override;

 private:
  std::size_t n_;
};

/// t forward Gauss-Seidel sweeps on G e = r starting from e = 0, followed by
/// t backward sweeps. Equal sweep counts make the operator symmetric.
class SgsPreconditioner final : public Preconditioner {
 public:
  SgsPreconditioner(GramMatrix gram, std::size_t sweeps = kDefaultSgsSweeps);

  std::size_t dim() const override { return gram_.dim(); }
  std::size_t sweeps() const noexcept { return sweeps_; }
  const GramMatrix& gram() const noexcept { return gram_; }

  void apply(std::span<const double> r, std::span<double> e) const override;
  using Preconditioner::apply;

 private:
  GramMatrix gram_;
  std::size_t sweeps_;
};

/// e = SGS(G, r, t), free-function form.
Vector sgs_apply(const SgsPreconditioner& p, std::span<const double> r);

/// Assembles A_sᵀA_s once and wraps it. Propagates DegenerateGramError.
SgsPreconditioner build_preconditioner(const Matrix& a_s,
                                       std::size_t sweeps = kDefaultSgsSweeps);

}  // namespace rsls

#endif  // RSLS_PRECOND_HPP
