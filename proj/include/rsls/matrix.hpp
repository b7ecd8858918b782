/// @file matrix.hpp
/// @brief Dense (row-major) and sparse (CSR) matrices with the handful of
/// kernels the least-squares solvers need.

#ifndef RSLS_MATRIX_HPP
#define RSLS_MATRIX_HPP

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace rsls {

using Vector = std::vector<double>;

/// Raised on shape mismatches and malformed matrix data.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a column that must be nonzero is identically zero.
class ZeroColumnError : public std::runtime_error {
 public:
  ZeroColumnError(std::size_t column, const std::string& what)
      : std::runtime_error(what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {entries_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {entries_.data() + i * cols_, cols_};
  }

  const std::vector<double>& entries() const noexcept { return entries_; }
  std::vector<double>& entries() noexcept { return entries_; }

  /// Number of structurally nonzero entries.
  std::size_t nnz() const;

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

/// One (row, col, value) entry, 0-based.
struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row and explicit zeros are never stored.
class SparseMatrix {
 public:
  SparseMatrix() : row_offsets_(1, 0) {}
  SparseMatrix(std::size_t rows, std::size_t cols);

  /// Takes ownership of raw CSR arrays. Explicit zeros are dropped and the
  /// result is validated; throws DimensionError on any violation.
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices, std::vector<double> values);

  /// Builds from unordered triplets. Duplicates are summed unless
  /// `reject_duplicates` is set, in which case they throw.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets,
                                    bool reject_duplicates = false);
  static SparseMatrix from_dense(const DenseMatrix& dense);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
  const std::vector<std::size_t>& col_indices() const noexcept { return col_indices_; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }

  /// Entry lookup by binary search within the row.
  double at(std::size_t i, std::size_t j) const;

  DenseMatrix to_dense() const;
  SparseMatrix transpose() const;

  /// Throws DimensionError describing the first violated CSR invariant.
  void validate() const;

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

/// Either storage kind; what the solvers and the CLI pass around.
using Matrix = std::variant<DenseMatrix, SparseMatrix>;

std::size_t rows(const Matrix& a);
std::size_t cols(const Matrix& a);
std::size_t nnz(const Matrix& a);
DenseMatrix to_dense(const Matrix& a);

// Products are accumulated in ascending row/column order so results are
// bit-reproducible.
Vector matvec(const DenseMatrix& a, std::span<const double> x);
Vector matvec(const SparseMatrix& a, std::span<const double> x);
Vector matvec(const Matrix& a, std::span<const double> x);

/// y = Aᵀx without forming Aᵀ.
Vector transpose_matvec(const DenseMatrix& a, std::span<const double> y);
Vector transpose_matvec(const SparseMatrix& a, std::span<const double> y);
Vector transpose_matvec(const Matrix& a, std::span<const double> y);

Vector column_norms(const DenseMatrix& a);
Vector column_norms(const SparseMatrix& a);
Vector column_norms(const Matrix& a);

Vector row_squared_norms(const DenseMatrix& a);
Vector row_squared_norms(const SparseMatrix& a);
Vector row_squared_norms(const Matrix& a);

double frobenius_norm(const DenseMatrix& a);
double frobenius_norm(const SparseMatrix& a);
double frobenius_norm(const Matrix& a);

/// Returns (A·D⁻¹, diag D) with D_jj the norm of column j. Throws
/// ZeroColumnError for an all-zero column.
std::pair<DenseMatrix, Vector> normalize_columns(const DenseMatrix& a);
std::pair<SparseMatrix, Vector> normalize_columns(const SparseMatrix& a);
std::pair<Matrix, Vector> normalize_columns(const Matrix& a);

// Small vector helpers shared by the solvers.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace rsls

#endif  // RSLS_MATRIX_HPP
