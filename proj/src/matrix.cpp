#include "rsls/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rsls {

namespace {

void require_finite(double v, const char* where) {
  if (!std::isfinite(v)) throw DimensionError(std::string(where) + ": non-finite entry");
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_)
    throw DimensionError("DenseMatrix: entry count " + std::to_string(entries_.size()) +
                         " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
  for (double v : entries_) require_finite(v, "DenseMatrix");
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  entries_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("DenseMatrix: ragged initializer");
    for (double v : r) {
      require_finite(v, "DenseMatrix");
      entries_.push_back(v);
    }
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix id(n, n);
  for (std::size_t i = 0; i < n; ++i) id(i, i) = 1.0;
  return id;
}

std::size_t DenseMatrix::nnz() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](double v) { return v != 0.0; }));
}

// ---------------------------------------------------------------------------
// SparseMatrix

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols,
                           std::vector<std::size_t> row_offsets,
                           std::vector<std::size_t> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (row_offsets_.size() != rows_ + 1)
    throw DimensionError("SparseMatrix: row_offsets must have rows+1 entries");
  if (col_indices_.size() != values_.size())
    throw DimensionError("SparseMatrix: col_indices and values differ in length");

  // Drop explicit zeros in place.
  if (std::find(values_.begin(), values_.end(), 0.0) != values_.end()) {
    std::size_t out = 0;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const std::size_t end = row_offsets_[i + 1];
      if (end < begin || end > values_.size())
        throw DimensionError("SparseMatrix: row_offsets not monotone at row " +
                             std::to_string(i));
      for (std::size_t k = begin; k < end; ++k) {
        if (values_[k] != 0.0) {
          col_indices_[out] = col_indices_[k];
          values_[out] = values_[k];
          ++out;
        }
      }
      begin = end;
      row_offsets_[i + 1] = out;
    }
    col_indices_.resize(out);
    values_.resize(out);
  }
  validate();
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets,
                                         bool reject_duplicates) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols)
      throw DimensionError("SparseMatrix: triplet (" + std::to_string(t.row) + ", " +
                           std::to_string(t.col) + ") out of range");
    require_finite(t.value, "SparseMatrix");
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<std::size_t> cols_out;
  std::vector<double> vals_out;
  cols_out.reserve(triplets.size());
  vals_out.reserve(triplets.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    while (k < triplets.size() && triplets[k].row == i) {
      const std::size_t j = triplets[k].col;
      double v = triplets[k].value;
      ++k;
      while (k < triplets.size() && triplets[k].row == i && triplets[k].col == j) {
        if (reject_duplicates)
          throw DimensionError("SparseMatrix: duplicate entry (" + std::to_string(i) + ", " +
                               std::to_string(j) + ")");
        v += triplets[k].value;
        ++k;
      }
      if (v != 0.0) {
        cols_out.push_back(j);
        vals_out.push_back(v);
      }
    }
    offsets[i + 1] = cols_out.size();
  }
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out), std::move(vals_out));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense) {
  std::vector<std::size_t> offsets(dense.rows() + 1, 0);
  std::vector<std::size_t> cols_out;
  std::vector<double> vals_out;
  for (std::size_t i = 0; i < dense.rows(); ++i) {
    for (std::size_t j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        cols_out.push_back(j);
        vals_out.push_back(dense(i, j));
      }
    }
    offsets[i + 1] = cols_out.size();
  }
  return SparseMatrix(dense.rows(), dense.cols(), std::move(offsets), std::move(cols_out),
                      std::move(vals_out));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> offsets(n + 1);
  std::iota(offsets.begin(), offsets.end(), std::size_t{0});
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return SparseMatrix(n, n, std::move(offsets), std::move(idx), std::vector<double>(n, 1.0));
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  auto c = row_cols(i);
  auto it = std::lower_bound(c.begin(), c.end(), j);
  if (it == c.end() || *it != j) return 0.0;
  return values_[row_offsets_[i] + static_cast<std::size_t>(it - c.begin())];
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      d(i, col_indices_[k]) = values_[k];
  return d;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<std::size_t> offsets(cols_ + 1, 0);
  for (std::size_t j : col_indices_) ++offsets[j + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<std::size_t> next(offsets.begin(), offsets.end() - 1);
  std::vector<std::size_t> idx(nnz());
  std::vector<double> vals(nnz());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const std::size_t dst = next[col_indices_[k]]++;
      idx[dst] = i;
      vals[dst] = values_[k];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(offsets), std::move(idx), std::move(vals));
}

void SparseMatrix::validate() const {
  if (row_offsets_.size() != rows_ + 1)
    throw DimensionError("CSR: row_offsets must have rows+1 entries");
  if (row_offsets_.front() != 0) throw DimensionError("CSR: row_offsets[0] != 0");
  if (row_offsets_.back() != values_.size())
    throw DimensionError("CSR: row_offsets[rows] != nnz");
  if (col_indices_.size() != values_.size())
    throw DimensionError("CSR: col_indices and values differ in length");
  for (std::size_t i = 0; i < rows_; ++i) {
    if (row_offsets_[i] > row_offsets_[i + 1])
      throw DimensionError("CSR: row_offsets decreasing at row " + std::to_string(i));
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (col_indices_[k] >= cols_)
        throw DimensionError("CSR: column index out of range in row " + std::to_string(i));
      if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1])
        throw DimensionError("CSR: column indices not strictly increasing in row " +
                             std::to_string(i));
      if (values_[k] == 0.0)
        throw DimensionError("CSR: explicit zero stored in row " + std::to_string(i));
      require_finite(values_[k], "CSR");
    }
  }
}

// ---------------------------------------------------------------------------
// Variant dispatch

std::size_t rows(const Matrix& a) {
  return std::visit([](const auto& m) { return m.rows(); }, a);
}
std::size_t cols(const Matrix& a) {
  return std::visit([](const auto& m) { return m.cols(); }, a);
}
std::size_t nnz(const Matrix& a) {
  return std::visit([](const auto& m) { return m.nnz(); }, a);
}
DenseMatrix to_dense(const Matrix& a) {
  if (const auto* d = std::get_if<DenseMatrix>(&a)) return *d;
  return std::get<SparseMatrix>(a).to_dense();
}

// ---------------------------------------------------------------------------
// Products

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols())
    throw DimensionError("matvec: matrix has " + std::to_string(a.cols()) +
                         " columns, vector has " + std::to_string(x.size()) + " entries");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) sum += r[j] * x[j];
    y[i] = sum;
  }
  return y;
}

Vector matvec(const SparseMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols())
    throw DimensionError("matvec: matrix has " + std::to_string(a.cols()) +
                         " columns, vector has " + std::to_string(x.size()) + " entries");
  Vector y(a.rows(), 0.0);
  const auto& off = a.row_offsets();
  const auto& idx = a.col_indices();
  const auto& val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) sum += val[k] * x[idx[k]];
    y[i] = sum;
  }
  return y;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  return std::visit([&](const auto& m) { return matvec(m, x); }, a);
}

Vector transpose_matvec(const DenseMatrix& a, std::span<const double> y) {
  if (y.size() != a.rows())
    throw DimensionError("transpose_matvec: matrix has " + std::to_string(a.rows()) +
                         " rows, vector has " + std::to_string(y.size()) + " entries");
  Vector x(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) x[j] += r[j] * yi;
  }
  return x;
}

Vector transpose_matvec(const SparseMatrix& a, std::span<const double> y) {
  if (y.size() != a.rows())
    throw DimensionError("transpose_matvec: matrix has " + std::to_string(a.rows()) +
                         " rows, vector has " + std::to_string(y.size()) + " entries");
  Vector x(a.cols(), 0.0);
  const auto& off = a.row_offsets();
  const auto& idx = a.col_indices();
  const auto& val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double yi = y[i];
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) x[idx[k]] += val[k] * yi;
  }
  return x;
}

Vector transpose_matvec(const Matrix& a, std::span<const double> y) {
  return std::visit([&](const auto& m) { return transpose_matvec(m, y); }, a);
}

// ---------------------------------------------------------------------------
// Norms

Vector column_norms(const DenseMatrix& a) {
  Vector sq(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) sq[j] += r[j] * r[j];
  }
  for (double& v : sq) v = std::sqrt(v);
  return sq;
}

Vector column_norms(const SparseMatrix& a) {
  Vector sq(a.cols(), 0.0);
  const auto& idx = a.col_indices();
  const auto& val = a.values();
  for (std::size_t k = 0; k < val.size(); ++k) sq[idx[k]] += val[k] * val[k];
  for (double& v : sq) v = std::sqrt(v);
  return sq;
}

Vector column_norms(const Matrix& a) {
  return std::visit([](const auto& m) { return column_norms(m); }, a);
}

Vector row_squared_norms(const DenseMatrix& a) {
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double v : a.row(i)) s += v * v;
    out[i] = s;
  }
  return out;
}

Vector row_squared_norms(const SparseMatrix& a) {
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double v : a.row_values(i)) s += v * v;
    out[i] = s;
  }
  return out;
}

Vector row_squared_norms(const Matrix& a) {
  return std::visit([](const auto& m) { return row_squared_norms(m); }, a);
}

double frobenius_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (double v : a.entries()) s += v * v;
  return std::sqrt(s);
}

double frobenius_norm(const SparseMatrix& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return std::sqrt(s);
}

double frobenius_norm(const Matrix& a) {
  return std::visit([](const auto& m) { return frobenius_norm(m); }, a);
}

namespace {

void check_nonzero_columns(const Vector& norms) {
  for (std::size_t j = 0; j < norms.size(); ++j)
    if (norms[j] == 0.0)
      throw ZeroColumnError(j, "normalize_columns: column " + std::to_string(j) +
                                   " is identically zero");
}

}  // namespace

std::pair<DenseMatrix, Vector> normalize_columns(const DenseMatrix& a) {
  Vector d = column_norms(a);
  check_nonzero_columns(d);
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] /= d[j];
  }
  return {std::move(out), std::move(d)};
}

std::pair<SparseMatrix, Vector> normalize_columns(const SparseMatrix& a) {
  Vector d = column_norms(a);
  check_nonzero_columns(d);
  std::vector<double> vals = a.values();
  const auto& idx = a.col_indices();
  for (std::size_t k = 0; k < vals.size(); ++k) vals[k] /= d[idx[k]];
  SparseMatrix out(a.rows(), a.cols(), a.row_offsets(), a.col_indices(), std::move(vals));
  return {std::move(out), std::move(d)};
}

std::pair<Matrix, Vector> normalize_columns(const Matrix& a) {
  return std::visit(
      [](const auto& m) -> std::pair<Matrix, Vector> {
        auto [scaled, d] = normalize_columns(m);
        return {Matrix(std::move(scaled)), std::move(d)};
      },
      a);
}

// ---------------------------------------------------------------------------

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace rsls
