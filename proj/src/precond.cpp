#include "rsls/precond.hpp"

#include <algorithm>
#include <stdexcept>

namespace rsls {

namespace {

// (M + Mᵀ)/2 over the union of both patterns.
SparseMatrix symmetrize(const SparseMatrix& m) {
  const SparseMatrix mt = m.transpose();
  const std::size_t n = m.rows();
  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> vals;
  idx.reserve(m.nnz());
  vals.reserve(m.nnz());
  for (std::size_t i = 0; i < n; ++i) {
    auto ca = m.row_cols(i);
    auto va = m.row_values(i);
    auto cb = mt.row_cols(i);
    auto vb = mt.row_values(i);
    std::size_t p = 0, q = 0;
    while (p < ca.size() || q < cb.size()) {
      if (q == cb.size() || (p < ca.size() && ca[p] < cb[q])) {
        idx.push_back(ca[p]);
        vals.push_back(0.5 * va[p]);
        ++p;
      } else if (p == ca.size() || cb[q] < ca[p]) {
        idx.push_back(cb[q]);
        vals.push_back(0.5 * vb[q]);
        ++q;
      } else {
        idx.push_back(ca[p]);
        vals.push_back(0.5 * (va[p] + vb[q]));
        ++p;
        ++q;
      }
    }
    offsets[i + 1] = idx.size();
  }
  return SparseMatrix(n, n, std::move(offsets), std::move(idx), std::move(vals));
}

}  // namespace

GramMatrix::GramMatrix(const SparseMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("GramMatrix: matrix must be square");
  storage_ = symmetrize(m);
  diag_.assign(storage_.rows(), 0.0);
  for (std::size_t i = 0; i < storage_.rows(); ++i) {
    diag_[i] = storage_.at(i, i);
    if (!(diag_[i] > kMinGramDiagonal)) throw DegenerateGramError(i, diag_[i]);
  }
}

GramMatrix assemble_gram(const SparseMatrix& a_s) {
  const std::size_t n = a_s.cols();
  if (n == 0) throw DimensionError("assemble_gram: matrix has no columns");
  const SparseMatrix at = a_s.transpose();

  std::vector<double> acc(n, 0.0);
  std::vector<std::size_t> mark(n, n);  // mark[j] == i  <=>  j touched in row i
  std::vector<std::size_t> touched;
  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i) {
    touched.clear();
    auto ts = at.row_cols(i);
    auto tv = at.row_values(i);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double a_ti = tv[k];
      auto rc = a_s.row_cols(ts[k]);
      auto rv = a_s.row_values(ts[k]);
      for (std::size_t l = 0; l < rc.size(); ++l) {
        const std::size_t j = rc[l];
        if (mark[j] != i) {
          mark[j] = i;
          acc[j] = 0.0;
          touched.push_back(j);
        }
        acc[j] += a_ti * rv[l];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::size_t j : touched) {
      idx.push_back(j);
      vals.push_back(acc[j]);
    }
    offsets[i + 1] = idx.size();
  }
  return GramMatrix(SparseMatrix(n, n, std::move(offsets), std::move(idx), std::move(vals)));
}

GramMatrix assemble_gram(const DenseMatrix& a_s) {
  const std::size_t n = a_s.cols();
  if (n == 0) throw DimensionError("assemble_gram: matrix has no columns");
  DenseMatrix g(n, n);
  for (std::size_t t = 0; t < a_s.rows(); ++t) {
    auto r = a_s.row(t);
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = r[i];
      if (ri == 0.0) continue;
      auto gi = g.row(i);
      for (std::size_t j = 0; j < n; ++j) gi[j] += ri * r[j];
    }
  }
  return GramMatrix(SparseMatrix::from_dense(g));
}

GramMatrix assemble_gram(const Matrix& a_s) {
  return std::visit([](const auto& m) { return assemble_gram(m); }, a_s);
}

void IdentityPreconditioner::apply(std::span<const double> r, std::span<double> e) const {
  if (r.size() != n_ || e.size() != n_) throw DimensionError("IdentityPreconditioner: size");
  std::copy(r.begin(), r.end(), e.begin());
}

SgsPreconditioner::SgsPreconditioner(GramMatrix gram, std::size_t sweeps)
    : gram_(std::move(gram)), sweeps_(sweeps) {
  if (sweeps_ < 1) throw std::invalid_argument("SgsPreconditioner: sweeps must be >= 1");
}

void SgsPreconditioner::apply(std::span<const double> r, std::span<double> e) const {
  const std::size_t n = gram_.dim();
  if (r.size() != n || e.size() != n)
    throw DimensionError("sgs_apply: residual has " + std::to_string(r.size()) +
                         " entries, preconditioner dimension is " + std::to_string(n));
  const SparseMatrix& g = gram_.storage();
  const auto& off = g.row_offsets();
  const auto& idx = g.col_indices();
  const auto& val = g.values();
  const auto& d = gram_.diag();

  // One in-place Gauss-Seidel update of row i: with B the lower triangle,
  // e + B⁻¹(r − Ge) solves B e' = r − (G − B) e, i.e. each e_i uses the
  // already-updated earlier entries. The backward sweep mirrors it with Bᵀ.
  auto relax = [&](std::size_t i) {
    double sum = r[i];
    for (std::size_t k = off[i]; k < off[i + 1]; ++k)
      if (idx[k] != i) sum -= val[k] * e[idx[k]];
    e[i] = sum / d[i];
  };

  std::fill(e.begin(), e.end(), 0.0);
  for (std::size_t sweep = 0; sweep < sweeps_; ++sweep)
    for (std::size_t i = 0; i < n; ++i) relax(i);
  for (std::size_t sweep = 0; sweep < sweeps_; ++sweep)
    for (std::size_t i = n; i-- > 0;) relax(i);
}

Vector sgs_apply(const SgsPreconditioner& p, std::span<const double> r) { return p.apply(r); }

SgsPreconditioner build_preconditioner(const Matrix& a_s, std::size_t sweeps) {
  return SgsPreconditioner(assemble_gram(a_s), sweeps);
}

}  // namespace rsls
