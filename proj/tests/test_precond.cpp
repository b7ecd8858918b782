#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "rsls/diagnostics.hpp"
#include "rsls/precond.hpp"
#include "rsls/sampling.hpp"

using namespace rsls;
using rsls::test::max_abs_diff;
using rsls::test::random_vector;

namespace {

// Literal dense transcription: t times e += B⁻¹(r − Ge), then t times
// e += Bᵀ⁻¹(r − Ge), with B the lower triangle of G including the diagonal.
Vector reference_sgs(const DenseMatrix& g, const Vector& r, std::size_t t) {
  const std::size_t n = g.rows();
  Vector e(n, 0.0);
  auto residual = [&] {
    Vector res = r;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) res[i] -= g(i, j) * e[j];
    return res;
  };
  for (std::size_t k = 0; k < t; ++k) {
    const Vector res = residual();
    Vector d(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = res[i];
      for (std::size_t j = 0; j < i; ++j) v -= g(i, j) * d[j];
      d[i] = v / g(i, i);
    }
    for (std::size_t i = 0; i < n; ++i) e[i] += d[i];
  }
  for (std::size_t k = 0; k < t; ++k) {
    const Vector res = residual();
    Vector d(n);
    for (std::size_t i = n; i-- > 0;) {
      double v = res[i];
      for (std::size_t j = i + 1; j < n; ++j) v -= g(j, i) * d[j];
      d[i] = v / g(i, i);
    }
    for (std::size_t i = 0; i < n; ++i) e[i] += d[i];
  }
  return e;
}

DenseMatrix random_spd(std::size_t n, std::uint64_t seed) {
  const DenseMatrix b = rsls::test::random_dense(n + 5, n, seed);
  return dense_gram(Matrix{b});
}

SgsPreconditioner sgs_of(const DenseMatrix& g, std::size_t t) {
  return SgsPreconditioner(GramMatrix(SparseMatrix::from_dense(g)), t);
}

}  // namespace

TEST_CASE("assemble_gram hand examples") {
  CHECK(assemble_gram(SparseMatrix::identity(2)).storage().to_dense() ==
        DenseMatrix::identity(2));
  const GramMatrix g = assemble_gram(DenseMatrix{{1, 1}, {0, 1}});
  CHECK(g.storage().to_dense() == DenseMatrix{{1, 1}, {1, 2}});
  CHECK(g.diag() == Vector{1, 2});
}

TEST_CASE("dense and sparse Gram paths agree") {
  const SparseMatrix s = rsls::test::random_sparse(500, 30, 0.1, 21);
  const DenseMatrix ds = assemble_gram(s).storage().to_dense();
  const DenseMatrix dd = assemble_gram(s.to_dense()).storage().to_dense();
  CHECK(max_abs_diff(ds.entries(), dd.entries()) <= 1e-12);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 30; ++j) CHECK(ds(i, j) == ds(j, i));
}

TEST_CASE("Gram with a missed column is rejected") {
  const DenseMatrix a{{1, 0, 2}, {3, 0, 1}};
  try {
    assemble_gram(a);
    FAIL("expected DegenerateGramError");
  } catch (const DegenerateGramError& e) {
    CHECK(e.column() == 1);
  }
  CHECK_THROWS_AS(build_preconditioner(Matrix{SparseMatrix::from_dense(a)}),
                  DegenerateGramError);
}

TEST_CASE("diagonal Gram: one sweep pair gives D⁻¹r") {
  const DenseMatrix g{{2, 0, 0}, {0, 4, 0}, {0, 0, 0.5}};
  const Vector e = sgs_apply(sgs_of(g, 1), Vector{1, 1, 1});
  CHECK(e == Vector{0.5, 0.25, 2.0});
}

TEST_CASE("2×2 example against the hand value and the dense reference") {
  const DenseMatrix g{{2, 1}, {1, 2}};
  const Vector r{1, 1};
  // Forward: e = (0.5, 0.25). Backward on r − Ge = (−0.25, 0): d = (−0.125, 0).
  const Vector e = sgs_apply(sgs_of(g, 1), r);
  CHECK(e[0] == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(e[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(max_abs_diff(e, reference_sgs(g, r, 1)) <= 1e-15);
}

TEST_CASE("matches the dense reference on random SPD matrices") {
  for (std::size_t t : {1u, 2u, 5u}) {
    const DenseMatrix g = random_spd(12, 30 + t);
    const Vector r = random_vector(12, 40 + t);
    CHECK(max_abs_diff(sgs_apply(sgs_of(g, t), r), reference_sgs(g, r, t)) <= 1e-10);
  }
}

TEST_CASE("t = 50 converges to the direct solve") {
  const DenseMatrix g = random_spd(10, 7);
  const Vector r = random_vector(10, 8);
  Eigen::MatrixXd ge(10, 10);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) ge(i, j) = g(i, j);
  const Eigen::VectorXd x = ge.llt().solve(Eigen::Map<const Eigen::VectorXd>(r.data(), 10));
  const Vector e = sgs_apply(sgs_of(g, 50), r);
  double err = 0.0;
  for (std::size_t i = 0; i < 10; ++i) err += (e[i] - x(i)) * (e[i] - x(i));
  CHECK(std::sqrt(err) <= 1e-8 * x.norm());
}

TEST_CASE("identity sample gives e = r") {
  const SgsPreconditioner p = build_preconditioner(Matrix{SparseMatrix::identity(6)});
  CHECK(p.sweeps() == 5);
  const Vector r = random_vector(6, 2);
  CHECK(p.apply(r) == r);
}

TEST_CASE("linear, symmetric and positive definite") {
  const Matrix a = normalize_columns(Matrix{rsls::test::random_dense(400, 20, 3)}).first;
  const auto plan = draw_sample_plan(row_sampling_density(a), default_sample_size(20), 4);
  const SgsPreconditioner p = build_preconditioner(apply_sample(a, plan));
  for (std::uint64_t k = 0; k < 100; ++k) {
    const Vector r1 = random_vector(20, 100 + k);
    const Vector r2 = random_vector(20, 300 + k);
    const Vector p1 = p.apply(r1);
    const Vector p2 = p.apply(r2);
    CHECK(dot(p1, r1) > 0.0);
    CHECK(std::abs(dot(p1, r2) - dot(r1, p2)) <= 1e-10 * norm2(p1) * norm2(r2));
    Vector comb(20);
    for (std::size_t i = 0; i < 20; ++i) comb[i] = 2.5 * r1[i] - 0.75 * r2[i];
    const Vector pc = p.apply(comb);
    double scale = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
      const double expect = 2.5 * p1[i] - 0.75 * p2[i];
      scale = std::max(scale, std::abs(expect));
      CHECK(std::abs(pc[i] - expect) <= 1e-10 * (1.0 + scale));
    }
  }
}

TEST_CASE("fixed point is preserved") {
  const DenseMatrix g = random_spd(8, 5);
  const Vector e_star = random_vector(8, 6);
  Vector r(8, 0.0);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) r[i] += g(i, j) * e_star[j];
  const Vector e = sgs_apply(sgs_of(g, 200), r);
  CHECK(max_abs_diff(e, e_star) <= 1e-9 * norm2(e_star));
}

TEST_CASE("smoothing of the top eigenvector") {
  const std::size_t n = 50, m = 2000;
  const Matrix a = normalize_columns(Matrix{rsls::test::random_dense(m, n, 77)}).first;
  const DenseMatrix g = dense_gram(a);
  Eigen::MatrixXd ge(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ge(i, j) = g(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ge);
  const Eigen::VectorXd top = es.eigenvectors().col(n - 1);
  const Vector x(top.data(), top.data() + n);

  const auto density = row_sampling_density(a);
  const std::size_t s = default_sample_size(n);
  std::size_t good = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const Matrix a_s = apply_sample(a, draw_sample_plan(density, s, 1000 + trial));
    const SgsPreconditioner p = build_preconditioner(a_s);
    // E x = x − P·(A_sᵀA_s)·x
    const Vector gx = transpose_matvec(a_s, matvec(a_s, x));
    const Vector pgx = p.apply(gx);
    Vector ex(n);
    for (std::size_t i = 0; i < n; ++i) ex[i] = x[i] - pgx[i];
    good += norm2(ex) <= 0.2 * norm2(x);
  }
  CHECK(good >= 90);
}
