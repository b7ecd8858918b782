#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "rsls/generators.hpp"
#include "rsls/sampling.hpp"
#include "rsls/solvers.hpp"

using namespace rsls;
using rsls::test::max_abs_diff;

namespace {

// ‖x − y‖_{AᵀA} = ‖A(x − y)‖.
double energy_norm(const Matrix& a, const Vector& x, const Vector& y) {
  Vector d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  return norm2(matvec(a, d));
}

}  // namespace

TEST_CASE("config validation and defaults") {
  SolverConfig cfg;
  CHECK(cfg.tol == 1e-7);
  CHECK(cfg.sgs_sweeps == 5);
  CHECK(cfg.sample_factor == 4.0);
  CHECK(cfg.retries_on_degenerate_sample == 3);
  CHECK(cfg.resolved_max_iter(40) == 200);
  cfg.tol = 1.0;
  CHECK_THROWS(cfg.validate());
  cfg.tol = 1e-7;
  cfg.max_iter = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("CG on the identity") {
  const Vector b{1, 2, 3};
  const auto res = cg_normal(Matrix{DenseMatrix::identity(3)}, b, SolverConfig{});
  CHECK(res.report.iterations == 1);
  CHECK(res.report.converged);
  CHECK(max_abs_diff(res.x, b) <= 1e-15);
  CHECK(res.report.residual_history.size() == 2);
  CHECK(res.report.residual_history[0] == 1.0);
  CHECK(res.report.sample_size == 0);
}

TEST_CASE("consistent 2×1 system") {
  const Matrix a = DenseMatrix{{1}, {1}};
  const auto res = cg_normal(a, Vector{2, 2}, SolverConfig{});
  CHECK(res.x[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("zero Aᵀb returns zero immediately") {
  const Matrix a = DenseMatrix{{1, 0}, {0, 1}, {0, 0}};
  const auto res = cg_normal(a, Vector{0, 0, 5}, SolverConfig{});
  CHECK(res.report.converged);
  CHECK(res.report.iterations == 0);
  CHECK(res.x == Vector{0, 0});
  CHECK(res.report.residual_history.size() == 1);
}

TEST_CASE("rhs validation") {
  const Matrix a = DenseMatrix::identity(2);
  CHECK_THROWS_AS(cg_normal(a, Vector{1}, SolverConfig{}), DimensionError);
  CHECK_THROWS_AS(cg_normal(a, Vector{1, std::nan("")}, SolverConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(pcg_normal(a, Vector{1, 1}, IdentityPreconditioner(3), SolverConfig{}),
                  DimensionError);
}

TEST_CASE("dense oracle hand examples") {
  CHECK(dense_lsq_oracle(DenseMatrix::identity(2), Vector{1, 2}) == Vector{1, 2});
  const DenseMatrix a{{1}, {1}};
  const Vector x = dense_lsq_oracle(a, Vector{1, 3});
  CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-15));
  const Vector r = matvec(a, x);
  CHECK(std::hypot(r[0] - 1.0, r[1] - 3.0) == doctest::Approx(std::sqrt(2.0)));
  try {
    dense_lsq_oracle(DenseMatrix{{1, 1}, {1, 1}, {2, 2}}, Vector{1, 2, 3});
    FAIL("expected rank deficiency");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("rank deficient") != std::string::npos);
  }
}

TEST_CASE("dense oracle agrees with CG") {
  const DenseMatrix a = rsls::test::random_dense(200, 20, 3);
  const Vector b = rsls::test::random_vector(200, 4);
  const Vector xo = dense_lsq_oracle(a, b);
  const auto res = cg_normal(Matrix{a}, b, SolverConfig{});
  CHECK(res.report.converged);
  CHECK(max_abs_diff(res.x, xo) <= 1e-6 * norm2(xo));
}

TEST_CASE("identity preconditioner reproduces CG") {
  const Matrix a = rsls::test::random_dense(50, 10, 5);
  const Vector b = rsls::test::random_vector(50, 6);
  SolverConfig cfg;
  const auto cg = cg_normal(a, b, cfg);
  const auto pcg = pcg_normal(a, b, IdentityPreconditioner(10), cfg);
  CHECK(cg.report.iterations == pcg.report.iterations);
  CHECK(max_abs_diff(cg.x, pcg.x) <= 1e-12);
  CHECK(max_abs_diff(cg.report.residual_history, pcg.report.residual_history) <= 1e-12);
  // Same iterates at every truncation, not only at the end.
  for (std::size_t k = 1; k <= 6; ++k) {
    cfg.max_iter = k;
    CHECK(max_abs_diff(cg_normal(a, b, cfg).x, pcg_normal(a, b, IdentityPreconditioner(10), cfg).x) <=
          1e-12);
  }
}

TEST_CASE("converged reports satisfy the true residual") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix a = gen_udv(600, 30, 100.0, seed);
    const Vector b = rsls::test::random_vector(600, seed + 50);
    for (const auto& res : {lsq_solve_cg(a, b, SolverConfig{}), lsq_solve_rs(a, b, SolverConfig{})}) {
      REQUIRE(res.report.converged);
      CHECK(res.report.final_relres <= 1e-7);
      CHECK(res.report.residual_history.size() == res.report.iterations + 1);
      CHECK(normal_relative_residual(a, b, res.x) <= 1e-6);
    }
  }
}

TEST_CASE("non-convergence is reported, not thrown") {
  const Matrix a = gen_udv(500, 40, 1e4, 3);
  const Vector b = consistent_rhs(a, 4).b;
  SolverConfig cfg;
  cfg.max_iter = 5;
  const auto res = lsq_solve_cg(a, b, cfg);
  CHECK_FALSE(res.report.converged);
  CHECK(res.report.iterations == 5);
  CHECK(res.report.final_relres > 1e-7);
}

TEST_CASE("RS driver on the identity") {
  // The sampled Gram of I is diag(c_j·n/s) with c_j the draw counts, so the
  // preconditioned operator has one eigenvalue per distinct count and PCG
  // terminates within that many steps.
  const std::size_t n = 20;
  const Matrix a = SparseMatrix::identity(n);
  SolverConfig cfg;
  cfg.seed = 3;
  const auto res = lsq_solve_rs(a, Vector(n, 1.0), cfg);
  CHECK(res.report.converged);
  CHECK(res.report.sample_size == default_sample_size(n));
  CHECK(max_abs_diff(res.x, Vector(n, 1.0)) <= 1e-6);

  const auto plan = draw_sample_plan(row_sampling_density(a), res.report.sample_size, cfg.seed);
  std::vector<std::size_t> counts(n, 0);
  for (std::size_t i : plan.indices) ++counts[i];
  std::sort(counts.begin(), counts.end());
  const auto distinct =
      static_cast<std::size_t>(std::unique(counts.begin(), counts.end()) - counts.begin());
  CHECK(res.report.iterations <= distinct);
}

TEST_CASE("RS driver matches the oracle and unscales") {
  DenseMatrix a = rsls::test::random_dense(500, 40, 12);
  for (std::size_t i = 0; i < 500; ++i)
    for (std::size_t j = 0; j < 40; ++j) a(i, j) *= 1.0 + static_cast<double>(j);
  const Vector b = rsls::test::random_vector(500, 13);
  const Vector xo = dense_lsq_oracle(a, b);
  const auto res = lsq_solve_rs(Matrix{a}, b, SolverConfig{});
  CHECK(res.report.converged);
  CHECK(energy_norm(Matrix{a}, res.x, xo) <= 1e-5 * norm2(matvec(a, xo)));
}

TEST_CASE("RS driver is deterministic") {
  const Matrix a = gen_gaussian(800, 30, 2);
  const Vector b = consistent_rhs(a, 3).b;
  SolverConfig cfg;
  cfg.seed = 77;
  const auto r1 = lsq_solve_rs(a, b, cfg);
  const auto r2 = lsq_solve_rs(a, b, cfg);
  CHECK(r1.x == r2.x);
  CHECK(r1.report.iterations == r2.report.iterations);
  CHECK(r1.report.residual_history == r2.report.residual_history);
}

TEST_CASE("zero column is an error") {
  const Matrix a = DenseMatrix{{1, 0}, {2, 0}, {3, 0}};
  CHECK_THROWS_AS(lsq_solve_rs(a, Vector{1, 2, 3}, SolverConfig{}), ZeroColumnError);
}

TEST_CASE("degenerate samples are redrawn, and fail after the retries") {
  // Two columns living on disjoint rows: a sample covers both only if it
  // draws from each side.
  const std::size_t m = 50;
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < m; ++i) t.push_back({i, 0, 1.0});
  t.push_back({m, 1, 1.0});
  const Matrix a = SparseMatrix::from_triplets(m + 1, 2, t);
  const Vector b = consistent_rhs(a, 1).b;

  SolverConfig cfg;
  cfg.sample_factor = 0.5;  // s = 1: one row never covers both columns
  CHECK_THROWS_AS(lsq_solve_rs(a, b, cfg), DegenerateGramError);

  cfg.sample_factor = 1.0;  // s = 2: each attempt succeeds with probability 1/2
  std::size_t redrawn = 0, failed = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    cfg.seed = seed;
    try {
      const auto res = lsq_solve_rs(a, b, cfg);
      CHECK(res.report.converged);
      CHECK(res.report.sample_redraws <= cfg.retries_on_degenerate_sample);
      redrawn += res.report.sample_redraws > 0;
    } catch (const DegenerateGramError&) {
      ++failed;
    }
  }
  CHECK(redrawn > 0);
  CHECK(failed < 40);
}

TEST_CASE("graph Laplacian systems converge in the range") {
  GraphLaplacianParams gp;
  gp.n = 60;
  const Matrix b_inc = gen_graph_laplacian_incidence(gp, 5);
  const ConsistentRhs rhs = consistent_rhs(b_inc, 6);
  for (const auto& res : {lsq_solve_cg(b_inc, rhs.b, SolverConfig{}), lsq_solve_rs(b_inc, rhs.b, SolverConfig{})}) {
    REQUIRE(res.report.converged);
    const Vector ax = matvec(b_inc, res.x);
    const Vector at = matvec(b_inc, rhs.x_true);
    CHECK(max_abs_diff(ax, at) <= 10 * 1e-7 * norm2(at));
    Vector d(ax.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = ax[i] - at[i];
    CHECK(norm2(d) <= 10 * 1e-7 * norm2(at));
  }
}

TEST_CASE("report JSON and CSV") {
  const auto res = cg_normal(Matrix{DenseMatrix::identity(3)}, Vector{1, 2, 3}, SolverConfig{});
  nlohmann::json j = res.report;
  CHECK(j.at("iterations") == 1);
  CHECK(j.at("converged") == true);
  CHECK(j.at("residual_history").size() == 2);
  CHECK(solve_report_csv_header() ==
        "iterations,converged,final_relres,setup_seconds,solve_seconds,sample_size");
  const std::string row = solve_report_csv_row(res.report);
  CHECK(row.rfind("1,1,", 0) == 0);
  nlohmann::json c = SolverConfig{};
  CHECK(c.at("max_iter").is_null());
  CHECK(c.at("tol") == 1e-7);
}
