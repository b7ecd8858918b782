// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsls/diagnostics.hpp"
#include "rsls/experiment.hpp"
#include "rsls/generators.hpp"
#include "rsls/matrix.hpp"
#include "rsls/matrix_market.hpp"
#include "rsls/precond.hpp"
#include "rsls/random.hpp"
#include "rsls/sampling.hpp"
#include "rsls/solvers.hpp"

namespace fs = std::filesystem;
using namespace rsls;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Trials {
  double iter_mean = 0.0;
  double iter_std = 0.0;
  double worst_relres = 0.0;
  bool all_converged = true;
};

// PCG-RS with solver seeds 1..count on a fixed system.
Trials rs_trials(const Matrix& a, const Vector& b, std::size_t count) {
  std::vector<double> iters;
  Trials t;
  for (std::size_t k = 0; k < count; ++k) {
    SolverConfig cfg;
    cfg.seed = 1 + k;
    const SolveResult r = lsq_solve_rs(a, b, cfg);
    iters.push_back(static_cast<double>(r.report.iterations));
    t.worst_relres = std::max(t.worst_relres, r.report.final_relres);
    t.all_converged = t.all_converged && r.report.converged;
  }
  const auto [mean, sd] = mean_std(iters);
  t.iter_mean = mean;
  t.iter_std = sd.value_or(0.0);
  return t;
}

std::string trials_text(const Trials& t) {
  return "Iter.RS " + fmt("%.2f", t.iter_mean) + " ± " + fmt("%.2f", t.iter_std) +
         ", worst residual " + fmt("%.2e", t.worst_relres);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome gaussian() {
  const auto t0 = std::chrono::steady_clock::now();
  const Matrix a = gen_gaussian(3000, 109, 1);
  const Vector b = consistent_rhs(a, 2).b;
  const SolveResult cg = lsq_solve_cg(a, b, SolverConfig{});
  const Trials rs = rs_trials(a, b, 10);
  const double it_cg = static_cast<double>(cg.report.iterations);
  const bool pass = rs.iter_mean >= 9 && rs.iter_mean <= 14 && it_cg >= 8 && it_cg <= 13 &&
                    cg.report.converged && rs.all_converged && cg.report.final_relres <= 1e-7 &&
                    rs.worst_relres <= 1e-7;
  return {pass, "3000x109: Iter.CG " + std::to_string(cg.report.iterations) + ", " +
                    trials_text(rs) + ", " + fmt("%.2f", seconds_since(t0)) + " s"};
}

Outcome semi_gaussian() {
  const Matrix a = gen_semi_gaussian(3000, 108, 1);
  const SpectralSummary s = spectral_summary(normalize_columns(a).first);
  const Vector b = consistent_rhs(a, 2).b;
  const Trials rs = rs_trials(a, b, 10);
  const double mu = s.coherence.value_or(std::numeric_limits<double>::quiet_NaN());
  const bool pass = std::abs(mu - 1.0) <= 1e-10 && rs.iter_mean >= 10 && rs.iter_mean <= 14 &&
                    rs.all_converged && rs.worst_relres <= 1e-7;
  return {pass, "3000x108: mu " + fmt("%.12f", mu) + ", " + trials_text(rs)};
}

Outcome ill_conditioned() {
  const Matrix u = gen_udv(9000, 100, 1e3, 1);
  const Vector bu = consistent_rhs(u, 2).b;
  SolverConfig capped;
  capped.max_iter = 300;
  const SolveResult cg_u = lsq_solve_cg(u, bu, capped);
  const SolveResult rs_u = lsq_solve_rs(u, bu, SolverConfig{});
  const bool udv_ok = !cg_u.report.converged && rs_u.report.converged &&
                      rs_u.report.iterations <= 120;

  const Matrix s = gen_sprand(20000, 300, 0.01, 60.0, 1);
  const double kappa = spectral_summary(normalize_columns(s).first).kappa_normal;
  const Vector bs = consistent_rhs(s, 2).b;
  const SolveResult cg_s = lsq_solve_cg(s, bs, SolverConfig{});
  const Trials rs_s = rs_trials(s, bs, 10);
  const double ratio = static_cast<double>(cg_s.report.iterations) / rs_s.iter_mean;
  const bool sprand_ok = kappa >= 3e3 && kappa <= 2e4 && cg_s.report.converged &&
                         rs_s.all_converged && ratio >= 2.5;

  std::string detail = "udv 9000x100 cond 1e3: CG " +
                       std::string(cg_u.report.converged ? "converged" : "not converged") +
                       " in " + std::to_string(cg_u.report.iterations) + " (cap 300, residual " +
                       fmt("%.2e", cg_u.report.final_relres) + "), PCG-RS " +
                       std::to_string(rs_u.report.iterations) + "; sprand 20000x300: kappa " +
                       fmt("%.3g", kappa) + ", Iter.CG " +
                       std::to_string(cg_s.report.iterations) + ", " + trials_text(rs_s) +
                       ", ratio " + fmt("%.2f", ratio);
  return {udv_ok && sprand_ok, detail};
}

Outcome graph_laplacian() {
  const auto t0 = std::chrono::steady_clock::now();
  GraphLaplacianParams p;
  p.n = 100;
  const Matrix a = gen_graph_laplacian_incidence(p, 1);
  const Vector b = consistent_rhs(a, 2).b;
  const SolveResult cg = lsq_solve_cg(a, b, SolverConfig{});
  const Trials rs = rs_trials(a, b, 10);
  const double it_cg = static_cast<double>(cg.report.iterations);
  const bool pass = cg.report.converged && rs.all_converged && rs.iter_mean <= 25 &&
                    it_cg >= 1.6 * rs.iter_mean;
  return {pass, std::to_string(rows(a)) + "x" + std::to_string(cols(a)) + ": Iter.CG " +
                    std::to_string(cg.report.iterations) + ", " + trials_text(rs) + ", " +
                    fmt("%.2f", seconds_since(t0)) + " s"};
}

Outcome sample_size() {
  const std::size_t s100 = default_sample_size(100);
  const std::size_t s709 = default_sample_size(709);
  return {s100 == 1843 && s709 == 18616,
          "s(100) = " + std::to_string(s100) + ", s(709) = " + std::to_string(s709)};
}

Outcome unbiasedness() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t m = 20, n = 5, draws = 10000;
  DenseMatrix a(m, n);
  Rng rng(2024);
  for (double& v : a.entries()) v = rng.normal() * (1.0 + 2.0 * rng.uniform());
  const DenseMatrix g = dense_gram(Matrix{a});
  const SamplingDensity density = row_sampling_density(Matrix{a});

  std::vector<double> sum(n * n, 0.0), sum_sq(n * n, 0.0);
  for (std::size_t t = 0; t < draws; ++t) {
    const DenseMatrix row = apply_sample(a, draw_sample_plan(density, 1, 100 + t));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double v = row(0, i) * row(0, j);
        sum[i * n + j] += v;
        sum_sq[i * n + j] += v * v;
      }
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < n * n; ++k) {
    const double mean = sum[k] / draws;
    const double var = (sum_sq[k] - draws * mean * mean) / (draws - 1);
    const double se = std::sqrt(std::max(var, 0.0) / draws);
    const double dev = std::abs(mean - g(k / n, k % n));
    worst = std::max(worst, se > 0.0 ? dev / se : (dev == 0.0 ? 0.0 : HUGE_VAL));
  }
  return {worst <= 3.0, "20x5, 1e4 single draws: worst entry deviation " + fmt("%.2f", worst) +
                            " standard errors, " + fmt("%.2f", seconds_since(t0)) + " s"};
}

Outcome concentration() {
  const Matrix a = normalize_columns(Matrix{gen_gaussian(2000, 50, 1)}).first;
  const std::size_t s = default_sample_size(50);
  const ConcentrationReport r = concentration_test(a, s, 0.5, 100, 1);
  std::vector<double> norms = r.norms;
  std::sort(norms.begin(), norms.end());
  const double median = 0.5 * (norms[49] + norms[50]);
  return {r.successes >= 95 && r.sandwich_holds == r.successes,
          "2000x50, s " + std::to_string(s) + ", eps 0.5: " + std::to_string(r.successes) +
              "/100 within eps (median deviation " + fmt("%.3f", median) + "), sandwich " +
              std::to_string(r.sandwich_holds) + "/" + std::to_string(r.successes)};
}

Outcome oracle() {
  double worst_energy = 0.0;
  std::size_t unconverged = 0;
  Rng sizes(31);
  for (std::size_t k = 0; k < 25; ++k) {
    const std::size_t n = 5 + sizes.below(36);
    const std::size_t m = std::min<std::size_t>(500, 4 * n + sizes.below(300));
    DenseMatrix a = gen_gaussian(m, n, 100 + k);
    for (std::size_t j = 0; j < n; ++j) {
      const double scale = std::pow(10.0, 2.0 * sizes.uniform() - 1.0);
      for (std::size_t i = 0; i < m; ++i) a(i, j) *= scale;
    }
    Vector b(m);
    for (double& v : b) v = sizes.normal();
    const Vector xo = dense_lsq_oracle(a, b);
    SolverConfig cfg;
    cfg.seed = k;
    const SolveResult r = lsq_solve_rs(Matrix{a}, b, cfg);
    unconverged += !r.report.converged;
    Vector d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = r.x[j] - xo[j];
    worst_energy = std::max(worst_energy, norm2(matvec(a, d)) / norm2(matvec(a, xo)));
  }

  double worst_iterate = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix a = gen_udv(300, 30, 50.0, seed);
    Vector b(300);
    Rng rng(seed + 10);
    for (double& v : b) v = rng.normal();
    for (std::size_t k = 1; k <= 40; ++k) {
      SolverConfig cfg;
      cfg.max_iter = k;
      const Vector xc = cg_normal(a, b, cfg).x;
      const Vector xp = pcg_normal(a, b, IdentityPreconditioner(30), cfg).x;
      for (std::size_t j = 0; j < 30; ++j)
        worst_iterate = std::max(worst_iterate, std::abs(xc[j] - xp[j]));
    }
  }
  return {worst_energy <= 1e-5 && unconverged == 0 && worst_iterate <= 1e-12,
          "25 instances: worst relative energy error " + fmt("%.2e", worst_energy) + ", " +
              std::to_string(unconverged) + " unconverged; identity PCG vs CG iterate gap " +
              fmt("%.1e", worst_iterate)};
}

Outcome preconditioner() {
  const Matrix a = normalize_columns(Matrix{gen_gaussian(1000, 30, 5)}).first;
  const Matrix a_s =
      apply_sample(a, draw_sample_plan(row_sampling_density(a), default_sample_size(30), 6));
  const SgsPreconditioner p = build_preconditioner(a_s);
  Rng rng(7);
  auto random_vec = [&](std::size_t n) {
    Vector v(n);
    for (double& x : v) x = rng.normal();
    return v;
  };
  double worst_linear = 0.0, worst_sym = 0.0;
  std::size_t positive = 0;
  for (int k = 0; k < 100; ++k) {
    const Vector r1 = random_vec(30), r2 = random_vec(30);
    const Vector p1 = p.apply(r1), p2 = p.apply(r2);
    positive += dot(r1, p1) > 0.0;
    worst_sym = std::max(worst_sym, std::abs(dot(p1, r2) - dot(r1, p2)) / (norm2(p1) * norm2(r2)));
    Vector c(30);
    for (std::size_t i = 0; i < 30; ++i) c[i] = 1.5 * r1[i] - 3.0 * r2[i];
    const Vector pc = p.apply(c);
    Vector d(30);
    for (std::size_t i = 0; i < 30; ++i) d[i] = pc[i] - (1.5 * p1[i] - 3.0 * p2[i]);
    worst_linear = std::max(worst_linear, norm2(d) / norm2(pc));
  }

  // G = BᵀB on 10×10; the direct solve of G e = Bᵀy is the least-squares oracle.
  const DenseMatrix bm = gen_gaussian(15, 10, 8);
  const Vector y = random_vec(15);
  const Vector direct = dense_lsq_oracle(bm, y);
  const Vector r = transpose_matvec(Matrix{bm}, y);
  const SgsPreconditioner p50(assemble_gram(bm), 50);
  const Vector e = p50.apply(r);
  Vector diff(10);
  for (std::size_t i = 0; i < 10; ++i) diff[i] = e[i] - direct[i];
  const double converge = norm2(diff) / norm2(direct);

  return {worst_linear <= 1e-10 && worst_sym <= 1e-10 && positive == 100 && converge <= 1e-8,
          "linearity " + fmt("%.1e", worst_linear) + ", symmetry " + fmt("%.1e", worst_sym) +
              ", positive " + std::to_string(positive) + "/100, t=50 vs direct " +
              fmt("%.1e", converge)};
}

bool bit_equal(const DenseMatrix& x, const DenseMatrix& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() &&
         std::memcmp(x.entries().data(), y.entries().data(),
                     x.entries().size() * sizeof(double)) == 0;
}

std::vector<std::string> masked_lines(const std::string& csv) {
  const auto& cols = table_columns();
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string cell, masked;
    for (std::size_t c = 0; std::getline(cells, cell, ','); ++c)
      masked += (c ? "," : "") + (c < cols.size() && is_timing_column(cols[c]) ? "*" : cell);
    if (!line.empty() && line.back() == ',') masked += ",";
    out.push_back(masked);
  }
  return out;
}

Outcome format_fidelity() {
  DenseMatrix d = gen_gaussian(40, 7, 9);
  d(0, 0) = 1.0 / 3.0;
  d(1, 1) = 5e-324;
  d(2, 2) = -1.7976931348623157e308;
  d(3, 3) = 0.1 + 0.2;
  const SparseMatrix s = gen_sprand(300, 20, 0.1, 30.0, 3);

  bool mm_ok = true;
  for (const Matrix& original : {Matrix{d}, Matrix{s}}) {
    std::stringstream first;
    mm_write(first, original);
    const Matrix back = mm_read(first);
    std::stringstream second;
    mm_write(second, back);
    mm_ok = mm_ok && first.str() == second.str() &&
            bit_equal(to_dense(original), to_dense(back)) && nnz(original) == nnz(back);
  }

  const fs::path dir(RSLS_GOLDEN_DIR);
  std::ifstream cfg_in(dir / "bench_config.json");
  std::ifstream golden_in(dir / "bench_golden.csv");
  if (!cfg_in || !golden_in) return {false, "golden files missing under " + dir.string()};
  std::stringstream golden;
  golden << golden_in.rdbuf();
  const ExperimentConfig cfg = experiment_from_json(nlohmann::json::parse(cfg_in));
  const std::string csv = table_csv(run_experiment(cfg));
  const bool golden_ok = masked_lines(csv) == masked_lines(golden.str());
  return {mm_ok && golden_ok, std::string("Matrix Market round trip ") +
                                  (mm_ok ? "bit-exact" : "MISMATCH") + ", bench CSV " +
                                  (golden_ok ? "matches golden" : "differs from golden")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 gaussian", gaussian},
      {"2 semi-gaussian", semi_gaussian},
      {"3 ill-conditioned separation", ill_conditioned},
      {"4 graph laplacian", graph_laplacian},
      {"5 sample size", sample_size},
      {"6 unbiasedness", unbiasedness},
      {"7 concentration", concentration},
      {"8 oracle equivalence", oracle},
      {"9 preconditioner contract", preconditioner},
      {"10 format fidelity", format_fidelity},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
