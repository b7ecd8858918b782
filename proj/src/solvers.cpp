#include "rsls/solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>

#include "rsls/sampling.hpp"

namespace rsls {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// AᵀA·v via two products; AᵀA is never formed.
Vector normal_apply(const Matrix& a, std::span<const double> v, Vector& av) {
  av = matvec(a, v);
  return transpose_matvec(a, av);
}

void check_rhs(const Matrix& a, std::span<const double> b) {
  if (b.size() != rows(a))
    throw DimensionError("solver: rhs has " + std::to_string(b.size()) + " entries, matrix has " +
                         std::to_string(rows(a)) + " rows");
  for (double v : b)
    if (!std::isfinite(v)) throw std::invalid_argument("solver: rhs has non-finite entries");
}

// Shared CG/PCG loop. `precondition` == nullptr runs plain CG, which keeps
// the unpreconditioned path free of the extra copy into z.
SolveResult run_cg(const Matrix& a, std::span<const double> b, const Preconditioner* precondition,
                   const SolverConfig& cfg) {
  cfg.validate();
  check_rhs(a, b);
  const std::size_t n = cols(a);
  if (precondition != nullptr && precondition->dim() != n)
    throw DimensionError("pcg_normal: preconditioner dimension " +
                         std::to_string(precondition->dim()) + " != " + std::to_string(n));
  const std::size_t max_iter = cfg.resolved_max_iter(n);

  const auto start = Clock::now();
  SolveResult out;
  out.x.assign(n, 0.0);
  SolveReport& rep = out.report;

  const Vector atb = transpose_matvec(a, b);
  const double atb_norm = norm2(atb);
  if (atb_norm == 0.0) {
    rep.converged = true;
    rep.residual_history = {0.0};
    rep.final_relres = 0.0;
    rep.solve_seconds = seconds_since(start);
    return out;
  }

  Vector r = atb;
  Vector z = precondition != nullptr ? precondition->apply(r) : Vector{};
  const Vector& zr = precondition != nullptr ? z : r;
  Vector p = zr;
  double rz = dot(r, zr);
  Vector ap;
  rep.residual_history.push_back(1.0);

  auto true_relres = [&]() {
    Vector tmp;
    Vector ax = normal_apply(a, out.x, tmp);
    for (std::size_t i = 0; i < n; ++i) ax[i] = atb[i] - ax[i];
    return std::make_pair(norm2(ax) / atb_norm, std::move(ax));
  };

  for (std::size_t k = 1; k <= max_iter; ++k) {
    const Vector q = normal_apply(a, p, ap);
    const double curvature = dot(ap, ap);
    if (!(curvature > 0.0)) throw SolverBreakdown(k, curvature);
    const double alpha = rz / curvature;
    axpy(alpha, p, out.x);
    axpy(-alpha, q, r);
    const double relres = norm2(r) / atb_norm;
    rep.residual_history.push_back(relres);
    rep.iterations = k;

    if (relres <= cfg.tol) {
      auto [actual, fresh] = true_relres();
      if (actual <= cfg.tol) {
        rep.converged = true;
        break;
      }
      // The recurrence drifted from the true residual: replace it and restart
      // the search direction from the fresh residual.
      r = std::move(fresh);
      if (precondition != nullptr) precondition->apply(r, z);
      p = zr;
      rz = dot(r, zr);
      continue;
    }

    if (precondition != nullptr) precondition->apply(r, z);
    const double rz_next = dot(r, zr);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = zr[i] + beta * p[i];
  }

  rep.final_relres = true_relres().first;
  rep.solve_seconds = seconds_since(start);
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("SolverConfig: tol must be in (0,1)");
  if (max_iter && *max_iter < 1)
    throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
  if (sgs_sweeps < 1) throw std::invalid_argument("SolverConfig: sgs_sweeps must be >= 1");
  if (!(sample_factor > 0.0))
    throw std::invalid_argument("SolverConfig: sample_factor must be positive");
}

SolveResult cg_normal(const Matrix& a, std::span<const double> b, const SolverConfig& cfg) {
  return run_cg(a, b, nullptr, cfg);
}

SolveResult pcg_normal(const Matrix& a, std::span<const double> b, const Preconditioner& p,
                       const SolverConfig& cfg) {
  return run_cg(a, b, &p, cfg);
}

namespace {

std::uint64_t redraw_seed(std::uint64_t seed, std::size_t attempt) {
  return seed + 0x9e3779b97f4a7c15ULL * attempt;
}

void unscale(Vector& x, const Vector& d) {
  for (std::size_t j = 0; j < x.size(); ++j) x[j] /= d[j];
}

}  // namespace

SolveResult lsq_solve_rs(const Matrix& a, std::span<const double> b, const SolverConfig& cfg) {
  cfg.validate();
  check_rhs(a, b);
  const auto start = Clock::now();

  auto [normalized, d] = normalize_columns(a);
  const SamplingDensity density = row_sampling_density(normalized);
  const std::size_t s = default_sample_size(cols(a), cfg.sample_factor);

  std::optional<SgsPreconditioner> precond;
  std::size_t redraws = 0;
  for (std::size_t attempt = 0; attempt <= cfg.retries_on_degenerate_sample; ++attempt) {
    const SamplePlan plan = draw_sample_plan(density, s, redraw_seed(cfg.seed, attempt));
    try {
      precond.emplace(build_preconditioner(apply_sample(normalized, plan), cfg.sgs_sweeps));
      break;
    } catch (const DegenerateGramError&) {
      ++redraws;
      if (attempt == cfg.retries_on_degenerate_sample) throw;
    }
  }
  const double setup = seconds_since(start);

  SolveResult out = pcg_normal(normalized, b, *precond, cfg);
  unscale(out.x, d);
  out.report.setup_seconds = setup;
  out.report.sample_size = s;
  out.report.sample_redraws = redraws;
  return out;
}

SolveResult lsq_solve_cg(const Matrix& a, std::span<const double> b, const SolverConfig& cfg) {
  cfg.validate();
  check_rhs(a, b);
  const auto start = Clock::now();
  auto [normalized, d] = normalize_columns(a);
  const double setup = seconds_since(start);
  SolveResult out = cg_normal(normalized, b, cfg);
  unscale(out.x, d);
  out.report.setup_seconds = setup;
  return out;
}

Vector dense_lsq_oracle(const DenseMatrix& a, std::span<const double> b) {
  const std::size_t n = a.cols();
  if (b.size() != a.rows()) throw DimensionError("dense_lsq_oracle: rhs length mismatch");
  if (n > 2000) throw std::invalid_argument("dense_lsq_oracle: n must be <= 2000");

  // Lower triangle of AᵀA, accumulated row by row.
  DenseMatrix g(n, n);
  for (std::size_t t = 0; t < a.rows(); ++t) {
    auto r = a.row(t);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) g(i, j) += r[i] * r[j];
  }
  Vector x = transpose_matvec(a, b);

  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, g(i, i));
  const double guard = 1e-12 * max_diag;

  // In-place Cholesky G = LLᵀ.
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = g(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= g(j, k) * g(j, k);
    if (!(pivot > guard))
      throw std::runtime_error("dense_lsq_oracle: rank deficient (pivot " + std::to_string(j) +
                               ")");
    const double ljj = std::sqrt(pivot);
    g(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = g(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= g(i, k) * g(j, k);
      g(i, j) = v / ljj;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i];
    for (std::size_t k = 0; k < i; ++k) v -= g(i, k) * x[k];
    x[i] = v / g(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double v = x[i];
    for (std::size_t k = i + 1; k < n; ++k) v -= g(k, i) * x[k];
    x[i] = v / g(i, i);
  }
  return x;
}

double normal_relative_residual(const Matrix& a, std::span<const double> b,
                                std::span<const double> x) {
  const Vector atb = transpose_matvec(a, b);
  const double denom = norm2(atb);
  Vector ax = matvec(a, x);
  for (std::size_t i = 0; i < ax.size(); ++i) ax[i] -= b[i];
  const Vector g = transpose_matvec(a, ax);
  if (denom == 0.0) return norm2(g) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return norm2(g) / denom;
}

void to_json(nlohmann::json& j, const SolverConfig& cfg) {
  j = nlohmann::json{{"tol", cfg.tol},
                     {"sgs_sweeps", cfg.sgs_sweeps},
                     {"sample_factor", cfg.sample_factor},
                     {"seed", cfg.seed},
                     {"retries_on_degenerate_sample", cfg.retries_on_degenerate_sample}};
  if (cfg.max_iter)
    j["max_iter"] = *cfg.max_iter;
  else
    j["max_iter"] = nullptr;
}

void to_json(nlohmann::json& j, const SolveReport& r) {
  j = nlohmann::json{{"iterations", r.iterations},
                     {"converged", r.converged},
                     {"final_relres", r.final_relres},
                     {"residual_history", r.residual_history},
                     {"setup_seconds", r.setup_seconds},
                     {"solve_seconds", r.solve_seconds},
                     {"sample_size", r.sample_size},
                     {"sample_redraws", r.sample_redraws}};
}

std::string solve_report_csv_header() {
  return "iterations,converged,final_relres,setup_seconds,solve_seconds,sample_size";
}

std::string solve_report_csv_row(const SolveReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu,%d,%.3e,%.3e,%.3e,%zu", r.iterations, r.converged ? 1 : 0,
                r.final_relres, r.setup_seconds, r.solve_seconds, r.sample_size);
  return buf;
}

}  // namespace rsls
