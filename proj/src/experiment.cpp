#include "rsls/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "rsls/diagnostics.hpp"
#include "rsls/generators.hpp"

namespace rsls {

namespace {

constexpr std::pair<Family, std::string_view> kFamilies[] = {
    {Family::gaussian, "gaussian"},   {Family::semi_gaussian, "semi_gaussian"},
    {Family::sprand, "sprand"},       {Family::udv, "udv"},
    {Family::graph_laplacian, "graph_laplacian"}, {Family::coherent, "coherent"},
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string opt(const char* spec, const std::optional<double>& v) {
  return v ? fmt(spec, *v) : std::string();
}

}  // namespace

std::string_view family_name(Family f) {
  for (const auto& [fam, name] : kFamilies)
    if (fam == f) return name;
  throw std::invalid_argument("unknown family");
}

Family parse_family(std::string_view name) {
  for (const auto& [fam, n] : kFamilies)
    if (n == name) return fam;
  throw std::invalid_argument("unknown family '" + std::string(name) + "'");
}

void FamilyParams::validate() const {
  auto fail = [this](const std::string& msg) {
    throw std::invalid_argument(std::string(family_name(family)) + ": " + msg);
  };
  if (family == Family::graph_laplacian) {
    if (n < 5) fail("n must be >= 5");
    if (!(beta1 > 2.0 && beta2 > 2.0)) fail("beta must exceed 2");
    if (!(d1 >= 1.0) || (d2 && !(*d2 >= 1.0))) fail("d must be >= 1");
    if (!(i0 > 0.0)) fail("i0 must be positive");
    return;
  }
  if (n < 2) fail("n must be >= 2");
  if (m <= n) fail("m must exceed n");
  if (family == Family::semi_gaussian && n % 2 != 0) fail("n must be even");
  if (family == Family::sprand && !(density > 0.0 && density <= 1.0))
    fail("density must be in (0, 1]");
  if ((family == Family::sprand || family == Family::udv) && !(cond >= 1.0))
    fail("cond must be >= 1");
}

Matrix generate(const FamilyParams& p, std::uint64_t seed) {
  p.validate();
  switch (p.family) {
    case Family::gaussian:
      return gen_gaussian(p.m, p.n, seed);
    case Family::semi_gaussian:
      return gen_semi_gaussian(p.m, p.n, seed);
    case Family::sprand:
      return gen_sprand(p.m, p.n, p.density, p.cond, seed);
    case Family::udv:
      return gen_udv(p.m, p.n, p.cond, seed);
    case Family::coherent:
      return gen_coherent(p.m, p.n);
    case Family::graph_laplacian: {
      GraphLaplacianParams g;
      g.n = p.n;
      g.beta1 = p.beta1;
      g.d1 = p.d1;
      g.beta2 = p.beta2;
      g.d2 = p.d2;
      g.i0 = p.i0;
      return gen_graph_laplacian_incidence(g, seed);
    }
  }
  throw std::invalid_argument("unknown family");
}

nlohmann::json describe(const FamilyParams& p) {
  nlohmann::json j{{"family", family_name(p.family)}, {"n", p.n}};
  switch (p.family) {
    case Family::sprand:
      j["density"] = p.density;
      [[fallthrough]];
    case Family::udv:
      j["cond"] = p.cond;
      [[fallthrough]];
    case Family::gaussian:
    case Family::semi_gaussian:
    case Family::coherent:
      j["m"] = p.m;
      break;
    case Family::graph_laplacian:
      j["beta1"] = p.beta1;
      j["d1"] = p.d1;
      j["beta2"] = p.beta2;
      j["d2"] = p.d2.value_or(5.0 * static_cast<double>(p.n));
      j["i0"] = p.i0;
      j["overlap"] = 5;
      break;
  }
  return j;
}

void ExperimentConfig::validate() const {
  if (rows.empty()) throw std::invalid_argument("experiment: no rows");
  if (repeats < 1) throw std::invalid_argument("experiment: repeats must be >= 1");
  if (!(noise >= 0.0)) throw std::invalid_argument("experiment: noise must be >= 0");
  for (const auto& r : rows) r.validate();
  solver.validate();
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.name = j.value("name", cfg.name);
  cfg.repeats = j.value("repeats", cfg.repeats);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.noise = j.value("noise", cfg.noise);
  cfg.spectral = j.value("spectral", cfg.spectral);
  const std::optional<std::string> family =
      j.contains("family") ? std::optional(j.at("family").get<std::string>()) : std::nullopt;

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    cfg.solver.tol = s.value("tol", cfg.solver.tol);
    if (s.contains("max_iter") && !s.at("max_iter").is_null())
      cfg.solver.max_iter = s.at("max_iter").get<std::size_t>();
    cfg.solver.sgs_sweeps = s.value("sgs_sweeps", cfg.solver.sgs_sweeps);
    cfg.solver.sample_factor = s.value("sample_factor", cfg.solver.sample_factor);
    cfg.solver.retries_on_degenerate_sample =
        s.value("retries_on_degenerate_sample", cfg.solver.retries_on_degenerate_sample);
  }

  for (const auto& r : j.at("rows")) {
    FamilyParams p;
    if (r.contains("family"))
      p.family = parse_family(r.at("family").get<std::string>());
    else if (family)
      p.family = parse_family(*family);
    else
      throw std::invalid_argument("experiment: row without a family");
    p.m = r.value("m", p.m);
    p.n = r.value("n", p.n);
    p.density = r.value("density", p.density);
    p.cond = r.value("cond", p.cond);
    p.beta1 = r.value("beta1", p.beta1);
    p.d1 = r.value("d1", p.d1);
    p.beta2 = r.value("beta2", p.beta2);
    if (r.contains("d2")) p.d2 = r.at("d2").get<double>();
    p.i0 = r.value("i0", p.i0);
    cfg.rows.push_back(p);
  }
  cfg.validate();
  return cfg;
}

std::pair<double, std::optional<double>> mean_std(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean_std: empty sample");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() == 1) return {mean, std::nullopt};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::vector<TableRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<TableRow> out;
  for (std::size_t r = 0; r < cfg.rows.size(); ++r) {
    const std::uint64_t seed = cfg.seed + r;
    const Matrix a = generate(cfg.rows[r], seed);
    const ConsistentRhs rhs = consistent_rhs(a, seed ^ 0x2545f4914f6cdd1dULL, cfg.noise);

    TableRow row;
    row.m = rows(a);
    row.n = cols(a);
    row.nnz = nnz(a);
    if (cfg.spectral && row.n <= kDenseSpectralLimit) {
      const SpectralSummary s = spectral_summary(normalize_columns(a).first);
      row.kappa_normal = s.kappa_normal;
      row.mu = s.coherence;
    }

    const SolveResult cg = lsq_solve_cg(a, rhs.b, cfg.solver);
    row.residual_cg = cg.report.final_relres;
    row.iter_cg = cg.report.iterations;
    row.time_cg = cg.report.solve_seconds;
    row.setup_cg = cg.report.setup_seconds;
    row.converged_cg = cg.report.converged;

    std::vector<double> iters, times, setups;
    for (std::size_t t = 0; t < cfg.repeats; ++t) {
      SolverConfig sc = cfg.solver;
      sc.seed = cfg.seed + t;
      const SolveResult rs = lsq_solve_rs(a, rhs.b, sc);
      if (t == 0) {
        row.residual_rs = rs.report.final_relres;
        row.iter_rs = rs.report.iterations;
        row.time_rs = rs.report.solve_seconds;
        row.setup_rs = rs.report.setup_seconds;
        row.converged_rs = rs.report.converged;
      }
      iters.push_back(static_cast<double>(rs.report.iterations));
      times.push_back(rs.report.solve_seconds);
      setups.push_back(rs.report.setup_seconds);
    }
    std::tie(row.iter_mean, row.iter_std) = mean_std(iters);
    std::tie(row.time_mean, row.time_std) = mean_std(times);
    std::tie(row.setup_mean, row.setup_std) = mean_std(setups);
    out.push_back(row);
  }
  return out;
}

const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> cols{
      "n",         "m",         "nnz",      "kappa_normal", "mu",        "residual_cg", "iter_cg",
      "residual_rs", "iter_rs", "time_cg",  "setup_cg",     "time_rs",   "setup_rs",    "iter_mean",
      "iter_std",  "time_mean", "time_std", "setup_mean",   "setup_std"};
  return cols;
}

bool is_timing_column(std::string_view name) {
  return name.starts_with("time_") || name.starts_with("setup_");
}

std::string table_csv(const std::vector<TableRow>& rows) {
  std::ostringstream out;
  const auto& cols = table_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (const auto& r : rows) {
    out << r.n << ',' << r.m << ',' << r.nnz << ',' << opt("%.6g", r.kappa_normal) << ','
        << opt("%.6g", r.mu) << ',' << fmt("%.6e", r.residual_cg) << ',' << r.iter_cg << ','
        << fmt("%.6e", r.residual_rs) << ',' << r.iter_rs << ',' << fmt("%.6e", r.time_cg) << ','
        << fmt("%.6e", r.setup_cg) << ',' << fmt("%.6e", r.time_rs) << ','
        << fmt("%.6e", r.setup_rs) << ',' << fmt("%.6g", r.iter_mean) << ','
        << opt("%.6g", r.iter_std) << ',' << fmt("%.6e", r.time_mean) << ','
        << opt("%.6e", r.time_std) << ',' << fmt("%.6e", r.setup_mean) << ','
        << opt("%.6e", r.setup_std) << '\n';
  }
  return out.str();
}

std::string table_markdown(const std::vector<TableRow>& rows, std::string_view title) {
  std::ostringstream out;
  out << "### " << title << ": Residual and Iteration Steps\n\n"
      << "| n | m | nnz(A) | κ(AᵀA) | μ(A) | Residual.CG | Iter.CG | Residual.RS | Iter.RS |\n"
      << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows)
    out << "| " << r.n << " | " << r.m << " | " << r.nnz << " | "
        << (r.kappa_normal ? fmt("%.3g", *r.kappa_normal) : "n/a") << " | "
        << (r.mu ? fmt("%.3g", *r.mu) : "n/a") << " | " << fmt("%.2e", r.residual_cg) << " | "
        << r.iter_cg << " | " << fmt("%.2e", r.residual_rs) << " | " << r.iter_rs << " |\n";

  out << "\n### " << title << ": CPU Time\n\n"
      << "| n | m | Time.CG | Setup.CG | Sum.CG | Time.RS | Setup.RS | Sum.RS |\n"
      << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows)
    out << "| " << r.n << " | " << r.m << " | " << fmt("%.2e", r.time_cg) << " | "
        << fmt("%.2e", r.setup_cg) << " | " << fmt("%.2e", r.time_cg + r.setup_cg) << " | "
        << fmt("%.2e", r.time_rs) << " | " << fmt("%.2e", r.setup_rs) << " | "
        << fmt("%.2e", r.time_rs + r.setup_rs) << " |\n";

  out << "\n### " << title << ": Mean and Sample Standard Deviation\n\n"
      << "| n | m | Iter.mean | Iter.std | Time.mean | Time.std | Setup.mean | Setup.std |\n"
      << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows)
    out << "| " << r.n << " | " << r.m << " | " << fmt("%.3g", r.iter_mean) << " | "
        << opt("%.3g", r.iter_std) << " | " << fmt("%.2e", r.time_mean) << " | "
        << opt("%.2e", r.time_std) << " | " << fmt("%.2e", r.setup_mean) << " | "
        << opt("%.2e", r.setup_std) << " |\n";
  return out.str();
}

}  // namespace rsls
