// Command-line harness: generate matrices, run CG vs PCG-RS solves and
// benchmark sweeps, and run diagnostics.
//
// Exit codes: 0 success / converged, 2 solve did not converge, 1 error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsls/diagnostics.hpp"
#include "rsls/experiment.hpp"
#include "rsls/generators.hpp"
#include "rsls/matrix_market.hpp"
#include "rsls/sampling.hpp"
#include "rsls/solvers.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Global {
  std::uint64_t seed = 1;
  double tol = 1e-7;
  double sample_factor = 4.0;
  std::size_t sgs_sweeps = rsls::kDefaultSgsSweeps;
  std::optional<std::size_t> max_iter;
  std::string out = ".";
};

rsls::SolverConfig solver_config(const Global& g) {
  rsls::SolverConfig cfg;
  cfg.seed = g.seed;
  cfg.tol = g.tol;
  cfg.sample_factor = g.sample_factor;
  cfg.sgs_sweeps = g.sgs_sweeps;
  cfg.max_iter = g.max_iter;
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("error writing " + path.string());
}

// ---- gen ------------------------------------------------------------------

struct GenArgs {
  std::string family;
  std::string name;
  rsls::FamilyParams p;
  double d2 = 0.0;
};

int cmd_gen(const Global& g, GenArgs& args, bool d2_set) {
  args.p.family = rsls::parse_family(args.family);
  if (d2_set) args.p.d2 = args.d2;
  const rsls::Matrix a = rsls::generate(args.p, g.seed);
  const std::string name = args.name.empty() ? args.family : args.name;
  const fs::path dir(g.out);
  fs::create_directories(dir);
  const fs::path mtx = dir / (name + ".mtx");
  rsls::mm_write(mtx, a);

  const rsls::SolverConfig cfg = solver_config(g);
  const std::size_t n = rsls::cols(a);
  json manifest{{"file", mtx.filename().string()},
                {"seed", g.seed},
                {"params", rsls::describe(args.p)},
                {"rows", rsls::rows(a)},
                {"cols", n},
                {"nnz", rsls::nnz(a)},
                {"storage", std::holds_alternative<rsls::DenseMatrix>(a) ? "dense" : "sparse"},
                {"solver", cfg}};
  manifest["solver"]["max_iter"] = cfg.resolved_max_iter(n);
  manifest["sample_size"] = n >= 2 ? rsls::default_sample_size(n, cfg.sample_factor) : 0;
  const fs::path man = dir / (name + ".json");
  write_text(man, manifest.dump(2) + "\n");
  std::cout << manifest.dump(2) << "\n";
  return 0;
}

// ---- solve ----------------------------------------------------------------

struct SolveArgs {
  std::string matrix;
  std::string method = "pcg-rs";
  std::string rhs = "consistent";
  double noise = 0.0;
  bool history = false;
};

rsls::Vector load_vector(const fs::path& path, std::size_t expected) {
  const rsls::DenseMatrix v = rsls::to_dense(rsls::mm_read(path));
  if (v.cols() != 1 || v.rows() != expected)
    throw rsls::DimensionError("rhs file must be a " + std::to_string(expected) + "×1 matrix");
  return {v.entries().begin(), v.entries().end()};
}

int cmd_solve(const Global& g, const SolveArgs& args) {
  const rsls::Matrix a = rsls::mm_read(fs::path(args.matrix));
  const rsls::SolverConfig cfg = solver_config(g);

  rsls::Vector b;
  std::optional<rsls::Vector> x_true;
  if (args.rhs == "consistent") {
    auto rhs = rsls::consistent_rhs(a, g.seed, args.noise);
    b = std::move(rhs.b);
    x_true = std::move(rhs.x_true);
  } else if (args.rhs == "ones") {
    b.assign(rsls::rows(a), 1.0);
  } else {
    b = load_vector(args.rhs, rsls::rows(a));
  }

  rsls::SolveResult res;
  if (args.method == "cg")
    res = rsls::lsq_solve_cg(a, b, cfg);
  else if (args.method == "pcg-rs")
    res = rsls::lsq_solve_rs(a, b, cfg);
  else
    throw std::invalid_argument("unknown method '" + args.method + "'");

  json report = res.report;
  if (!args.history) report.erase("residual_history");
  json out{{"matrix", args.matrix},
           {"method", args.method},
           {"rows", rsls::rows(a)},
           {"cols", rsls::cols(a)},
           {"solver", cfg},
           {"report", report}};
  out["solver"]["max_iter"] = cfg.resolved_max_iter(rsls::cols(a));
  if (x_true) {
    const rsls::Vector ax = rsls::matvec(a, res.x);
    const rsls::Vector at = rsls::matvec(a, *x_true);
    double num = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) num += (ax[i] - at[i]) * (ax[i] - at[i]);
    const double den = rsls::norm2(at);
    out["fit_error"] = den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
  }
  const std::string text = out.dump(2) + "\n";
  std::cout << text;
  if (g.out != ".") write_text(fs::path(g.out) / "solve_report.json", text);
  return res.report.converged ? 0 : 2;
}

// ---- bench ----------------------------------------------------------------

int cmd_bench(const Global& g, const std::string& config_path, const CLI::App& app) {
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open " + config_path);
  json j = json::parse(in);
  // Explicit global flags override the config file.
  if (app.count("--seed")) j["seed"] = g.seed;
  auto& s = j["solver"];
  if (s.is_null()) s = json::object();
  if (app.count("--tol")) s["tol"] = g.tol;
  if (app.count("--sample-factor")) s["sample_factor"] = g.sample_factor;
  if (app.count("--sgs-sweeps")) s["sgs_sweeps"] = g.sgs_sweeps;
  if (g.max_iter) s["max_iter"] = *g.max_iter;

  const rsls::ExperimentConfig cfg = rsls::experiment_from_json(j);
  const auto rows = rsls::run_experiment(cfg);
  const std::string csv = rsls::table_csv(rows);
  const fs::path dir(g.out);
  write_text(dir / (cfg.name + ".csv"), csv);
  write_text(dir / (cfg.name + ".md"), rsls::table_markdown(rows, cfg.name));
  std::cout << csv;
  return 0;
}

// ---- diag -----------------------------------------------------------------

struct DiagArgs {
  std::string matrix;
  std::string test = "spectral";
  double epsilon = 0.5;
  std::size_t trials = 100;
  std::size_t s = 0;
  double c_h = 4.0;
  double theta = 0.125;
  std::string prefix = "gram";
};

int cmd_diag(const Global& g, const DiagArgs& args) {
  const rsls::Matrix raw = rsls::mm_read(fs::path(args.matrix));
  json out{{"matrix", args.matrix}, {"test", args.test}, {"seed", g.seed}};
  if (args.test == "spectral") {
    out["result"] = rsls::spectral_summary(raw);
  } else {
    const rsls::Matrix a = rsls::normalize_columns(raw).first;
    const std::size_t n = rsls::cols(a);
    const std::size_t s = args.s ? args.s : rsls::default_sample_size(n, g.sample_factor);
    out["s"] = s;
    if (args.test == "concentration") {
      out["result"] = rsls::concentration_test(a, s, args.epsilon, args.trials, g.seed);
    } else if (args.test == "high-frequency") {
      out["result"] = rsls::high_frequency_test(a, s, args.c_h, args.trials, g.seed);
    } else if (args.test == "filtered-gram") {
      const auto plan = rsls::draw_sample_plan(rsls::row_sampling_density(a), s, g.seed);
      fs::create_directories(g.out);
      out["result"] = rsls::filtered_gram_export(a, rsls::apply_sample(a, plan), args.theta,
                                                 fs::path(g.out) / args.prefix);
    } else {
      throw std::invalid_argument("unknown test '" + args.test + "'");
    }
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Row-sampling preconditioned least-squares solver"};
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--tol", g.tol, "relative normal-equation residual tolerance")
      ->capture_default_str();
  app.add_option("--sample-factor", g.sample_factor, "s = ceil(factor * n * ln n)")
      ->capture_default_str();
  app.add_option("--sgs-sweeps", g.sgs_sweeps, "forward/backward Gauss-Seidel sweeps")
      ->capture_default_str();
  app.add_option("--max-iter", g.max_iter, "iteration cap (default 5n)");
  app.add_option("--out", g.out, "output directory")->capture_default_str();

  auto* gen = app.add_subcommand("gen", "generate a test matrix and a JSON manifest");
  GenArgs gen_args;
  gen->add_option("--family", gen_args.family,
                  "gaussian|semi_gaussian|sprand|udv|graph_laplacian|coherent")
      ->required();
  gen->add_option("--name", gen_args.name, "output file stem (default: family)");
  gen->add_option("--m", gen_args.p.m, "rows");
  gen->add_option("--n", gen_args.p.n, "columns (per-graph vertices for graph_laplacian)");
  gen->add_option("--density", gen_args.p.density, "sprand nonzero density");
  gen->add_option("--cond", gen_args.p.cond, "target condition number of A");
  gen->add_option("--beta1", gen_args.p.beta1, "power-law exponent, graph 1")
      ->capture_default_str();
  gen->add_option("--d1", gen_args.p.d1, "average degree, graph 1")->capture_default_str();
  gen->add_option("--beta2", gen_args.p.beta2, "power-law exponent, graph 2")
      ->capture_default_str();
  auto* d2_opt = gen->add_option("--d2", gen_args.d2, "average degree, graph 2 (default 5n)");
  gen->add_option("--i0", gen_args.p.i0, "first weight index")->capture_default_str();

  auto* solve = app.add_subcommand("solve", "solve min ‖Ax − b‖ and print a JSON report");
  SolveArgs solve_args;
  solve->add_option("matrix", solve_args.matrix, "Matrix Market file")->required();
  solve->add_option("--method", solve_args.method, "cg|pcg-rs")->capture_default_str();
  solve->add_option("--rhs", solve_args.rhs, "consistent|ones|<path.mtx>")
      ->capture_default_str();
  solve->add_option("--noise", solve_args.noise, "relative noise for consistent rhs");
  solve->add_flag("--history", solve_args.history, "include the residual history");

  auto* bench = app.add_subcommand("bench", "run a CG vs PCG-RS sweep from a JSON config");
  std::string bench_config;
  bench->add_option("config", bench_config, "experiment JSON")->required();

  auto* diag = app.add_subcommand("diag", "spectral and sampling diagnostics");
  DiagArgs diag_args;
  diag->add_option("matrix", diag_args.matrix, "Matrix Market file")->required();
  diag->add_option("--test", diag_args.test,
                   "spectral|concentration|high-frequency|filtered-gram")
      ->capture_default_str();
  diag->add_option("--epsilon", diag_args.epsilon)->capture_default_str();
  diag->add_option("--trials", diag_args.trials)->capture_default_str();
  diag->add_option("--s", diag_args.s, "sample size (default from --sample-factor)");
  diag->add_option("--c-h", diag_args.c_h, "high-frequency constant proxy")
      ->capture_default_str();
  diag->add_option("--theta", diag_args.theta, "edge threshold")->capture_default_str();
  diag->add_option("--prefix", diag_args.prefix, "edge-list file stem")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*gen) return cmd_gen(g, gen_args, d2_opt->count() > 0);
    if (*solve) return cmd_solve(g, solve_args);
    if (*bench) return cmd_bench(g, bench_config, app);
    if (*diag) return cmd_diag(g, diag_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
