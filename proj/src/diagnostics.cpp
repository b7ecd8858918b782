#include "rsls/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "rsls/random.hpp"
#include "rsls/sampling.hpp"

namespace rsls {

namespace {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

Eigen::MatrixXd gram_eigen(const Matrix& a) {
  const auto n = static_cast<Eigen::Index>(cols(a));
  if (const auto* d = std::get_if<DenseMatrix>(&a)) {
    RowMajorMap map(d->entries().data(), static_cast<Eigen::Index>(d->rows()), n);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    g.selfadjointView<Eigen::Lower>().rankUpdate(map.transpose());
    return g.selfadjointView<Eigen::Lower>();
  }
  const auto& s = std::get<SparseMatrix>(a);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t t = 0; t < s.rows(); ++t) {
    auto c = s.row_cols(t);
    auto v = s.row_values(t);
    for (std::size_t p = 0; p < c.size(); ++p)
      for (std::size_t q = 0; q < c.size(); ++q)
        g(static_cast<Eigen::Index>(c[p]), static_cast<Eigen::Index>(c[q])) += v[p] * v[q];
  }
  return g;
}

DenseMatrix from_eigen(const Eigen::MatrixXd& m) {
  DenseMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
  return out;
}

Eigen::MatrixXd to_eigen(const DenseMatrix& d) {
  RowMajorMap map(d.entries().data(), static_cast<Eigen::Index>(d.rows()),
                  static_cast<Eigen::Index>(d.cols()));
  return map;
}

Eigen::VectorXd eigenvalues_of(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolve failed");
  return es.eigenvalues();
}

double spectral_norm_of(const Eigen::MatrixXd& g) {
  const Eigen::VectorXd ev = eigenvalues_of(g);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

// Coherence via AᵀA = LLᵀ: the rows of U = A L⁻ᵀ span range(A) orthonormally,
// and ‖u_i‖² = ‖L⁻¹ a_iᵀ‖².
std::optional<double> coherence_from_gram(const Matrix& a, const Eigen::MatrixXd& g) {
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const auto n = g.rows();
  const std::size_t m = rows(a);
  constexpr std::size_t kChunk = 2048;
  double mu = 0.0;
  Eigen::MatrixXd block;
  for (std::size_t start = 0; start < m; start += kChunk) {
    const std::size_t len = std::min(kChunk, m - start);
    block.setZero(n, static_cast<Eigen::Index>(len));
    if (const auto* d = std::get_if<DenseMatrix>(&a)) {
      for (std::size_t t = 0; t < len; ++t) {
        auto r = d->row(start + t);
        for (Eigen::Index j = 0; j < n; ++j)
          block(j, static_cast<Eigen::Index>(t)) = r[static_cast<std::size_t>(j)];
      }
    } else {
      const auto& s = std::get<SparseMatrix>(a);
      for (std::size_t t = 0; t < len; ++t) {
        auto c = s.row_cols(start + t);
        auto v = s.row_values(start + t);
        for (std::size_t k = 0; k < c.size(); ++k)
          block(static_cast<Eigen::Index>(c[k]), static_cast<Eigen::Index>(t)) = v[k];
      }
    }
    llt.matrixL().solveInPlace(block);
    mu = std::max(mu, block.colwise().squaredNorm().maxCoeff());
  }
  return mu;
}

void require_normalized(const Matrix& a, const char* who) {
  const double f = frobenius_norm(a);
  const double n = static_cast<double>(cols(a));
  if (std::abs(f * f - n) > 1e-8 * n)
    throw std::invalid_argument(std::string(who) +
                                ": matrix must be column-normalized (‖A‖_F² = n)");
}

// Power iteration on a symmetric positive semidefinite operator.
template <typename Op>
double power_iteration(Op&& op, std::size_t n, std::uint64_t seed, std::size_t iters) {
  Rng rng(seed);
  Vector v(n);
  for (double& x : v) x = rng.normal();
  double lambda = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    const double nv = norm2(v);
    for (double& x : v) x /= nv;
    Vector w = op(v);
    lambda = dot(v, w);
    v = std::move(w);
  }
  return lambda;
}

}  // namespace

DenseMatrix dense_gram(const Matrix& a) { return from_eigen(gram_eigen(a)); }

Vector symmetric_eigenvalues(const DenseMatrix& g) {
  if (g.rows() != g.cols()) throw DimensionError("symmetric_eigenvalues: matrix not square");
  const Eigen::VectorXd ev = eigenvalues_of(to_eigen(g));
  return Vector(ev.data(), ev.data() + ev.size());
}

double symmetric_spectral_norm(const DenseMatrix& g) { return spectral_norm_of(to_eigen(g)); }

SpectralSummary spectral_summary(const Matrix& a) {
  const std::size_t n = cols(a);
  if (n == 0) throw DimensionError("spectral_summary: matrix has no columns");
  SpectralSummary out;

  if (n > kDenseSpectralLimit) {
    auto normal_op = [&](const Vector& v) { return transpose_matvec(a, matvec(a, v)); };
    out.approximate = true;
    out.lambda_max = power_iteration(normal_op, n, 1, 300);
    const double shift = out.lambda_max;
    auto shifted = [&](const Vector& v) {
      Vector w = normal_op(v);
      for (std::size_t i = 0; i < n; ++i) w[i] = shift * v[i] - w[i];
      return w;
    };
    out.lambda_min_nonzero = shift - power_iteration(shifted, n, 2, 300);
    out.rank_tolerance = static_cast<double>(n) * out.lambda_max * 1e-12;
    out.numerical_rank = n;
    out.kappa_normal = out.lambda_max / out.lambda_min_nonzero;
    return out;
  }

  const Eigen::MatrixXd g = gram_eigen(a);
  const Eigen::VectorXd ev = eigenvalues_of(g);
  out.lambda_max = ev(ev.size() - 1);
  out.rank_tolerance = static_cast<double>(n) * out.lambda_max * 1e-12;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k) > out.rank_tolerance) {
      if (out.numerical_rank == 0) out.lambda_min_nonzero = ev(k);
      ++out.numerical_rank;
    }
  }
  if (out.numerical_rank == 0) throw std::runtime_error("spectral_summary: matrix is zero");
  out.kappa_normal = out.lambda_max / out.lambda_min_nonzero;
  if (out.numerical_rank == n) out.coherence = coherence_from_gram(a, g);
  return out;
}

ConcentrationReport concentration_test(const Matrix& a, std::size_t s, double epsilon,
                                       std::size_t trials, std::uint64_t seed) {
  if (cols(a) > 500) throw std::invalid_argument("concentration_test: n must be <= 500");
  require_normalized(a, "concentration_test");
  ConcentrationReport out;
  out.trials = trials;
  out.sample_size = s;
  out.epsilon = epsilon;

  const Eigen::MatrixXd g = gram_eigen(a);
  const Eigen::VectorXd ev = eigenvalues_of(g);
  out.lambda_min = ev(0);
  out.lambda_max = ev(ev.size() - 1);

  const SamplingDensity density = row_sampling_density(a);
  for (std::size_t t = 0; t < trials; ++t) {
    const SamplePlan plan = draw_sample_plan(density, s, seed + t);
    const Eigen::MatrixXd gs = gram_eigen(apply_sample(a, plan));
    const double dev = spectral_norm_of(gs - g);
    const Eigen::VectorXd evs = eigenvalues_of(gs);
    const double lo = evs(0);
    const double hi = evs(evs.size() - 1);
    out.norms.push_back(dev);
    out.sampled_lambda_min.push_back(lo);
    out.sampled_lambda_max.push_back(hi);
    if (dev <= epsilon) {
      ++out.successes;
      if (out.lambda_min - epsilon <= lo && hi <= out.lambda_max + epsilon) ++out.sandwich_holds;
    }
  }
  return out;
}

HighFrequencyReport high_frequency_test(const Matrix& a, std::size_t s, double c_h_proxy,
                                        std::size_t trials, std::uint64_t seed) {
  if (cols(a) > 500) throw std::invalid_argument("high_frequency_test: n must be <= 500");
  if (!(c_h_proxy >= 1.0)) throw std::invalid_argument("high_frequency_test: C_h must be >= 1");
  HighFrequencyReport out;
  out.trials = trials;
  out.c_h = c_h_proxy;

  const Eigen::MatrixXd g = gram_eigen(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolve failed");
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const Eigen::MatrixXd& vecs = es.eigenvectors();
  const Eigen::Index n = lambda.size();
  const double lambda_max = lambda(n - 1);

  std::vector<Eigen::Index> high;
  for (Eigen::Index k = 0; k < n; ++k)
    if (lambda_max <= c_h_proxy * lambda(k)) high.push_back(k);
  out.high_frequency_vectors = high.size();

  const SamplingDensity density = row_sampling_density(a);
  double top_dev = 0.0, bottom_dev = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const SamplePlan plan = draw_sample_plan(density, s, seed + t);
    const Eigen::MatrixXd gs = gram_eigen(apply_sample(a, plan));
    const double eps = spectral_norm_of(gs - g);
    for (Eigen::Index k : high) {
      const Eigen::VectorXd x = vecs.col(k);
      const double q = x.dot(g * x);
      const double qs = x.dot(gs * x);
      // Rounding slack on the order of the products themselves.
      const double slack = 1e-12 * (std::abs(q) + std::abs(qs));
      if (qs < (1.0 - c_h_proxy * eps) * q - slack || qs > (1.0 + c_h_proxy * eps) * q + slack)
        ++out.violations;
    }
    const Eigen::VectorXd top = vecs.col(n - 1);
    const Eigen::VectorXd bottom = vecs.col(0);
    top_dev += std::abs(top.dot(gs * top) / top.dot(g * top) - 1.0);
    bottom_dev += std::abs(bottom.dot(gs * bottom) / bottom.dot(g * bottom) - 1.0);
  }
  if (trials > 0) {
    out.top_ratio_deviation = top_dev / static_cast<double>(trials);
    out.bottom_ratio_deviation = bottom_dev / static_cast<double>(trials);
  }
  return out;
}

std::vector<GramEdge> filtered_edges(const DenseMatrix& g, double theta) {
  if (g.rows() != g.cols()) throw DimensionError("filtered_edges: matrix not square");
  std::vector<GramEdge> out;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = i + 1; j < g.cols(); ++j)
      if (std::abs(g(i, j)) >= theta) out.push_back({i, j, g(i, j)});
  return out;
}

double edge_jaccard(const std::vector<GramEdge>& e1, const std::vector<GramEdge>& e2) {
  auto key = [](const GramEdge& e) { return std::make_pair(e.i, e.j); };
  std::vector<std::pair<std::size_t, std::size_t>> a, b;
  for (const auto& e : e1) a.push_back(key(e));
  for (const auto& e : e2) b.push_back(key(e));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::pair<std::size_t, std::size_t>> both, either;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(either));
  if (either.empty()) return 1.0;
  return static_cast<double>(both.size()) / static_cast<double>(either.size());
}

namespace {

void write_edges(const std::filesystem::path& path, const std::vector<GramEdge>& edges) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  char buf[64];
  for (const auto& e : edges) {
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    out << e.i << '\t' << e.j << '\t' << buf << '\n';
  }
  if (!out) throw std::runtime_error("error writing " + path.string());
}

}  // namespace

FilteredGramReport filtered_gram_export(const Matrix& a, const Matrix& a_s, double theta,
                                        const std::filesystem::path& prefix) {
  if (cols(a) != cols(a_s)) throw DimensionError("filtered_gram_export: column mismatch");
  if (cols(a) > kDenseSpectralLimit)
    throw std::invalid_argument("filtered_gram_export: n must be <= 2000");
  const auto full = filtered_edges(dense_gram(a), theta);
  const auto sampled = filtered_edges(dense_gram(a_s), theta);

  FilteredGramReport out;
  out.theta = theta;
  out.full_edges = full.size();
  out.sampled_edges = sampled.size();
  out.jaccard = edge_jaccard(full, sampled);
  out.full_path = prefix.string() + "_full.tsv";
  out.sampled_path = prefix.string() + "_sampled.tsv";
  write_edges(out.full_path, full);
  write_edges(out.sampled_path, sampled);
  return out;
}

void to_json(nlohmann::json& j, const SpectralSummary& s) {
  j = nlohmann::json{{"lambda_max", s.lambda_max},
                     {"lambda_min_nonzero", s.lambda_min_nonzero},
                     {"rank_tolerance", s.rank_tolerance},
                     {"kappa_normal", s.kappa_normal},
                     {"numerical_rank", s.numerical_rank},
                     {"approximate", s.approximate}};
  if (s.coherence)
    j["mu"] = *s.coherence;
  else
    j["mu"] = nullptr;
}

void to_json(nlohmann::json& j, const ConcentrationReport& r) {
  j = nlohmann::json{{"trials", r.trials},
                     {"s", r.sample_size},
                     {"epsilon", r.epsilon},
                     {"successes", r.successes},
                     {"sandwich_holds", r.sandwich_holds},
                     {"lambda_min", r.lambda_min},
                     {"lambda_max", r.lambda_max},
                     {"norms", r.norms},
                     {"sampled_lambda_min", r.sampled_lambda_min},
                     {"sampled_lambda_max", r.sampled_lambda_max}};
}

void to_json(nlohmann::json& j, const HighFrequencyReport& r) {
  j = nlohmann::json{{"trials", r.trials},
                     {"c_h", r.c_h},
                     {"high_frequency_vectors", r.high_frequency_vectors},
                     {"violations", r.violations},
                     {"top_ratio_deviation", r.top_ratio_deviation},
                     {"bottom_ratio_deviation", r.bottom_ratio_deviation}};
}

void to_json(nlohmann::json& j, const FilteredGramReport& r) {
  j = nlohmann::json{{"theta", r.theta},
                     {"full_edges", r.full_edges},
                     {"sampled_edges", r.sampled_edges},
                     {"jaccard", r.jaccard},
                     {"full_path", r.full_path.string()},
                     {"sampled_path", r.sampled_path.string()}};
}

}  // namespace rsls
