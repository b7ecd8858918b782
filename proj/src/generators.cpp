#include "rsls/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "rsls/random.hpp"

namespace rsls {

namespace {

Eigen::MatrixXd gaussian_eigen(std::size_t m, std::size_t n, Rng& rng) {
  Eigen::MatrixXd g(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  // Row-major fill order so the stream matches gen_gaussian's layout.
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
  return g;
}

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& g) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
  // Fix column signs by R's diagonal so Q is Haar distributed.
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace

DenseMatrix gen_gaussian(std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix a(m, n);
  for (double& v : a.entries()) v = rng.normal();
  return a;
}

SparseMatrix gen_semi_gaussian(std::size_t m, std::size_t n, std::uint64_t seed) {
  if (n % 2 != 0) throw std::invalid_argument("gen_semi_gaussian: n must be even");
  if (m <= n) throw std::invalid_argument("gen_semi_gaussian: need m > n");
  const std::size_t half = n / 2;
  const std::size_t top = m - half;
  Rng rng(seed);
  std::vector<std::size_t> offsets(m + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> vals;
  idx.reserve(top * half + half);
  vals.reserve(top * half + half);
  for (std::size_t i = 0; i < top; ++i) {
    for (std::size_t j = 0; j < half; ++j) {
      idx.push_back(j);
      vals.push_back(rng.normal());
    }
    offsets[i + 1] = idx.size();
  }
  for (std::size_t k = 0; k < half; ++k) {
    idx.push_back(half + k);
    vals.push_back(1.0);
    offsets[top + k + 1] = idx.size();
  }
  return SparseMatrix(m, n, std::move(offsets), std::move(idx), std::move(vals));
}

SparseMatrix gen_coherent(std::size_t m, std::size_t n) {
  if (m < n) throw std::invalid_argument("gen_coherent: need m >= n");
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t j = 0; j < n; ++j) t.push_back({j, j, 1.0});
  return SparseMatrix::from_triplets(m, n, std::move(t));
}

// ---------------------------------------------------------------------------
// Sparse random matrix via Givens rotations

namespace {

using SparseRow = std::vector<std::pair<std::size_t, double>>;

// Rotates rows x and y in place: x' = c·x + s·y, y' = −s·x + c·y, over the
// union of their patterns. Returns the change in stored entries.
long rotate_rows(SparseRow& x, SparseRow& y, double c, double s) {
  const long before = static_cast<long>(x.size() + y.size());
  SparseRow nx, ny;
  nx.reserve(x.size() + y.size());
  ny.reserve(x.size() + y.size());
  std::size_t p = 0, q = 0;
  while (p < x.size() || q < y.size()) {
    std::size_t col;
    double xv = 0.0, yv = 0.0;
    if (q == y.size() || (p < x.size() && x[p].first < y[q].first)) {
      col = x[p].first;
      xv = x[p++].second;
    } else if (p == x.size() || y[q].first < x[p].first) {
      col = y[q].first;
      yv = y[q++].second;
    } else {
      col = x[p].first;
      xv = x[p++].second;
      yv = y[q++].second;
    }
    nx.emplace_back(col, c * xv + s * yv);
    ny.emplace_back(col, -s * xv + c * yv);
  }
  x = std::move(nx);
  y = std::move(ny);
  return static_cast<long>(x.size() + y.size()) - before;
}

double* find_entry(SparseRow& row, std::size_t col) {
  auto it = std::lower_bound(row.begin(), row.end(), col,
                             [](const auto& e, std::size_t c) { return e.first < c; });
  return (it != row.end() && it->first == col) ? &it->second : nullptr;
}

}  // namespace

SparseMatrix gen_sprand(std::size_t m, std::size_t n, double density, double cond,
                        std::uint64_t seed) {
  if (!(density > 0.0) || density > 1.0)
    throw std::invalid_argument("gen_sprand: density must be in (0, 1]");
  if (!(cond >= 1.0)) throw std::invalid_argument("gen_sprand: cond must be >= 1");
  if (n == 0 || m < n) throw std::invalid_argument("gen_sprand: need m >= n >= 1");

  Rng rng(seed);
  const auto target =
      static_cast<std::size_t>(std::llround(density * static_cast<double>(m) *
                                            static_cast<double>(n)));

  // Scattered diagonal: σ_j at (perm[j], j).
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  for (std::size_t i = 0; i < n; ++i) std::swap(perm[i], perm[i + rng.below(m - i)]);

  std::vector<SparseRow> rows(m);
  std::vector<std::vector<std::size_t>> col_rows(n);  // rows holding column j
  for (std::size_t j = 0; j < n; ++j) {
    const double sigma =
        n == 1 ? 1.0
               : std::pow(cond, -static_cast<double>(j) / static_cast<double>(n - 1));
    rows[perm[j]].emplace_back(j, sigma);
    col_rows[j].push_back(perm[j]);
  }

  // Row leverages h_i = a_iᵀ(AᵀA)⁻¹a_i. Column rotations leave them
  // unchanged and a row rotation into an empty row splits h_a into c²h_a and
  // s²h_a, so they are tracked exactly while empty rows remain. Row rotations
  // always split the row of largest leverage, and are forced while that
  // leverage exceeds 4n/m; otherwise rows and columns are chosen 50/50.
  std::vector<double> leverage(m, 0.0);
  std::priority_queue<std::pair<double, std::size_t>> by_leverage;
  for (std::size_t j = 0; j < n; ++j) {
    leverage[perm[j]] = 1.0;
    by_leverage.emplace(1.0, perm[j]);
  }
  std::size_t occupied_rows = n;
  const double lev_floor = static_cast<double>(n) / static_cast<double>(m);
  auto max_leverage = [&]() {
    while (by_leverage.top().first != leverage[by_leverage.top().second]) by_leverage.pop();
    return by_leverage.top().first;
  };
  auto pop_max_row = [&]() {
    while (by_leverage.top().first != leverage[by_leverage.top().second]) by_leverage.pop();
    const std::size_t r = by_leverage.top().second;
    by_leverage.pop();
    return r;
  };

  std::size_t stored = n;
  const std::size_t max_rotations = 4 * std::max<std::size_t>(target, 1);
  std::vector<std::size_t> touched;
  for (std::size_t step = 0; step < max_rotations && stored < target; ++step) {
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const bool on_rows = n < 2 || max_leverage() > 4.0 * lev_floor || rng.uniform() < 0.5;
    if (on_rows) {
      const std::size_t a = pop_max_row();
      std::size_t b = a;
      if (occupied_rows < m) {
        while (b == a || !rows[b].empty()) b = rng.below(m);
      } else {
        b = rng.below(m - 1);
        if (b >= a) ++b;
      }
      const double ha = leverage[a];
      const double hb = leverage[b];
      if (rows[b].empty()) {
        ++occupied_rows;
        leverage[a] = c * c * ha;
        leverage[b] = s * s * ha;
      } else {
        // The cross term is unknown here; share the pair's total.
        leverage[a] = leverage[b] = 0.5 * (ha + hb);
      }
      by_leverage.emplace(leverage[a], a);
      by_leverage.emplace(leverage[b], b);
      std::vector<std::size_t> before_a, before_b;
      for (auto& e : rows[a]) before_a.push_back(e.first);
      for (auto& e : rows[b]) before_b.push_back(e.first);
      stored = static_cast<std::size_t>(static_cast<long>(stored) +
                                        rotate_rows(rows[a], rows[b], c, s));
      // New column memberships.
      for (auto& e : rows[a])
        if (!std::binary_search(before_a.begin(), before_a.end(), e.first))
          col_rows[e.first].push_back(a);
      for (auto& e : rows[b])
        if (!std::binary_search(before_b.begin(), before_b.end(), e.first))
          col_rows[e.first].push_back(b);
    } else {
      const std::size_t j = rng.below(n);
      std::size_t l = rng.below(n - 1);
      if (l >= j) ++l;
      touched = col_rows[j];
      touched.insert(touched.end(), col_rows[l].begin(), col_rows[l].end());
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      for (std::size_t i : touched) {
        SparseRow& row = rows[i];
        double* pj = find_entry(row, j);
        double* pl = find_entry(row, l);
        const double xj = pj ? *pj : 0.0;
        const double xl = pl ? *pl : 0.0;
        const double nj = c * xj + s * xl;
        const double nl = -s * xj + c * xl;
        if (pj) *pj = nj;
        if (pl) *pl = nl;
        if (!pj) {
          row.insert(std::lower_bound(row.begin(), row.end(), j,
                                      [](const auto& e, std::size_t cc) { return e.first < cc; }),
                     {j, nj});
          col_rows[j].push_back(i);
          ++stored;
        }
        if (!pl) {
          row.insert(std::lower_bound(row.begin(), row.end(), l,
                                      [](const auto& e, std::size_t cc) { return e.first < cc; }),
                     {l, nl});
          col_rows[l].push_back(i);
          ++stored;
        }
      }
    }
  }

  std::vector<std::size_t> offsets(m + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> vals;
  idx.reserve(stored);
  vals.reserve(stored);
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& [j, v] : rows[i]) {
      idx.push_back(j);
      vals.push_back(v);
    }
    offsets[i + 1] = idx.size();
  }
  return SparseMatrix(m, n, std::move(offsets), std::move(idx), std::move(vals));
}

DenseMatrix gen_udv(std::size_t m, std::size_t n, double cond, std::uint64_t seed) {
  if (m <= n) throw std::invalid_argument("gen_udv: need m > n");
  if (!(cond >= 1.0)) throw std::invalid_argument("gen_udv: cond must be >= 1");
  Rng rng(seed);
  const Eigen::MatrixXd u = thin_q(gaussian_eigen(m, n, rng));
  const Eigen::MatrixXd v = thin_q(gaussian_eigen(n, n, rng));
  Eigen::VectorXd d(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j)
    d(static_cast<Eigen::Index>(j)) =
        n == 1 ? 1.0 : 1.0 + (cond - 1.0) * static_cast<double>(j) / static_cast<double>(n - 1);
  const Eigen::MatrixXd a = u * d.asDiagonal() * v;

  DenseMatrix out(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

// ---------------------------------------------------------------------------
// Power-law graphs

double PowerLawParams::resolved_i0() const {
  if (i0) {
    if (!(*i0 > 0.0)) throw std::invalid_argument("PowerLawParams: i0 must be positive");
    return *i0;
  }
  if (!max_degree) throw std::invalid_argument("PowerLawParams: set i0 or max_degree");
  if (!(*max_degree > 0.0))
    throw std::invalid_argument("PowerLawParams: max_degree must be positive");
  const double v = static_cast<double>(n) *
                   std::pow(d * (beta - 2.0) / (*max_degree * (beta - 1.0)), beta - 1.0);
  if (!(v > 0.0)) throw std::invalid_argument("PowerLawParams: resolved i0 is not positive");
  return v;
}

std::vector<double> powerlaw_weights(const PowerLawParams& p) {
  if (!(p.beta > 2.0)) throw std::invalid_argument("powerlaw: beta must exceed 2");
  if (!(p.d >= 1.0)) throw std::invalid_argument("powerlaw: d must be >= 1");
  if (p.n < 2) throw std::invalid_argument("powerlaw: need at least 2 vertices");
  const double i0 = p.resolved_i0();
  const double exponent = -1.0 / (p.beta - 1.0);
  const double c =
      (p.beta - 2.0) / (p.beta - 1.0) * p.d * std::pow(static_cast<double>(p.n), exponent);
  std::vector<double> w(p.n);
  for (std::size_t k = 0; k < p.n; ++k) w[k] = c * std::pow(i0 + static_cast<double>(k), exponent);
  return w;
}

GraphModel gen_powerlaw_graph(const PowerLawParams& params, std::uint64_t seed) {
  GraphModel g;
  g.params = params;
  g.i0 = params.resolved_i0();
  g.weights = powerlaw_weights(params);
  const std::size_t n = params.n;
  double total = 0.0;
  for (double w : g.weights) total += w;
  const double rho = 1.0 / total;

  Rng rng(seed);
  std::vector<Triplet> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double prob = std::min(g.weights[i] * g.weights[j] * rho, 1.0);
      if (rng.uniform() < prob) {
        edges.push_back({i, j, 1.0});
        edges.push_back({j, i, 1.0});
      }
    }
  }
  g.adjacency = SparseMatrix::from_triplets(n, n, std::move(edges));
  g.incidence = build_incidence_from_square(g.adjacency);
  return g;
}

SparseMatrix build_incidence_from_square(const SparseMatrix& adjacency) {
  const std::size_t n = adjacency.rows();
  if (adjacency.cols() != n)
    throw DimensionError("build_incidence_from_square: adjacency must be square");
  const SparseMatrix at = adjacency.transpose();

  // Symbolic AᵀA: row i reaches j whenever some k has A(k,i) and A(k,j).
  std::vector<std::size_t> mark(n, n);
  std::vector<std::size_t> reach;
  std::vector<Triplet> rows;
  std::size_t edge = 0;
  for (std::size_t i = 0; i < n; ++i) {
    reach.clear();
    for (std::size_t k : at.row_cols(i))
      for (std::size_t j : adjacency.row_cols(k))
        if (j > i && mark[j] != i) {
          mark[j] = i;
          reach.push_back(j);
        }
    std::sort(reach.begin(), reach.end());
    for (std::size_t j : reach) {
      rows.push_back({edge, i, 1.0});
      rows.push_back({edge, j, -1.0});
      ++edge;
    }
  }
  if (edge == 0) throw std::invalid_argument("build_incidence_from_square: graph has no edges");
  return SparseMatrix::from_triplets(edge, n, std::move(rows));
}

SparseMatrix glue_graphs(const SparseMatrix& b1, const SparseMatrix& b2, std::size_t overlap) {
  if (b1.cols() < overlap || b2.cols() < overlap)
    throw std::invalid_argument("glue_graphs: each graph needs at least " +
                                std::to_string(overlap) + " vertices");
  const std::size_t shift = b1.cols() - overlap;
  const std::size_t cols = b1.cols() + b2.cols() - overlap;
  std::vector<std::size_t> offsets(b1.rows() + b2.rows() + 1, 0);
  std::vector<std::size_t> idx(b1.col_indices());
  std::vector<double> vals(b1.values());
  std::copy(b1.row_offsets().begin(), b1.row_offsets().end(), offsets.begin());
  idx.reserve(b1.nnz() + b2.nnz());
  vals.reserve(b1.nnz() + b2.nnz());
  for (std::size_t i = 0; i < b2.rows(); ++i) {
    for (std::size_t j : b2.row_cols(i)) idx.push_back(j + shift);
    auto v = b2.row_values(i);
    vals.insert(vals.end(), v.begin(), v.end());
    offsets[b1.rows() + i + 1] = idx.size();
  }
  return SparseMatrix(b1.rows() + b2.rows(), cols, std::move(offsets), std::move(idx),
                      std::move(vals));
}

SparseMatrix filter_isolated(const SparseMatrix& b) {
  std::vector<std::size_t> count(b.cols(), 0);
  for (std::size_t j : b.col_indices()) ++count[j];
  std::vector<std::size_t> remap(b.cols(), 0);
  std::size_t kept = 0;
  for (std::size_t j = 0; j < b.cols(); ++j)
    if (count[j] > 0) remap[j] = kept++;
  if (kept == b.cols()) return b;
  std::vector<std::size_t> idx(b.col_indices());
  for (std::size_t& j : idx) j = remap[j];
  return SparseMatrix(b.rows(), kept, b.row_offsets(), std::move(idx), b.values());
}

SparseMatrix gen_graph_laplacian_incidence(const GraphLaplacianParams& params,
                                           std::uint64_t seed) {
  PowerLawParams p1{params.n, params.beta1, params.d1, params.i0, std::nullopt};
  PowerLawParams p2{params.n, params.beta2,
                    params.d2.value_or(5.0 * static_cast<double>(params.n)), params.i0,
                    std::nullopt};
  // Independent streams for the two graphs.
  const GraphModel g1 = gen_powerlaw_graph(p1, seed);
  const GraphModel g2 = gen_powerlaw_graph(p2, seed ^ 0x5bd1e995a5a5a5a5ULL);
  return filter_isolated(glue_graphs(g1.incidence, g2.incidence, params.overlap));
}

// ---------------------------------------------------------------------------

ConsistentRhs consistent_rhs(const Matrix& a, std::uint64_t seed, double noise) {
  if (noise < 0.0) throw std::invalid_argument("consistent_rhs: noise must be nonnegative");
  Rng rng(seed);
  ConsistentRhs out;
  out.x_true.resize(cols(a));
  for (double& v : out.x_true) v = rng.normal();
  out.b = matvec(a, out.x_true);
  if (noise > 0.0) {
    Vector e(out.b.size());
    for (double& v : e) v = rng.normal();
    const double scale = noise * norm2(out.b) / norm2(e);
    axpy(scale, e, out.b);
  }
  return out;
}

}  // namespace rsls
