#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "rsls/diagnostics.hpp"
#include "rsls/generators.hpp"
#include "rsls/sampling.hpp"

using namespace rsls;

namespace {

Matrix normalized_gaussian(std::size_t m, std::size_t n, std::uint64_t seed) {
  return normalize_columns(Matrix{gen_gaussian(m, n, seed)}).first;
}

double svd_kappa_squared(const DenseMatrix& a) {
  Eigen::MatrixXd e(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e(i, j) = a(i, j);
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(e).singularValues();
  const double k = s(0) / s(s.size() - 1);
  return k * k;
}

std::size_t count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("spectral summary of the identity") {
  const auto s = spectral_summary(Matrix{DenseMatrix::identity(6)});
  CHECK(s.kappa_normal == 1.0);
  CHECK(s.lambda_max == 1.0);
  CHECK(s.numerical_rank == 6);
  REQUIRE(s.coherence.has_value());
  CHECK(*s.coherence == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(s.approximate);
}

TEST_CASE("coherence bounds and the coherent matrix Z") {
  const auto z = spectral_summary(Matrix{gen_coherent(100, 10)});
  CHECK(*z.coherence == doctest::Approx(1.0));
  CHECK(z.kappa_normal == doctest::Approx(1.0));
  const auto g = spectral_summary(Matrix{gen_gaussian(400, 10, 3)});
  CHECK(*g.coherence >= 10.0 / 400.0 - 1e-12);
  CHECK(*g.coherence <= 1.0);
}

TEST_CASE("κ(AᵀA) matches an SVD oracle") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const DenseMatrix a = gen_udv(300, 40, 10.0 * static_cast<double>(seed), seed);
    const auto s = spectral_summary(Matrix{a});
    CHECK(s.kappa_normal == doctest::Approx(svd_kappa_squared(a)).epsilon(1e-6));
    const DenseMatrix g = rsls::test::random_dense(200, 30, seed);
    CHECK(spectral_summary(Matrix{g}).kappa_normal ==
          doctest::Approx(svd_kappa_squared(g)).epsilon(1e-6));
  }
}

TEST_CASE("coherence is invariant to column scaling") {
  DenseMatrix a = rsls::test::random_dense(300, 12, 8);
  const double mu = *spectral_summary(Matrix{a}).coherence;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) /= 0.1 + static_cast<double>(j * j);
  CHECK(std::abs(*spectral_summary(Matrix{a}).coherence - mu) <= 1e-10);
}

TEST_CASE("effective condition number of a connected Laplacian") {
  // Cycle on 6 vertices: eigenvalues 2 − 2cos(2πk/6) = {0, 1, 1, 3, 3, 4}.
  std::vector<Triplet> t;
  for (std::size_t e = 0; e < 6; ++e) {
    t.push_back({e, e, 1.0});
    t.push_back({e, (e + 1) % 6, -1.0});
  }
  const auto s = spectral_summary(Matrix{SparseMatrix::from_triplets(6, 6, t)});
  CHECK(s.numerical_rank == 5);
  CHECK(s.lambda_min_nonzero == doctest::Approx(1.0));
  CHECK(s.lambda_min_nonzero > s.rank_tolerance);
  CHECK(s.kappa_normal == doctest::Approx(4.0));
  CHECK_FALSE(s.coherence.has_value());
}

TEST_CASE("power iteration path for large n") {
  const std::size_t n = kDenseSpectralLimit + 1;
  std::vector<Triplet> t;
  for (std::size_t j = 0; j < n; ++j) t.push_back({j, j, j == 0 ? 2.0 : 1.0});
  const auto s = spectral_summary(Matrix{SparseMatrix::from_triplets(n, n, t)});
  CHECK(s.approximate);
  CHECK_FALSE(s.coherence.has_value());
  CHECK(s.lambda_max == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("Gaussian 3000 x 109: coherence is small") {
  const auto s = spectral_summary(normalized_gaussian(3000, 109, 1));
  CHECK(*s.coherence == doctest::Approx(0.05).epsilon(0.4));
}

TEST_CASE("concentration with a huge sample") {
  const Matrix a = normalized_gaussian(50, 5, 2);
  const auto r = concentration_test(a, 1000000, 0.05, 3, 1);
  CHECK(r.successes == 3);
  for (double v : r.norms) CHECK(v < 0.05);
}

TEST_CASE("concentration at s = 4 n ln n and 8 n ln n") {
  // An independent NumPy simulation of the same estimator gives a median
  // deviation of 0.53 at s = 783 (13–18% of trials within 0.5) and 0.37 at
  // s = 1565 (all trials within 0.5).
  const Matrix a = normalized_gaussian(2000, 50, 3);
  const std::size_t s = default_sample_size(50);
  CHECK(s == 783);
  const auto r = concentration_test(a, s, 0.5, 100, 10);
  CHECK(r.trials == 100);
  CHECK(r.norms.size() == 100);
  CHECK(r.successes <= r.trials);
  std::vector<double> sorted = r.norms;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted[50] == doctest::Approx(0.53).epsilon(0.1));
  CHECK(r.sandwich_holds == r.successes);

  const auto r2 = concentration_test(a, default_sample_size(50, 8.0), 0.5, 100, 10);
  CHECK(r2.successes >= 95);
  CHECK(r2.sandwich_holds == r2.successes);
}

TEST_CASE("concentration success is monotone in s") {
  const std::size_t n = 50;
  const Matrix a = normalized_gaussian(2000, n, 4);
  const double nn = static_cast<double>(n);
  const std::vector<std::size_t> sizes{n, static_cast<std::size_t>(std::ceil(2 * nn * std::log(nn))),
                                       default_sample_size(n)};
  std::vector<std::size_t> succ;
  for (std::size_t s : sizes) succ.push_back(concentration_test(a, s, 0.5, 100, 7).successes);
  int inversions = 0;
  for (std::size_t k = 1; k < succ.size(); ++k) inversions += succ[k] < succ[k - 1];
  CHECK(inversions <= 1);
  CHECK(succ.back() >= succ.front());
}

TEST_CASE("concentration preconditions") {
  CHECK_THROWS(concentration_test(Matrix{gen_gaussian(50, 5, 1)}, 10, 0.5, 2, 1));
  CHECK_THROWS(concentration_test(normalized_gaussian(600, 501, 1), 10, 0.5, 2, 1));
}

TEST_CASE("high-frequency bounds hold with the measured ε") {
  const Matrix a = normalized_gaussian(2000, 50, 5);
  const auto r = high_frequency_test(a, 783, 4.0, 100, 1);
  CHECK(r.high_frequency_vectors > 0);
  CHECK(r.violations == 0);
  // The bottom eigenvector is estimated less accurately than the top one.
  CHECK(r.bottom_ratio_deviation > r.top_ratio_deviation);
}

TEST_CASE("high-frequency ratio tends to one with huge samples") {
  const Matrix a = normalized_gaussian(60, 6, 6);
  const auto r = high_frequency_test(a, 1000000, 4.0, 2, 3);
  CHECK(r.top_ratio_deviation < 0.01);
}

TEST_CASE("filtered edges and Jaccard") {
  const DenseMatrix g{{1, 0.5, -0.2}, {0.5, 1, 0.05}, {-0.2, 0.05, 1}};
  CHECK(filtered_edges(g, 0.0).size() == 3);
  CHECK(filtered_edges(g, 0.6).empty());
  const auto e = filtered_edges(g, 0.1);
  REQUIRE(e.size() == 2);
  CHECK(e[0] == GramEdge{0, 1, 0.5});
  CHECK(e[1] == GramEdge{0, 2, -0.2});
  CHECK(edge_jaccard(e, e) == 1.0);
  CHECK(edge_jaccard({}, {}) == 1.0);
  CHECK(edge_jaccard(e, {GramEdge{0, 1, 9.0}}) == 0.5);
}

TEST_CASE("filtered Gram export") {
  const Matrix a = normalize_columns(Matrix{gen_gaussian(9000, 100, 7)}).first;
  const auto plan = draw_sample_plan(row_sampling_density(a), default_sample_size(100), 1);
  const auto prefix = std::filesystem::temp_directory_path() / "rsls_gram_test";
  const auto r = filtered_gram_export(a, apply_sample(a, plan), 0.0, prefix);
  CHECK(r.full_edges == 100 * 99 / 2);
  CHECK(count_lines(r.full_path) == r.full_edges);
  CHECK(count_lines(r.sampled_path) == r.sampled_edges);
  std::filesystem::remove(r.full_path);
  std::filesystem::remove(r.sampled_path);
}

TEST_CASE("filtered sampled Gram keeps the strong entries") {
  const Matrix a = normalize_columns(Matrix{gen_sprand(9000, 100, 0.02, 80.0, 3)}).first;
  const auto plan = draw_sample_plan(row_sampling_density(a), default_sample_size(100), 1);
  const auto prefix = std::filesystem::temp_directory_path() / "rsls_gram_strong";
  const auto r = filtered_gram_export(a, apply_sample(a, plan), 0.125, prefix);
  CHECK(r.full_edges > 20);
  CHECK(r.jaccard >= 0.8);
  std::filesystem::remove(r.full_path);
  std::filesystem::remove(r.sampled_path);
}

TEST_CASE("JSON reports") {
  nlohmann::json j = spectral_summary(Matrix{DenseMatrix::identity(3)});
  CHECK(j.at("kappa_normal") == 1.0);
  CHECK(j.at("mu") == doctest::Approx(1.0));
  nlohmann::json c = concentration_test(normalized_gaussian(40, 4, 1), 50, 0.5, 2, 1);
  CHECK(c.at("norms").size() == 2);
}
