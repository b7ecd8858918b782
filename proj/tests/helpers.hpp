// Small helpers shared by the unit tests.
#ifndef RSLS_TEST_HELPERS_HPP
#define RSLS_TEST_HELPERS_HPP

#include <cmath>
#include <cstdint>

#include "rsls/matrix.hpp"
#include "rsls/random.hpp"

namespace rsls::test {

inline DenseMatrix random_dense(std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix a(m, n);
  for (double& v : a.entries()) v = rng.normal();
  return a;
}

inline SparseMatrix random_sparse(std::size_t m, std::size_t n, double density,
                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (rng.uniform() < density) t.push_back({i, j, rng.normal()});
  return SparseMatrix::from_triplets(m, n, std::move(t));
}

inline Vector random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace rsls::test

#endif
