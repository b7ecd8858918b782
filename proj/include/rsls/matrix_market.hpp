/// @file matrix_market.hpp
/// @brief Matrix Market (.mtx) reader/writer for the `real general` subset:
/// `coordinate` for sparse matrices and `array` for dense ones.

#ifndef RSLS_MATRIX_MARKET_HPP
#define RSLS_MATRIX_MARKET_HPP

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "rsls/matrix.hpp"

namespace rsls {

/// Parse failure; `line()` is the 1-based line number in the input.
class MatrixMarketError : public std::runtime_error {
 public:
  MatrixMarketError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Coordinate files come back as SparseMatrix, array files as DenseMatrix.
/// Duplicate coordinates and out-of-range indices are rejected.
Matrix mm_read(std::istream& in);
Matrix mm_read(const std::filesystem::path& path);

/// Values are written with 17 significant digits so a read returns the
/// exact doubles that were written.
void mm_write(std::ostream& out, const Matrix& a);
void mm_write(const std::filesystem::path& path, const Matrix& a);

}  // namespace rsls

#endif  // RSLS_MATRIX_MARKET_HPP
