#include "rsls/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace rsls {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

// Reads the next non-comment, non-blank line. Returns false at EOF.
bool next_data_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '%' || blank(line)) continue;
    return true;
  }
  return false;
}

std::size_t parse_index(std::istringstream& ss, std::size_t lineno, const char* what) {
  long long v = 0;
  if (!(ss >> v)) throw MatrixMarketError(lineno, std::string("expected ") + what);
  if (v < 0) throw MatrixMarketError(lineno, std::string("negative ") + what);
  return static_cast<std::size_t>(v);
}

double parse_value(std::istringstream& ss, std::size_t lineno) {
  std::string tok;
  if (!(ss >> tok)) throw MatrixMarketError(lineno, "expected a value");
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw MatrixMarketError(lineno, "malformed value '" + tok + "'");
  if (!std::isfinite(v)) throw MatrixMarketError(lineno, "non-finite value");
  return v;
}

void expect_end(std::istringstream& ss, std::size_t lineno) {
  std::string extra;
  if (ss >> extra) throw MatrixMarketError(lineno, "trailing data '" + extra + "'");
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Matrix mm_read(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw MatrixMarketError(1, "empty input");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") throw MatrixMarketError(lineno, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw MatrixMarketError(lineno, "unsupported object '" + object + "'");
  if (format != "coordinate" && format != "array")
    throw MatrixMarketError(lineno, "unsupported format '" + format + "'");
  if (field != "real" && field != "double" && field != "integer")
    throw MatrixMarketError(lineno, "unsupported field '" + field + "'");
  if (symmetry != "general")
    throw MatrixMarketError(lineno, "unsupported symmetry '" + symmetry + "'");

  if (!next_data_line(in, line, lineno)) throw MatrixMarketError(lineno, "missing size line");
  std::istringstream size_line(line);
  const std::size_t m = parse_index(size_line, lineno, "row count");
  const std::size_t n = parse_index(size_line, lineno, "column count");

  if (format == "array") {
    expect_end(size_line, lineno);
    // Column-major on disk.
    DenseMatrix a(m, n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        if (!next_data_line(in, line, lineno))
          throw MatrixMarketError(lineno, "unexpected end of file in array data");
        std::istringstream ss(line);
        a(i, j) = parse_value(ss, lineno);
        expect_end(ss, lineno);
      }
    }
    if (next_data_line(in, line, lineno))
      throw MatrixMarketError(lineno, "more entries than declared");
    return a;
  }

  const std::size_t count = parse_index(size_line, lineno, "entry count");
  expect_end(size_line, lineno);
  std::vector<Triplet> triplets;
  triplets.reserve(count);
  std::vector<std::size_t> lines;
  lines.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (!next_data_line(in, line, lineno))
      throw MatrixMarketError(lineno, "unexpected end of file: expected " +
                                          std::to_string(count) + " entries, got " +
                                          std::to_string(k));
    std::istringstream ss(line);
    const std::size_t i = parse_index(ss, lineno, "row index");
    const std::size_t j = parse_index(ss, lineno, "column index");
    if (i < 1 || i > m || j < 1 || j > n)
      throw MatrixMarketError(lineno, "index (" + std::to_string(i) + ", " + std::to_string(j) +
                                          ") outside " + std::to_string(m) + "x" +
                                          std::to_string(n));
    const double v = parse_value(ss, lineno);
    expect_end(ss, lineno);
    triplets.push_back({i - 1, j - 1, v});
    lines.push_back(lineno);
  }
  if (next_data_line(in, line, lineno))
    throw MatrixMarketError(lineno, "more entries than declared");

  // Duplicate detection that can still name the offending line.
  std::vector<std::size_t> order(triplets.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return triplets[a].row != triplets[b].row ? triplets[a].row < triplets[b].row
                                              : triplets[a].col < triplets[b].col;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto& p = triplets[order[k - 1]];
    const auto& q = triplets[order[k]];
    if (p.row == q.row && p.col == q.col)
      throw MatrixMarketError(lines[order[k]], "duplicate coordinate (" +
                                                   std::to_string(q.row + 1) + ", " +
                                                   std::to_string(q.col + 1) + ")");
  }
  return SparseMatrix::from_triplets(m, n, std::move(triplets), true);
}

Matrix mm_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return mm_read(in);
}

void mm_write(std::ostream& out, const Matrix& a) {
  if (const auto* s = std::get_if<SparseMatrix>(&a)) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << s->rows() << ' ' << s->cols() << ' ' << s->nnz() << '\n';
    for (std::size_t i = 0; i < s->rows(); ++i) {
      auto c = s->row_cols(i);
      auto v = s->row_values(i);
      for (std::size_t k = 0; k < c.size(); ++k)
        out << (i + 1) << ' ' << (c[k] + 1) << ' ' << format_value(v[k]) << '\n';
    }
  } else {
    const auto& d = std::get<DenseMatrix>(a);
    out << "%%MatrixMarket matrix array real general\n";
    out << d.rows() << ' ' << d.cols() << '\n';
    for (std::size_t j = 0; j < d.cols(); ++j)
      for (std::size_t i = 0; i < d.rows(); ++i) out << format_value(d(i, j)) << '\n';
  }
  if (!out) throw std::runtime_error("mm_write: stream error");
}

void mm_write(const std::filesystem::path& path, const Matrix& a) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  mm_write(out, a);
}

}  // namespace rsls
