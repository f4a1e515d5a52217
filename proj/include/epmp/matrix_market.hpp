#pragma once

// Matrix Market (.mtx) reader/writer for dense real operators and vectors.
// Supports the array and coordinate formats with general, symmetric and
// skew-symmetric storage; real, integer and pattern fields. Values are written
// with 17 significant digits so a save/load round trip is bit-exact.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "epmp/error.hpp"
#include "epmp/linalg.hpp"

namespace epmp {

enum class MatrixMarketFormat { array, coordinate };

namespace mm_detail {

enum class Field { real, integer, pattern };
enum class Symmetry { general, symmetric, skew_symmetric };

struct Header {
  MatrixMarketFormat format = MatrixMarketFormat::array;
  Field field = Field::real;
  Symmetry symmetry = Symmetry::general;
};

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

inline Error parse_error(const std::string& path, std::size_t line_no, const std::string& what) {
  return Error(Errc::parse_error, path + ":" + std::to_string(line_no) + ": " + what);
}

inline std::size_t to_index(std::string_view tok, const std::string& path, std::size_t line_no) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw parse_error(path, line_no, "expected an integer, got '" + std::string(tok) + "'");
  }
  return v;
}

inline double to_real(std::string_view tok, const std::string& path, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec == std::errc::result_out_of_range) {
    throw Error(Errc::non_finite, path + ":" + std::to_string(line_no) + ": value out of range");
  }
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw parse_error(path, line_no, "expected a number, got '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) {
    throw Error(Errc::non_finite, path + ":" + std::to_string(line_no) + ": entry is not finite");
  }
  return v;
}

inline Header parse_header(const std::string& line, const std::string& path) {
  const auto tok = split(line);
  if (tok.size() != 5 || lower(tok[0]) != "%%matrixmarket" || lower(tok[1]) != "matrix") {
    throw parse_error(path, 1, "missing '%%MatrixMarket matrix' banner");
  }
  Header h;
  const std::string fmt = lower(tok[2]);
  const std::string field = lower(tok[3]);
  const std::string sym = lower(tok[4]);
  if (fmt == "array") {
    h.format = MatrixMarketFormat::array;
  } else if (fmt == "coordinate") {
    h.format = MatrixMarketFormat::coordinate;
  } else {
    throw parse_error(path, 1, "unknown format '" + fmt + "'");
  }
  if (field == "real" || field == "double") {
    h.field = Field::real;
  } else if (field == "integer") {
    h.field = Field::integer;
  } else if (field == "pattern") {
    h.field = Field::pattern;
  } else {
    throw parse_error(path, 1, "unsupported field '" + field + "'");
  }
  if (sym == "general") {
    h.symmetry = Symmetry::general;
  } else if (sym == "symmetric") {
    h.symmetry = Symmetry::symmetric;
  } else if (sym == "skew-symmetric") {
    h.symmetry = Symmetry::skew_symmetric;
  } else {
    throw parse_error(path, 1, "unsupported symmetry '" + sym + "'");
  }
  if (h.field == Field::pattern && h.format == MatrixMarketFormat::array) {
    throw parse_error(path, 1, "pattern field requires coordinate format");
  }
  return h;
}

/// Parsed file contents: rows×cols values in row-major order.
struct Dense {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

inline Dense read_dense(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw parse_error(path, 1, "empty file");
  const Header h = parse_header(line, path);

  auto next_data_line = [&](std::vector<std::string_view>& tok) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line[0] == '%') continue;
      tok = split(line);
      if (!tok.empty()) return true;
    }
    return false;
  };

  std::vector<std::string_view> tok;
  if (!next_data_line(tok)) throw parse_error(path, line_no, "missing size line");
  const std::size_t expected = h.format == MatrixMarketFormat::array ? 2 : 3;
  if (tok.size() != expected) throw parse_error(path, line_no, "malformed size line");
  Dense d;
  d.rows = to_index(tok[0], path, line_no);
  d.cols = to_index(tok[1], path, line_no);
  if (d.rows == 0 || d.cols == 0) throw parse_error(path, line_no, "zero dimension");
  if (h.symmetry != Symmetry::general && d.rows != d.cols) {
    throw Error(Errc::non_square, path + ": symmetric storage requires a square matrix");
  }
  d.values.assign(d.rows * d.cols, 0.0);
  auto at = [&d](std::size_t i, std::size_t j) -> double& { return d.values[i * d.cols + j]; };
  const double mirror = h.symmetry == Symmetry::skew_symmetric ? -1.0 : 1.0;

  if (h.format == MatrixMarketFormat::array) {
    // Column-major; symmetric variants list the lower triangle only.
    for (std::size_t j = 0; j < d.cols; ++j) {
      const std::size_t first = h.symmetry == Symmetry::general       ? 0
                                : h.symmetry == Symmetry::symmetric ? j
                                                                    : j + 1;
      for (std::size_t i = first; i < d.rows; ++i) {
        if (!next_data_line(tok)) throw parse_error(path, line_no, "too few array entries");
        if (tok.size() != 1) throw parse_error(path, line_no, "expected one value per line");
        const double v = to_real(tok[0], path, line_no);
        at(i, j) = v;
        if (i != j && h.symmetry != Symmetry::general) at(j, i) = mirror * v;
      }
    }
  } else {
    const std::size_t nnz = to_index(tok[2], path, line_no);
    const std::size_t per_line = h.field == Field::pattern ? 2 : 3;
    for (std::size_t e = 0; e < nnz; ++e) {
      if (!next_data_line(tok)) throw parse_error(path, line_no, "too few coordinate entries");
      if (tok.size() != per_line) throw parse_error(path, line_no, "malformed coordinate entry");
      const std::size_t i = to_index(tok[0], path, line_no);
      const std::size_t j = to_index(tok[1], path, line_no);
      if (i < 1 || i > d.rows || j < 1 || j > d.cols) {
        throw parse_error(path, line_no, "coordinate out of range");
      }
      const double v = h.field == Field::pattern ? 1.0 : to_real(tok[2], path, line_no);
      at(i - 1, j - 1) += v;
      if (i != j && h.symmetry != Symmetry::general) at(j - 1, i - 1) += mirror * v;
    }
  }
  if (next_data_line(tok)) throw parse_error(path, line_no, "trailing data after last entry");
  return d;
}

inline void write_real(std::FILE* f, double v) { std::fprintf(f, "%.17g", v); }

struct File {
  std::FILE* handle;
  explicit File(const std::string& path) : handle(std::fopen(path.c_str(), "w")) {
    if (!handle) throw Error(Errc::io_error, "cannot open '" + path + "' for writing");
  }
  ~File() {
    if (handle) std::fclose(handle);
  }
  File(const File&) = delete;
  File& operator=(const File&) = delete;

  void close(const std::string& path) {
    const bool bad = std::ferror(handle) != 0;
    const int rc = std::fclose(handle);
    handle = nullptr;
    if (bad || rc != 0) throw Error(Errc::io_error, "write to '" + path + "' failed");
  }
};

}  // namespace mm_detail

/// Loads a square matrix. Unlisted coordinate entries are zero; symmetric
/// files are expanded to full storage.
inline DenseMatrix load_matrix_market(const std::string& path) {
  auto d = mm_detail::read_dense(path);
  if (d.rows != d.cols) {
    throw Error(Errc::non_square, path + ": matrix is " + std::to_string(d.rows) + "x" +
                                      std::to_string(d.cols) + ", expected square");
  }
  return DenseMatrix(d.rows, std::move(d.values));
}

inline void save_matrix_market(const DenseMatrix& a, const std::string& path,
                               MatrixMarketFormat format = MatrixMarketFormat::array) {
  mm_detail::File f(path);
  const std::size_t n = a.size();
  if (format == MatrixMarketFormat::array) {
    std::fprintf(f.handle, "%%%%MatrixMarket matrix array real general\n%zu %zu\n", n, n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        mm_detail::write_real(f.handle, a(i, j));
        std::fputc('\n', f.handle);
      }
    }
  } else {
    std::size_t nnz = 0;
    for (double x : a.values()) nnz += x != 0.0;
    std::fprintf(f.handle, "%%%%MatrixMarket matrix coordinate real general\n%zu %zu %zu\n", n,
                 n, nnz);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (a(i, j) == 0.0) continue;
        std::fprintf(f.handle, "%zu %zu ", i + 1, j + 1);
        mm_detail::write_real(f.handle, a(i, j));
        std::fputc('\n', f.handle);
      }
    }
  }
  f.close(path);
}

/// Reads an n×1 file (array or coordinate).
inline Vector load_vector(const std::string& path) {
  auto d = mm_detail::read_dense(path);
  if (d.cols != 1) {
    throw Error(Errc::dimension_mismatch, path + ": vector file must have exactly one column");
  }
  return std::move(d.values);
}

inline void save_vector(std::span<const double> v, const std::string& path) {
  mm_detail::File f(path);
  std::fprintf(f.handle, "%%%%MatrixMarket matrix array real general\n%zu 1\n", v.size());
  for (double x : v) {
    mm_detail::write_real(f.handle, x);
    std::fputc('\n', f.handle);
  }
  f.close(path);
}

}  // namespace epmp
