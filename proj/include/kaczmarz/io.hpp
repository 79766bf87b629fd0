#pragma once

#include <cctype>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "kaczmarz/error.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/solver.hpp"

namespace kaczmarz::io {

// Text formats:
//   matrices  MatrixMarket, "coordinate real general" on output; "array"
//             (column-major, dense) is also accepted on input
//   vectors   one value per line
//   traces    CSV k,index,max_abs_res,res_norm2,dist_to_limit
// Doubles are written with 17 significant digits, which round-trips.

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace detail {

struct token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<token> split(std::string_view line, std::string_view delims = " \t\r") {
  std::vector<token> out;
  std::size_t p = 0;
  while (p < line.size()) {
    while (p < line.size() && delims.find(line[p]) != std::string_view::npos) ++p;
    if (p >= line.size()) break;
    std::size_t q = p;
    while (q < line.size() && delims.find(line[q]) == std::string_view::npos) ++q;
    out.push_back({line.substr(p, q - p), p + 1});
    p = q;
  }
  return out;
}

inline double parse_real(const token& t, std::size_t line) {
  std::string_view s = t.text;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw parse_error(line, t.column, "expected a real number, got '" + std::string(t.text) + "'");
  return v;
}

inline std::size_t parse_count(const token& t, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size())
    throw parse_error(line, t.column,
                      "expected a nonnegative integer, got '" + std::string(t.text) + "'");
  return v;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

inline bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw error(error_kind::io_error, "cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error(error_kind::io_error, "cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// MatrixMarket
// ----------------------------------------------------------------------------

inline matrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw parse_error(1, 1, "empty input, expected MatrixMarket header");

  const auto header = detail::split(line);
  if (header.size() != 5 || header[0].text != "%%MatrixMarket" ||
      !detail::iequals(header[1].text, "matrix"))
    throw parse_error(1, 1, "expected '%%MatrixMarket matrix <format> real general'");
  const bool coordinate = detail::iequals(header[2].text, "coordinate");
  if (!coordinate && !detail::iequals(header[2].text, "array"))
    throw parse_error(1, header[2].column, "format must be 'coordinate' or 'array'");
  if (!detail::iequals(header[3].text, "real") && !detail::iequals(header[3].text, "integer") &&
      !detail::iequals(header[3].text, "double"))
    throw parse_error(1, header[3].column, "field must be 'real' or 'integer'");
  if (!detail::iequals(header[4].text, "general"))
    throw parse_error(1, header[4].column, "only 'general' symmetry is supported");

  // size line, after comments
  std::vector<detail::token> size_tokens;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line) || line.front() == '%') continue;
    size_tokens = detail::split(line);
    break;
  }
  const std::size_t want = coordinate ? 3 : 2;
  if (size_tokens.size() != want)
    throw parse_error(lineno, 1,
                      coordinate ? "expected size line 'rows cols nnz'" : "expected size line 'rows cols'");
  const std::size_t rows = detail::parse_count(size_tokens[0], lineno);
  const std::size_t cols = detail::parse_count(size_tokens[1], lineno);
  const std::size_t entries = coordinate ? detail::parse_count(size_tokens[2], lineno) : rows * cols;
  if (coordinate && entries > rows * cols)
    throw error(error_kind::dimension_mismatch, "nnz exceeds rows * cols");

  matrix a(rows, cols);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line) || line.front() == '%') continue;
    const auto tok = detail::split(line);
    if (count == entries)
      throw error(error_kind::dimension_mismatch, "more entries than the " +
                                                      std::to_string(entries) +
                                                      " promised by the header (line " +
                                                      std::to_string(lineno) + ")");
    if (coordinate) {
      if (tok.size() != 3) throw parse_error(lineno, 1, "expected 'row col value'");
      const std::size_t i = detail::parse_count(tok[0], lineno);
      const std::size_t j = detail::parse_count(tok[1], lineno);
      if (i < 1 || i > rows) throw parse_error(lineno, tok[0].column, "row index out of range");
      if (j < 1 || j > cols) throw parse_error(lineno, tok[1].column, "column index out of range");
      if (!seen.emplace(i, j).second) throw parse_error(lineno, 1, "duplicate entry");
      a(i - 1, j - 1) = detail::parse_real(tok[2], lineno);
    } else {
      if (tok.size() != 1) throw parse_error(lineno, 1, "expected one value per line");
      a(count % rows, count / rows) = detail::parse_real(tok[0], lineno);
    }
    ++count;
  }
  if (count != entries)
    throw error(error_kind::dimension_mismatch, "header promises " + std::to_string(entries) +
                                                    " entries, found " + std::to_string(count));
  return a;
}

inline void write_matrix_market(std::ostream& out, const matrix& a) {
  std::size_t nnz = 0;
  for (double v : a.data())
    if (v != 0.0) ++nnz;
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << nnz << '\n';
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << format_double(a(i, j)) << '\n';
}

inline matrix load_matrix(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_matrix_market(in);
}

inline void save_matrix(const std::filesystem::path& path, const matrix& a) {
  auto out = detail::open_out(path);
  write_matrix_market(out, a);
}

// ----------------------------------------------------------------------------
// vectors
// ----------------------------------------------------------------------------

inline vector read_vector(std::istream& in) {
  vector v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    const auto tok = detail::split(line);
    if (tok.size() != 1) throw parse_error(lineno, tok[1].column, "expected one value per line");
    v.push_back(detail::parse_real(tok[0], lineno));
  }
  return v;
}

inline void write_vector(std::ostream& out, std::span<const double> v) {
  for (double x : v) out << format_double(x) << '\n';
}

inline vector load_vector(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_vector(in);
}

inline void save_vector(const std::filesystem::path& path, std::span<const double> v) {
  auto out = detail::open_out(path);
  write_vector(out, v);
}

// ----------------------------------------------------------------------------
// traces and windows
// ----------------------------------------------------------------------------

inline void write_trace_csv(std::ostream& out, const run_trace& trace) {
  out << "k,index,max_abs_res,res_norm2,dist_to_limit\n";
  for (const auto& r : trace.records) {
    out << r.k << ',' << r.index << ',' << format_double(r.max_abs_res) << ','
        << format_double(r.res_norm2) << ',';
    if (r.dist_to_limit) out << format_double(*r.dist_to_limit);
    out << '\n';
  }
}

/// Reads the `index` column of a trace CSV (header required).
inline std::vector<std::size_t> read_trace_indices(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw parse_error(1, 1, "empty trace");
  const auto header = detail::split(line, ",\r");
  std::optional<std::size_t> col;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c].text == "index") col = c;
  if (!col) throw parse_error(1, 1, "trace header has no 'index' column");

  std::vector<std::size_t> indices;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    // keep empty fields so column positions stay aligned
    std::vector<detail::token> fields;
    std::size_t start = 0;
    for (std::size_t p = 0; p <= line.size(); ++p) {
      if (p == line.size() || line[p] == ',' || line[p] == '\r') {
        fields.push_back({std::string_view(line).substr(start, p - start), start + 1});
        start = p + 1;
        if (p < line.size() && line[p] == '\r') break;
      }
    }
    if (*col >= fields.size()) throw parse_error(lineno, line.size() + 1, "missing 'index' field");
    indices.push_back(detail::parse_count(fields[*col], lineno));
  }
  return indices;
}

inline std::vector<std::size_t> load_trace_indices(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_trace_indices(in);
}

/// Window boundaries tau_k, separated by commas and/or newlines.
inline std::vector<std::size_t> read_windows(std::istream& in) {
  std::vector<std::size_t> tau;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (const auto& t : detail::split(line, ", \t\r")) tau.push_back(detail::parse_count(t, lineno));
  }
  return tau;
}

inline std::vector<std::size_t> load_windows(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_windows(in);
}

}  // namespace kaczmarz::io
