#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "matfac/error.hpp"
#include "matfac/types.hpp"

namespace matfac::io {

// Panel files are long-format CSV:
//
//   # matfac-panel v1 T=<T> p1=<p1> p2=<p2>     (optional declaration)
//   t,i,j,value
//   0,0,0,<value>
//   ...
//
// Without the declaration line the dimensions are one past the largest index
// seen. Values are written with 17 significant digits, which round-trips doubles.

inline constexpr int kPanelFormatVersion = 1;

/// Shortest-safe decimal form: 17 significant digits.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

inline std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<double> parse_real(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline Error parse_error(std::size_t line, const std::string& what) {
  return Error(ErrorCode::Parse, "line " + std::to_string(line) + ": " + what);
}

inline std::string cell_str(std::size_t t, std::size_t i, std::size_t j) {
  return "(t=" + std::to_string(t) + ", i=" + std::to_string(i) + ", j=" + std::to_string(j) + ")";
}

struct Declaration {
  std::size_t t_len, p1, p2;
};

inline std::optional<Declaration> parse_declaration(std::string_view line, std::size_t lineno) {
  // # matfac-panel v1 T=.. p1=.. p2=..
  std::istringstream in{std::string(line)};
  std::string hash, tag, version;
  in >> hash >> tag >> version;
  if (hash != "#" || tag != "matfac-panel") return std::nullopt;
  if (version != "v" + std::to_string(kPanelFormatVersion))
    throw parse_error(lineno, "unsupported panel format version '" + version + "'");
  Declaration d{0, 0, 0};
  int seen = 0;
  std::string kv;
  while (in >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw parse_error(lineno, "bad declaration field '" + kv + "'");
    const auto value = parse_index(std::string_view(kv).substr(eq + 1));
    if (!value) throw parse_error(lineno, "bad declaration value '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    if (key == "T") {
      d.t_len = *value;
      seen |= 1;
    } else if (key == "p1") {
      d.p1 = *value;
      seen |= 2;
    } else if (key == "p2") {
      d.p2 = *value;
      seen |= 4;
    } else {
      throw parse_error(lineno, "unknown declaration key '" + key + "'");
    }
  }
  if (seen != 7) throw parse_error(lineno, "declaration needs T, p1 and p2");
  return d;
}

}  // namespace detail

inline MatrixPanel read_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");

  std::string line;
  std::size_t lineno = 0;
  std::optional<detail::Declaration> decl;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++lineno;
    std::string_view s = detail::trim(line);
    if (lineno == 1 && s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF) s.remove_prefix(3);  // BOM
    if (s.empty()) continue;
    if (s.front() == '#') {
      if (!decl) decl = detail::parse_declaration(s, lineno);
      continue;
    }
    if (s != "t,i,j,value") throw detail::parse_error(lineno, "expected header 't,i,j,value'");
    have_header = true;
  }
  if (!have_header) throw Error(ErrorCode::Parse, "'" + path + "' has no header row");

  struct Cell {
    std::size_t t, i, j;
    double v;
    std::size_t line;
  };
  std::vector<Cell> cells;
  std::size_t nt = 0, n1 = 0, n2 = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view s = detail::trim(line);
    if (s.empty()) continue;
    const auto fields = detail::split(s, ',');
    if (fields.size() != 4) throw detail::parse_error(lineno, "expected 4 fields");
    const auto t = detail::parse_index(fields[0]);
    const auto i = detail::parse_index(fields[1]);
    const auto j = detail::parse_index(fields[2]);
    const auto v = detail::parse_real(fields[3]);
    if (!t || !i || !j) throw detail::parse_error(lineno, "indices must be non-negative integers");
    if (!v) throw detail::parse_error(lineno, "value '" + std::string(fields[3]) + "' is not a real number");
    cells.push_back({*t, *i, *j, *v, lineno});
    nt = std::max(nt, *t + 1);
    n1 = std::max(n1, *i + 1);
    n2 = std::max(n2, *j + 1);
  }
  if (decl) {
    for (const Cell& c : cells)
      if (c.t >= decl->t_len || c.i >= decl->p1 || c.j >= decl->p2)
        throw detail::parse_error(c.line, "cell " + detail::cell_str(c.t, c.i, c.j) + " outside declared dimensions");
    nt = decl->t_len, n1 = decl->p1, n2 = decl->p2;
  }
  if (nt == 0 || n1 == 0 || n2 == 0) throw Error(ErrorCode::Parse, "'" + path + "' holds no cells");

  MatrixPanel panel = MatrixPanel::zeros(nt, n1, n2);
  std::vector<std::uint8_t> seen(nt * n1 * n2, 0);
  for (const Cell& c : cells) {
    auto& flag = seen[(c.t * n1 + c.i) * n2 + c.j];
    if (flag) throw Error(ErrorCode::DuplicateCell, "cell " + detail::cell_str(c.t, c.i, c.j) + " repeated on line " +
                                                        std::to_string(c.line));
    flag = 1;
    panel[c.t](c.i, c.j) = c.v;
  }
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j)
        if (!seen[(t * n1 + i) * n2 + j]) throw Error(ErrorCode::MissingCell, "cell " + detail::cell_str(t, i, j));
  validate_panel(panel);
  return panel;
}

namespace detail {
inline std::ofstream open_out(const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::Io, "empty output path");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  return out;
}
inline void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}
}  // namespace detail

/// Writes the declaration, header and cells in t-major, then i, then j order.
inline void write_panel_csv(const MatrixPanel& panel, const std::string& path) {
  validate_panel(panel);
  std::ofstream out = detail::open_out(path);
  out << "# matfac-panel v" << kPanelFormatVersion << " T=" << panel.t_len() << " p1=" << panel.p1
      << " p2=" << panel.p2 << "\n";
  out << "t,i,j,value\n";
  for (std::size_t t = 0; t < panel.t_len(); ++t)
    for (std::size_t i = 0; i < panel.p1; ++i)
      for (std::size_t j = 0; j < panel.p2; ++j)
        out << t << ',' << i << ',' << j << ',' << format_double(panel[t](i, j)) << '\n';
  detail::finish(out, path);
}

/// Plain matrix file: a "<rows>x<cols>" line, then one comma-separated row per line.
inline void write_matrix_csv(const Matrix& m, const std::string& path) {
  std::ofstream out = detail::open_out(path);
  out << m.rows() << 'x' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
  detail::finish(out, path);
}

inline Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "'" + path + "' is empty");
  const std::string_view head = detail::trim(line);
  const auto x = head.find('x');
  const auto rows = x == std::string_view::npos ? std::nullopt : detail::parse_index(head.substr(0, x));
  const auto cols = x == std::string_view::npos ? std::nullopt : detail::parse_index(head.substr(x + 1));
  if (!rows || !cols) throw detail::parse_error(1, "expected '<rows>x<cols>'");
  Matrix m(*rows, *cols);
  for (std::size_t i = 0; i < *rows; ++i) {
    if (!std::getline(in, line)) throw detail::parse_error(i + 2, "missing matrix row");
    const auto fields = detail::split(detail::trim(line), ',');
    if (fields.size() != *cols) throw detail::parse_error(i + 2, "expected " + std::to_string(*cols) + " fields");
    for (std::size_t j = 0; j < *cols; ++j) {
      const auto v = detail::parse_real(fields[j]);
      if (!v) throw detail::parse_error(i + 2, "bad value '" + std::string(fields[j]) + "'");
      m(i, j) = *v;
    }
  }
  return m;
}

/// Long-format factor path: header "t,a,b,value".
inline void write_factors_csv(const FactorPath& f, const std::string& path) {
  std::ofstream out = detail::open_out(path);
  out << "t,a,b,value\n";
  for (std::size_t t = 0; t < f.t_len(); ++t)
    for (std::size_t a = 0; a < f.m1; ++a)
      for (std::size_t b = 0; b < f.m2; ++b) out << t << ',' << a << ',' << b << ',' << format_double(f[t](a, b)) << '\n';
  detail::finish(out, path);
}

}  // namespace matfac::io
