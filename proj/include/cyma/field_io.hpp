#pragma once

// Field files: `<name>.bin` holds raw little-endian doubles, row-major with
// axis 1 slow; `<name>.meta.json` records the grid. CSV (x1,x2,value) is
// available for small grids.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "cyma/grid.hpp"
#include "cyma/serialize.hpp"

namespace cyma {

namespace detail {

inline std::string strip_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
    return s.substr(0, s.size() - suffix.size());
  return s;
}

inline std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int k = 0; k < 8; ++k) r |= ((v >> (8 * k)) & 0xFFu) << (8 * (7 - k));
  return r;
}

}  // namespace detail

/// `stem` may carry a trailing ".bin". Returns the data file path.
inline std::string write_field(const TorusField& f, const std::string& stem) {
  const std::string base = detail::strip_suffix(stem, ".bin");
  {
    std::ofstream out(base + ".bin", std::ios::binary);
    if (!out) throw Error(Errc::ParseError, "cannot write '" + base + ".bin'");
    for (double v : f.values()) {
      const std::uint64_t bits = detail::to_little(std::bit_cast<std::uint64_t>(v));
      char bytes[8];
      std::memcpy(bytes, &bits, 8);
      out.write(bytes, 8);
    }
    if (!out) throw Error(Errc::ParseError, "short write to '" + base + ".bin'");
  }
  std::ofstream meta(base + ".meta.json");
  if (!meta) throw Error(Errc::ParseError, "cannot write '" + base + ".meta.json'");
  meta << dump(Json{{"n1", f.grid().n1}, {"n2", f.grid().n2}, {"period1", 1.0}, {"period2", 1.0}}) << '\n';
  return base + ".bin";
}

inline TorusField read_field(const std::string& path) {
  const std::string base = detail::strip_suffix(path, ".bin");
  const Json meta = read_json_file(base + ".meta.json");
  TorusGrid grid;
  try {
    if (meta.value("period1", 1.0) != 1.0 || meta.value("period2", 1.0) != 1.0)
      throw Error(Errc::ParseError, "field periods must be 1");
    grid = TorusGrid(meta.at("n1").get<int>(), meta.at("n2").get<int>());
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, base + ".meta.json: " + e.what());
  }
  const std::string bytes = read_text_file(base + ".bin");
  if (bytes.size() != grid.size() * 8)
    throw Error(Errc::ParseError, base + ".bin holds " + std::to_string(bytes.size()) + " bytes, expected " +
                                      std::to_string(grid.size() * 8));
  TorusField f(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::uint64_t bits;
    std::memcpy(&bits, bytes.data() + 8 * k, 8);
    f[k] = std::bit_cast<double>(detail::to_little(bits));
  }
  return f;
}

inline void write_csv(const TorusField& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::ParseError, "cannot write '" + path + "'");
  const auto& g = f.grid();
  out << "x1,x2,value\n" << std::setprecision(17);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) out << g.x1(i) << ',' << g.x2(j) << ',' << f(i, j) << '\n';
}

/// Reads a CSV written by write_csv; rows must cover the full grid.
inline TorusField read_csv(const std::string& path, const TorusGrid& grid) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("x1,x2,value", 0) != 0)
    throw Error(Errc::ParseError, path + ": missing header x1,x2,value");
  TorusField f(grid);
  std::vector<char> seen(grid.size(), 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double x1, x2, v;
    char c1, c2;
    std::istringstream row(line);
    if (!(row >> x1 >> c1 >> x2 >> c2 >> v) || c1 != ',' || c2 != ',')
      throw Error(Errc::ParseError, path + ": bad row '" + line + "'");
    const long i = std::lround(x1 * grid.n1), j = std::lround(x2 * grid.n2);
    if (i < 0 || i >= grid.n1 || j < 0 || j >= grid.n2)
      throw Error(Errc::ParseError, path + ": point off grid '" + line + "'");
    f(static_cast<int>(i), static_cast<int>(j)) = v;
    seen[static_cast<std::size_t>(i) * grid.n2 + j] = 1;
  }
  for (char s : seen)
    if (!s) throw Error(Errc::ParseError, path + ": grid not fully covered");
  return f;
}

}  // namespace cyma
