#pragma once

// Output helpers: JSON with 17 significant digits, CSV tables, ASCII cell masks,
// and write-then-rename file replacement.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "robin/bvlimit.hpp"
#include "robin/error.hpp"
#include "robin/geometry.hpp"

namespace robin::io {

using Json = nlohmann::ordered_json;

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void write_json(std::ostream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << Json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent, depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      if (flat) {
        os << "[";
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k > 0) os << ", ";
          write_json(os, j[k], indent, depth + 1);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k > 0) os << ",\n";
        os << pad;
        write_json(os, j[k], indent, depth + 1);
      }
      os << "\n" << close << "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      // JSON has no non-finite numbers.
      os << (std::isfinite(x) ? format_double(x) : "null");
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace detail

/// Serializes with two-space indentation and every float at 17 significant digits.
inline std::string to_json_text(const Json& j) {
  std::ostringstream os;
  detail::write_json(os, j, 2, 0);
  os << "\n";
  return os.str();
}

/// Writes `content` next to `path` and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
  }
}

/// CSV table; numeric cells formatted with 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row() {
    rows_.emplace_back();
    return *this;
  }
  CsvTable& add(double x) { return add_text(format_double(x)); }
  CsvTable& add(int x) { return add_text(std::to_string(x)); }
  CsvTable& add(long long x) { return add_text(std::to_string(x)); }
  CsvTable& add(bool x) { return add_text(x ? "true" : "false"); }
  CsvTable& add(const std::string& s) { return add_text(quote(s)); }
  CsvTable& add(const char* s) { return add(std::string(s)); }

  std::string str() const {
    std::string out;
    for (std::size_t k = 0; k < header_.size(); ++k) {
      if (k > 0) out += ',';
      out += header_[k];
    }
    out += '\n';
    for (const auto& r : rows_) {
      if (r.size() != header_.size()) throw std::logic_error("CSV row width mismatch");
      for (std::size_t k = 0; k < r.size(); ++k) {
        if (k > 0) out += ',';
        out += r[k];
      }
      out += '\n';
    }
    return out;
  }

  std::size_t size() const { return rows_.size(); }

 private:
  CsvTable& add_text(std::string s) {
    if (rows_.empty()) rows_.emplace_back();
    rows_.back().push_back(std::move(s));
    return *this;
  }
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Cell mask on the full nx-by-ny box.
struct Mask {
  int width = 0;
  int height = 0;
  double h = 0.0;
  /// Row-major, i fastest, row j = 0 first.
  std::vector<std::uint8_t> cells;
};

/// Mask text: header line "width height h", then `height` lines of `width` space-separated 0/1
/// values; the first line after the header is row j = 0 (lowest y).
inline std::string mask_text(const Mask& m) {
  std::string out = std::to_string(m.width) + " " + std::to_string(m.height) + " " + format_double(m.h) + "\n";
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) {
      if (i > 0) out += ' ';
      out += m.cells[static_cast<std::size_t>(j) * static_cast<std::size_t>(m.width) + static_cast<std::size_t>(i)] ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

inline Mask parse_mask(const std::string& text) {
  std::istringstream in(text);
  Mask m;
  if (!(in >> m.width >> m.height >> m.h)) throw InvalidArgument("mask header must be \"width height h\"");
  if (m.width <= 0 || m.height <= 0 || !(m.h > 0.0) || !std::isfinite(m.h)) {
    throw InvalidArgument("mask header has non-positive dimensions or spacing");
  }
  const std::size_t n = static_cast<std::size_t>(m.width) * static_cast<std::size_t>(m.height);
  m.cells.reserve(n);
  int v = 0;
  while (m.cells.size() < n && in >> v) {
    if (v != 0 && v != 1) throw InvalidArgument("mask entries must be 0 or 1");
    m.cells.push_back(static_cast<std::uint8_t>(v));
  }
  if (m.cells.size() != n) throw InvalidArgument("mask has fewer entries than width*height");
  std::string extra;
  if (in >> extra) throw InvalidArgument("mask has more entries than width*height");
  return m;
}

inline Mask read_mask(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read mask file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_mask(ss.str());
}

/// Grid with unit face weights from a mask; empty or disconnected masks are rejected.
inline GridDomain grid_from_mask(const Mask& m, Point origin = {0.0, 0.0}) {
  auto g = GridDomain::from_mask(m.width, m.height, m.h, m.cells, origin);
  if (g.size() == 0) throw DegenerateRaster("mask has no interior cells");
  if (!g.connected()) throw DegenerateRaster("mask is disconnected");
  return g;
}

/// A cell set of `grid` as a full-box mask.
inline Mask set_mask(const GridDomain& grid, const CellSet& set) {
  if (set.size() != grid.size()) throw InvalidArgument("set size does not match the grid");
  Mask m;
  m.width = grid.nx();
  m.height = grid.ny();
  m.h = grid.spacing();
  m.cells.assign(static_cast<std::size_t>(m.width) * static_cast<std::size_t>(m.height), 0);
  for (std::size_t c = 0; c < set.size(); ++c) {
    if (!set[c]) continue;
    const auto [i, j] = grid.coords(static_cast<int>(c));
    m.cells[static_cast<std::size_t>(j) * static_cast<std::size_t>(m.width) + static_cast<std::size_t>(i)] = 1;
  }
  return m;
}

/// Columns i,j,x,y,<name>.
inline CsvTable field_table(const GridDomain& grid, std::span<const double> v, const std::string& name) {
  require_field(grid, v);
  CsvTable t({"i", "j", "x", "y", name});
  for (std::size_t c = 0; c < v.size(); ++c) {
    const auto [i, j] = grid.coords(static_cast<int>(c));
    const Point x = grid.center(static_cast<int>(c));
    t.row().add(i).add(j).add(x.x).add(x.y).add(v[c]);
  }
  return t;
}

}  // namespace robin::io
