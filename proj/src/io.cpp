#include "memflux/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "memflux/errors.hpp"

namespace memflux {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out << ',';
    out << header[c];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_field(const std::filesystem::path& path, const ScalarField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  const StructuredGrid& g = field.grid;
  out << g.nx << ' ' << g.ny << ' ' << format_double(g.hx) << ' ' << format_double(g.hy) << ' '
      << format_double(g.origin_x) << ' ' << format_double(g.origin_y) << '\n';
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (i) out << ' ';
      out << format_double(field(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

ScalarField read_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  int nx = 0, ny = 0;
  double hx = 0, hy = 0, ox = 0, oy = 0;
  in >> nx >> ny >> hx >> hy >> ox >> oy;
  if (!in || nx < 1 || ny < 1) throw IoError("malformed field header: " + path.string());
  StructuredGrid g;
  g.nx = nx;
  g.ny = ny;
  g.hx = hx;
  g.hy = hy;
  g.origin_x = ox;
  g.origin_y = oy;
  ScalarField f(g, 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) in >> f(i, j);
  if (!in) throw IoError("malformed field data: " + path.string());
  return f;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace memflux
