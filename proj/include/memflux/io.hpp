#ifndef MEMFLUX_IO_HPP
#define MEMFLUX_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "memflux/grid.hpp"

namespace memflux {

/// Shortest round-trip decimal form of v ('%.17g', C locale).
std::string format_double(double v);

/// RFC-4180 style CSV: header row, '.' decimal separator, LF line
/// endings, '%.17g' values.  Byte-deterministic for identical data.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Structured-grid text dump.  Header line "nx ny hx hy ox oy", then
/// ny lines of nx space-separated values, bottom row first.
void write_field(const std::filesystem::path& path, const ScalarField& field);
ScalarField read_field(const std::filesystem::path& path);

/// Creates the directory (and parents); throws IoError on failure.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace memflux

#endif
