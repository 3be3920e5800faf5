#ifndef MEMFLUX_PLOT_HPP
#define MEMFLUX_PLOT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "memflux/grid.hpp"

namespace memflux {

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
};

/// Self-contained SVG line plot with axes, tick labels and one circle
/// marker per sample.  Throws IoError on unwritable paths and
/// std::invalid_argument on non-finite data.
void emit_line_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<PlotSeries>& series, bool log_x = false);

/// Self-contained SVG heatmap of a cell-centered field with extent
/// annotations and a min/max legend; masked cells are drawn dark.
void emit_heatmap(const std::filesystem::path& path, const std::string& title,
                  const ScalarField& field, const CellMask& mask = CellMask::none());

}  // namespace memflux

#endif
