#include "memflux/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "memflux/errors.hpp"
#include "memflux/io.hpp"

namespace memflux {

namespace {

constexpr double kWidth = 720.0, kHeight = 480.0;
constexpr double kMarginL = 72.0, kMarginR = 24.0, kMarginT = 40.0, kMarginB = 56.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Color {
  int r, g, b;
};

/// Compact perceptual-ish ramp (dark blue -> teal -> yellow).
Color colormap(double t) {
  static const Color stops[] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int k = std::min(3, static_cast<int>(t));
  const double f = t - k;
  return {static_cast<int>(stops[k].r + f * (stops[k + 1].r - stops[k].r)),
          static_cast<int>(stops[k].g + f * (stops[k + 1].g - stops[k].g)),
          static_cast<int>(stops[k].b + f * (stops[k + 1].b - stops[k].b))};
}

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  std::vector<double> ticks;
  if (!(hi > lo)) {
    ticks.push_back(lo);
    return ticks;
  }
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  const double first = std::ceil(lo / step) * step;
  for (double v = first; v <= hi + 0.5 * step; v += step) ticks.push_back(v);
  return ticks;
}

}  // namespace

void emit_line_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<PlotSeries>& series, bool log_x) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("emit_line_plot: series size mismatch");
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]))
        throw std::invalid_argument("emit_line_plot: non-finite data");
      const double xv = log_x ? std::log10(s.x[k]) : s.x[k];
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, s.y[k]);
      ymax = std::max(ymax, s.y[k]);
    }
  }
  if (!(xmax >= xmin)) throw std::invalid_argument("emit_line_plot: no data");
  if (xmax == xmin) {
    xmax += 0.5;
    xmin -= 0.5;
  }
  if (ymax == ymin) {
    ymax += 0.5;
    ymin -= 0.5;
  }
  const double pad = 0.04 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double pw = kWidth - kMarginL - kMarginR;
  const double ph = kHeight - kMarginT - kMarginB;
  auto sx = [&](double x) {
    const double v = log_x ? std::log10(x) : x;
    return kMarginL + (v - xmin) / (xmax - xmin) * pw;
  };
  auto sy = [&](double y) { return kMarginT + (ymax - y) / (ymax - ymin) * ph; };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
  // axes
  out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  // ticks
  if (log_x) {
    for (int e = static_cast<int>(std::floor(xmin)); e <= static_cast<int>(std::ceil(xmax));
         ++e) {
      if (e < xmin - 1e-9 || e > xmax + 1e-9) continue;
      const double px = kMarginL + (e - xmin) / (xmax - xmin) * pw;
      out << "<line x1=\"" << px << "\" y1=\"" << kMarginT + ph << "\" x2=\"" << px << "\" y2=\""
          << kMarginT + ph + 6 << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << px << "\" y=\"" << kMarginT + ph + 20
          << "\" text-anchor=\"middle\" font-size=\"11\">1e" << e << "</text>\n";
    }
  } else {
    for (double tv : nice_ticks(xmin, xmax)) {
      const double px = kMarginL + (tv - xmin) / (xmax - xmin) * pw;
      out << "<line x1=\"" << px << "\" y1=\"" << kMarginT + ph << "\" x2=\"" << px << "\" y2=\""
          << kMarginT + ph + 6 << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << px << "\" y=\"" << kMarginT + ph + 20
          << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(tv) << "</text>\n";
    }
  }
  for (double tv : nice_ticks(ymin, ymax)) {
    const double py = sy(tv);
    out << "<line x1=\"" << kMarginL - 6 << "\" y1=\"" << py << "\" x2=\"" << kMarginL
        << "\" y2=\"" << py << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kMarginL - 9 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(tv) << "</text>\n";
  }
  out << "<text x=\"" << kMarginL + pw / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
  out << "<text x=\"16\" y=\"" << kMarginT + ph / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << kMarginT + ph / 2 << ")\">" << ylabel << "</text>\n";

  int si = 0;
  for (const auto& s : series) {
    const char* color = kSeriesColors[si % 6];
    if (s.x.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < s.x.size(); ++k)
        out << sx(s.x[k]) << ',' << sy(s.y[k]) << ' ';
      out << "\"/>\n";
    }
    for (std::size_t k = 0; k < s.x.size(); ++k)
      out << "<circle cx=\"" << sx(s.x[k]) << "\" cy=\"" << sy(s.y[k])
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    if (!s.name.empty())
      out << "<text x=\"" << kMarginL + pw - 8 << "\" y=\"" << kMarginT + 16 + 16 * si
          << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << s.name
          << "</text>\n";
    ++si;
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path.string());
}

void emit_heatmap(const std::filesystem::path& path, const std::string& title,
                  const ScalarField& field, const CellMask& mask) {
  const StructuredGrid& g = field.grid;
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (int id = 0; id < g.cells(); ++id) {
    if (mask.is_masked(id)) continue;
    if (!std::isfinite(field.values[id]))
      throw std::invalid_argument("emit_heatmap: non-finite data");
    vmin = std::min(vmin, field.values[id]);
    vmax = std::max(vmax, field.values[id]);
  }
  const bool flat = !(vmax > vmin);

  const double pw = kWidth - kMarginL - kMarginR;
  const double ph = kHeight - kMarginT - kMarginB;
  const double cw = pw / g.nx, ch = ph / g.ny;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
  char buf[96];
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int id = g.index(i, j);
      Color c{40, 40, 40};
      if (!mask.is_masked(id)) {
        const double t = flat ? 0.5 : (field.values[id] - vmin) / (vmax - vmin);
        c = colormap(t);
      }
      const double x = kMarginL + i * cw;
      const double y = kMarginT + (g.ny - 1 - j) * ch;
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                    "fill=\"rgb(%d,%d,%d)\"/>\n",
                    x, y, cw + 0.5, ch + 0.5, c.r, c.g, c.b);
      out << buf;
    }
  }
  out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  const double x1 = g.origin_x + g.nx * g.hx, y1 = g.origin_y + g.ny * g.hy;
  out << "<text x=\"" << kMarginL << "\" y=\"" << kHeight - 30 << "\" font-size=\"12\">x in ["
      << fmt(g.origin_x) << ", " << fmt(x1) << "], y in [" << fmt(g.origin_y) << ", " << fmt(y1)
      << "]</text>\n";
  out << "<text x=\"" << kMarginL << "\" y=\"" << kHeight - 12 << "\" font-size=\"12\">min = "
      << format_double(vmin) << ", max = " << format_double(vmax) << "</text>\n";
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace memflux
