#include "metacure/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "metacure/common/errors.hpp"

namespace metacure::cli {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Dark blue -> pale -> dark red, linear in t over [0, 1].
std::string color_for(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double stops[3][3] = {{35, 61, 126}, {238, 238, 230}, {158, 34, 34}};
  const double u = t < 0.5 ? t * 2.0 : (t - 0.5) * 2.0;
  const double* lo = t < 0.5 ? stops[0] : stops[1];
  const double* hi = t < 0.5 ? stops[1] : stops[2];
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(lo[0] + (hi[0] - lo[0]) * u)),
                static_cast<int>(std::lround(lo[1] + (hi[1] - lo[1]) * u)),
                static_cast<int>(std::lround(lo[2] + (hi[2] - lo[2]) * u)));
  return buf;
}

}  // namespace

void write_heatmap_svg(const std::filesystem::path& path, std::size_t n,
                       const std::vector<double>& xs, const std::vector<double>& ys,
                       const std::vector<double>& values, const std::string& title) {
  if (n == 0 || xs.size() != n || ys.size() != n || values.size() != n * n)
    throw std::invalid_argument("write_heatmap_svg: grid sizes disagree");
  for (double v : values)
    if (!std::isfinite(v)) throw NumericError("heatmap rendering: non-finite value");

  double vmin = values[0], vmax = values[0];
  for (double v : values) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const double span = vmax - vmin;

  const double cell = 420.0 / static_cast<double>(n);
  const double left = 70.0, top = 50.0;
  const double plot = 420.0;
  const double bar_x = left + plot + 30.0;
  const double width = bar_x + 90.0;
  const double height = top + plot + 60.0;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
      << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " "
      << fmt(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(left) << "\" y=\"28\" font-family=\"sans-serif\" "
         "font-size=\"16\" fill=\"#222\">"
      << title << "</text>\n";

  // Cells: y grows upward on the plot, so row iy = 0 sits at the bottom.
  for (std::size_t iy = 0; iy < n; ++iy) {
    for (std::size_t ix = 0; ix < n; ++ix) {
      const double v = values[iy * n + ix];
      const double t = span > 0.0 ? (v - vmin) / span : 0.5;
      const double px = left + static_cast<double>(ix) * cell;
      const double py = top + plot - static_cast<double>(iy + 1) * cell;
      out << "<rect x=\"" << fmt(px) << "\" y=\"" << fmt(py) << "\" width=\""
          << fmt(cell) << "\" height=\"" << fmt(cell) << "\" fill=\"" << color_for(t)
          << "\"><title>x=" << fmt(xs[ix]) << " y=" << fmt(ys[iy]) << " value="
          << fmt(v) << "</title></rect>\n";
    }
  }
  out << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\""
      << fmt(plot) << "\" height=\"" << fmt(plot)
      << "\" fill=\"none\" stroke=\"#444\"/>\n";

  // Corner tick labels.
  out << "<text x=\"" << fmt(left) << "\" y=\"" << fmt(top + plot + 20.0)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">x="
      << fmt(xs.front()) << "</text>\n";
  out << "<text x=\"" << fmt(left + plot) << "\" y=\"" << fmt(top + plot + 20.0)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\" "
         "text-anchor=\"end\">x="
      << fmt(xs.back()) << "</text>\n";
  out << "<text x=\"" << fmt(left - 8.0) << "\" y=\"" << fmt(top + plot)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\" "
         "text-anchor=\"end\">y="
      << fmt(ys.front()) << "</text>\n";
  out << "<text x=\"" << fmt(left - 8.0) << "\" y=\"" << fmt(top + 12.0)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\" "
         "text-anchor=\"end\">y="
      << fmt(ys.back()) << "</text>\n";

  // Color bar, bottom = vmin.
  const std::size_t bands = 64;
  const double band_h = plot / static_cast<double>(bands);
  for (std::size_t b = 0; b < bands; ++b) {
    const double t = (static_cast<double>(b) + 0.5) / static_cast<double>(bands);
    out << "<rect x=\"" << fmt(bar_x) << "\" y=\""
        << fmt(top + plot - static_cast<double>(b + 1) * band_h) << "\" width=\"18\" "
           "height=\""
        << fmt(band_h + 0.5) << "\" fill=\"" << color_for(t) << "\"/>\n";
  }
  out << "<rect x=\"" << fmt(bar_x) << "\" y=\"" << fmt(top) << "\" width=\"18\" "
         "height=\""
      << fmt(plot) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  out << "<text x=\"" << fmt(bar_x + 24.0) << "\" y=\"" << fmt(top + plot)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">"
      << fmt(vmin) << "</text>\n";
  out << "<text x=\"" << fmt(bar_x + 24.0) << "\" y=\"" << fmt(top + 12.0)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">"
      << fmt(vmax) << "</text>\n";
  out << "</svg>\n";
}

}  // namespace metacure::cli
