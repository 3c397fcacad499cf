#ifndef CSLAB_SVG_HPP
#define CSLAB_SVG_HPP

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace cslab {

// Two-column whitespace table, directly loadable by `gnuplot> plot 'f.dat'`.
inline void write_dat(const std::string& path,
                      const std::vector<std::pair<double, double>>& points) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  os << std::setprecision(17);
  for (const auto& [x, y] : points) os << x << " " << y << "\n";
}

// Minimal self-contained SVG line plot: axes, tick labels at the extremes,
// one polyline. Enough to eyeball a transition curve without extra tooling.
inline void write_svg_line_plot(
    const std::string& path,
    const std::vector<std::pair<double, double>>& points,
    const std::string& xlabel, const std::string& ylabel) {
  const double w = 640, h = 480, ml = 70, mr = 20, mt = 20, mb = 50;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!points.empty()) {
    xmin = xmax = points[0].first;
    ymin = ymax = points[0].second;
    for (const auto& [x, y] : points) {
      xmin = std::min(xmin, x); xmax = std::max(xmax, x);
      ymin = std::min(ymin, y); ymax = std::max(ymax, y);
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

  std::ostringstream svg;
  svg << std::setprecision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  svg << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr
      << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 10
      << "\" text-anchor=\"middle\" font-size=\"14\">" << xlabel << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (mt + h - mb) / 2
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
      << (mt + h - mb) / 2 << ")\">" << ylabel << "</text>\n";
  svg << "<text x=\"" << ml << "\" y=\"" << h - mb + 18
      << "\" text-anchor=\"middle\" font-size=\"12\">" << xmin << "</text>\n";
  svg << "<text x=\"" << w - mr << "\" y=\"" << h - mb + 18
      << "\" text-anchor=\"middle\" font-size=\"12\">" << xmax << "</text>\n";
  svg << "<text x=\"" << ml - 8 << "\" y=\"" << h - mb + 4
      << "\" text-anchor=\"end\" font-size=\"12\">" << ymin << "</text>\n";
  svg << "<text x=\"" << ml - 8 << "\" y=\"" << mt + 4
      << "\" text-anchor=\"end\" font-size=\"12\">" << ymax << "</text>\n";
  if (!points.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : points) svg << px(x) << "," << py(y) << " ";
    svg << "\"/>\n";
    for (const auto& [x, y] : points)
      svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y)
          << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  }
  svg << "</svg>\n";

  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  os << svg.str();
}

} // namespace cslab

#endif
