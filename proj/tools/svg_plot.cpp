#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace wortsense::cli {

namespace {

constexpr double kWidth = 960.0;
constexpr double kPanelHeight = 220.0;
constexpr double kTop = 40.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kGap = 40.0;
constexpr std::size_t kMaxPoints = 2000;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-9) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

}  // namespace

std::string render_panels_svg(const std::string& title, const std::vector<PlotPanel>& panels) {
  const double height =
      kTop + static_cast<double>(panels.size()) * (kPanelHeight + kGap) + 10.0;
  const double plot_w = kWidth - kLeft - kRight;

  Range xr;
  for (const auto& p : panels)
    for (const auto& s : p.series)
      for (double x : s.x) xr.add(x);
  if (!std::isfinite(xr.lo)) {
    xr.lo = 0.0;
    xr.hi = 1.0;
  }
  if (xr.hi - xr.lo < 1e-9) xr.hi = xr.lo + 1.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(height)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";

  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const auto& panel = panels[pi];
    const double top = kTop + static_cast<double>(pi) * (kPanelHeight + kGap);
    Range yr;
    for (const auto& s : panel.series)
      for (double y : s.y) yr.add(y);
    for (const auto& r : panel.references) yr.add(r.y);
    yr.settle();

    auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto py = [&](double y) { return top + kPanelHeight - (y - yr.lo) / (yr.hi - yr.lo) * kPanelHeight; };

    svg << "<g class=\"panel\" id=\"panel-" << pi + 1 << "\">\n";
    svg << "<text x=\"" << num(kLeft) << "\" y=\"" << num(top - 6) << "\" font-size=\"13\">"
        << escape(panel.title) << "</text>\n";
    svg << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(top) << "\" width=\"" << num(plot_w)
        << "\" height=\"" << num(kPanelHeight) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double yv = yr.lo + (yr.hi - yr.lo) * t / 4.0;
      const double xv = xr.lo + (xr.hi - xr.lo) * t / 4.0;
      svg << "<line x1=\"" << num(kLeft - 4) << "\" y1=\"" << num(py(yv)) << "\" x2=\""
          << num(kLeft) << "\" y2=\"" << num(py(yv)) << "\" stroke=\"#444\"/>"
          << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(yv) + 4)
          << "\" text-anchor=\"end\">" << tick(std::round(yv * 100) / 100) << "</text>\n";
      svg << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(top + kPanelHeight + 14)
          << "\" text-anchor=\"middle\">" << tick(std::round(xv)) << "</text>\n";
    }
    svg << "<text transform=\"translate(14," << num(top + kPanelHeight / 2)
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape(panel.y_label) << "</text>\n";

    for (const auto& r : panel.references) {
      svg << "<line class=\"" << escape(r.css_class) << "\" x1=\"" << num(kLeft) << "\" y1=\""
          << num(py(r.y)) << "\" x2=\"" << num(kLeft + plot_w) << "\" y2=\"" << num(py(r.y))
          << "\" stroke=\"" << r.color << "\"" << (r.dashed ? " stroke-dasharray=\"6 4\"" : "")
          << "><title>" << escape(r.label) << "</title></line>\n";
    }

    double legend_x = kLeft + 8;
    for (const auto& s : panel.series) {
      const std::size_t n = std::min(s.x.size(), s.y.size());
      const std::size_t stride = std::max<std::size_t>(1, (n + kMaxPoints - 1) / kMaxPoints);
      svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < n; i += stride) {
        if (!std::isfinite(s.y[i])) continue;
        svg << (first ? "" : " ") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
        first = false;
      }
      svg << "\"><title>" << escape(s.label) << "</title></polyline>\n";
      svg << "<rect x=\"" << num(legend_x) << "\" y=\"" << num(top + 8)
          << "\" width=\"10\" height=\"3\" fill=\"" << s.color << "\"/><text x=\""
          << num(legend_x + 14) << "\" y=\"" << num(top + 13) << "\">" << escape(s.label)
          << "</text>\n";
      legend_x += 24 + 6.5 * static_cast<double>(s.label.size());
    }
    svg << "</g>\n";
  }
  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(height - 4)
      << "\" text-anchor=\"middle\">Step (60 s)</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace wortsense::cli
