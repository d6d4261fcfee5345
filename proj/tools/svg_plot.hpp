#pragma once

#include <string>
#include <vector>

namespace wortsense::cli {

struct PlotSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

/// Horizontal reference line across a panel. `css_class` ends up on the
/// SVG element so the line can be located in the output.
struct ReferenceLine {
  std::string label;
  std::string color;
  std::string css_class;
  double y = 0.0;
  bool dashed = true;
};

struct PlotPanel {
  std::string title;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::vector<ReferenceLine> references;
};

/// Panels stacked vertically, sharing the step axis.
std::string render_panels_svg(const std::string& title, const std::vector<PlotPanel>& panels);

}  // namespace wortsense::cli
