#pragma once

#include <string>
#include <vector>

namespace srd {

struct PlotSeries {
  std::string label;
  std::string color;  // any SVG color, e.g. "#d62728"
  std::vector<double> x;
  std::vector<double> y;
  bool step = false;    // draw as a right-continuous staircase
  bool dashed = false;
};

struct PlotPanel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

// Self-contained SVG with the panels side by side, each with axes, ticks
// and a legend.
std::string render_svg(const std::vector<PlotPanel>& panels, int panel_width = 480, int panel_height = 360);

}  // namespace srd
