#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cogrelay {

struct ChartSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // sorted by x
  bool dashed = false;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ChartSeries> series;
  int width = 760;
  int height = 500;
};

// Self-contained SVG line chart: axes, ticks, legend, one polyline with
// point markers per series. Deterministic output for identical input.
std::string render_line_chart(const ChartSpec& spec);

}  // namespace cogrelay
