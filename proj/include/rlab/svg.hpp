#pragma once

// Deterministic line charts as SVG text.

#include <string>
#include <vector>

#include "rlab/sweep.hpp"

namespace rlab {

struct SeriesPoint {
  double x = 0.0;
  double y = 0.0;
  double err = 0.0;  // half-width of the error bar, 0 for none
};

struct Series {
  std::string name;
  std::vector<SeriesPoint> points;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// 800 x 600 chart with axes, ticks, a legend, polylines and markers.
std::string line_chart(const ChartSpec& spec, const std::vector<Series>& series);

struct Figure {
  std::string file_name;
  std::string svg;
};

/// All figure analogues for a set of sweep rows: stability vs width per
/// depth (one per scheme), stability vs width per scheme (one per depth),
/// kappa vs epoch and kappa vs width.
std::vector<Figure> sweep_figures(const std::vector<SweepRow>& rows);

}  // namespace rlab
