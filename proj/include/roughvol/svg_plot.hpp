#pragma once

#include "roughvol/asymptotics.hpp"

#include <span>
#include <string>
#include <vector>

namespace roughvol {

struct ReferenceLine {
  double value = 0.0;
  std::string label;
};

struct PlotStyle {
  std::string title;
  std::string x_label = "T";
  std::string y_label;
  bool log_x = true;
  bool log_y = false;   // plots |value| when set
  bool error_bars = true;
  std::vector<ReferenceLine> references;
};

/// Self-contained SVG line plot: one polyline per series, one dashed line per
/// reference. Output depends only on the inputs.
std::string emit_plot(std::span<const TermSeries> series, const PlotStyle& style);

}  // namespace roughvol
