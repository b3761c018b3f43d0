#pragma once

#include <string>
#include <vector>

#include "dflow/pwl.hpp"

namespace dflow {

struct Series {
  std::string name;
  std::vector<Point> points;
  bool steps = false;  // draw as a staircase
};

/// Self-contained SVG line plot with axes, tick labels and a legend.
std::string line_plot(const std::vector<Series>& series, const std::string& title,
                      const std::string& x_label, const std::string& y_label);

}  // namespace dflow
