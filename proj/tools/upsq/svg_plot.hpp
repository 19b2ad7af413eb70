#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace upsq::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f4e9c";
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  double width = 720.0;
  double height = 440.0;
};

/// Line plot with axes, ticks and a legend. Non-finite points break the line.
void write_svg(std::ostream& out, const PlotSpec& spec, const std::vector<Series>& series);

/// Tick positions covering [lo, hi] at a 1/2/5 step.
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace upsq::cli
