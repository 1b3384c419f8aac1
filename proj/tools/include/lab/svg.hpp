#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lab {

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool dashed = false;
};

struct PlotSpec {
  std::string title, x_label, y_label;
  bool log_x = false;
  bool log_y = false;
};

// Minimal standalone SVG line chart; non-positive values are skipped on log axes.
void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace lab
