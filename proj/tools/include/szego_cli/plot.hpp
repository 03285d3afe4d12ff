#pragma once

// Plot data: two-column .dat files and small self-contained SVG line plots.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace szego::cli {

/// Shortest round-trip decimal form; the same double always prints the same.
std::string format_double(double v);

void write_dat(const std::filesystem::path& path, const std::string& x_name, const std::string& y_name,
               std::span<const double> x, std::span<const double> y);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  bool log_y = false;
};

void write_svg(const std::filesystem::path& path, const PlotSpec& spec, std::span<const Series> series);

}  // namespace szego::cli
