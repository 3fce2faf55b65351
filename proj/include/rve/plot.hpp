#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

/// Minimal SVG line charts for telemetry series.
namespace rve::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Axes {
  std::string title;
  std::string x_label = "time (s)";
  std::string y_label = "ratio";
};

/// One chart with every series overlaid. The y range is fixed to [0, 1];
/// an empty input still renders labeled axes.
std::string render_svg(std::span<const Series> series, const Axes& axes);

/// Reads telemetry CSVs and writes `cbr.svg` and `per.svg` into `out_dir`.
/// Series are labeled by file stem. Returns the two written paths.
std::vector<std::filesystem::path> plot_csvs(std::span<const std::filesystem::path> csvs,
                                             const std::filesystem::path& out_dir);

}  // namespace rve::plot
