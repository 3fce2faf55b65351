#include "rve/plot.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "rve/telemetry.hpp"

namespace rve::plot {

namespace {

constexpr double kWidth = 800, kHeight = 400;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
constexpr std::string_view kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                         "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(std::span<const Series> series, const Axes& axes) {
  double x_max = 0;
  for (const auto& s : series)
    for (double x : s.x) x_max = std::max(x_max, x);
  if (x_max <= 0) x_max = 1;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + pw * x / x_max; };
  auto sy = [&](double y) { return kTop + ph * (1.0 - std::clamp(y, 0.0, 1.0)); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kWidth, kHeight);
  svg += fmt::format(
      "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
      kWidth / 2, escape(axes.title));
  svg += fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{1}\" stroke=\"black\"/>\n",
      kLeft, kTop + ph, kLeft + pw, kTop);
  for (int i = 0; i <= 5; ++i) {
    const double y = i / 5.0, x = x_max * i / 5.0;
    svg += fmt::format(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{:.1f}</text>\n", kLeft - 6,
        sy(y) + 4, y);
    svg += fmt::format(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\">{:.4g}</text>\n", sx(x),
        kTop + ph + 16, x);
  }
  svg += fmt::format(
      "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n", kLeft + pw / 2,
      kHeight - 10, escape(axes.x_label));
  svg += fmt::format(
      "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" font-size=\"13\" "
      "transform=\"rotate(-90 16 {0})\">{1}</text>\n",
      kTop + ph / 2, escape(axes.y_label));

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const auto color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k)
      pts += fmt::format("{:.2f},{:.2f} ", sx(s.x[k]), sy(s.y[k]));
    if (!pts.empty()) {
      pts.pop_back();
      svg += fmt::format(
          "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>\n", color, pts);
    }
    svg += fmt::format(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{}\">{}</text>\n", kLeft + 10,
        kTop + 14 + 14 * static_cast<double>(i), color, escape(s.label));
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> plot_csvs(std::span<const std::filesystem::path> csvs,
                                             const std::filesystem::path& out_dir) {
  std::vector<Series> cbr, per;
  for (const auto& path : csvs) {
    const auto data = telemetry::read_csv(path);
    Series c{path.stem().string(), {}, data.cbr}, p{path.stem().string(), {}, data.per};
    for (double t : data.t_ms) c.x.push_back(t / 1000.0);
    p.x = c.x;
    cbr.push_back(std::move(c));
    per.push_back(std::move(p));
  }
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::string& name, const std::vector<Series>& s, Axes axes) {
    const auto path = out_dir / name;
    std::ofstream out(path, std::ios::binary);
    out << render_svg(s, axes);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    written.push_back(path);
  };
  write("cbr.svg", cbr, {"Channel busy ratio", "time (s)", "CBR"});
  write("per.svg", per, {"Packet error rate", "time (s)", "PER"});
  return written;
}

}  // namespace rve::plot
