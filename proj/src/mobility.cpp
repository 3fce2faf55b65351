#include <cmath>
#include <numbers>

#include "rve/geokit.hpp"
#include "rve/rng.hpp"

namespace rve::geo {

namespace {

std::size_t sample_count(double duration, double period) {
  if (!(period > 0)) throw std::invalid_argument("sampling period must be positive");
  if (!(duration >= 0)) throw std::invalid_argument("duration must be non-negative");
  return static_cast<std::size_t>(std::floor(duration / period + 1e-9)) + 1;
}

// Folds a coordinate back into [-bound, bound], flipping the velocity
// component once per wall hit.
void reflect(double& x, double& v, double bound) {
  if (bound <= 0) {
    x = 0;
    return;
  }
  while (x > bound || x < -bound) {
    x = x > bound ? 2 * bound - x : -2 * bound - x;
    v = -v;
  }
}

}  // namespace

GridLayout grid_layout(const GridOptions& opts) {
  if (opts.n < 1) throw std::invalid_argument("grid needs at least one node");
  if (!(opts.spacing > 0)) throw std::invalid_argument("grid spacing must be positive");
  GridLayout g;
  g.row_length = opts.row_length.value_or(
      static_cast<std::size_t>(std::floor(opts.side / opts.spacing + 1e-9)) + 1);
  if (g.row_length == 0) throw std::invalid_argument("grid row length must be positive");
  g.rows = (opts.n + g.row_length - 1) / g.row_length;
  g.width = static_cast<double>(g.row_length) * opts.spacing;
  g.height = static_cast<double>(g.rows) * opts.spacing;
  const double span_x = static_cast<double>(std::min(opts.n, g.row_length) - 1) * opts.spacing;
  const double span_y = static_cast<double>(g.rows - 1) * opts.spacing;
  g.diagonal = std::hypot(span_x, span_y);
  return g;
}

EnuCoord grid_position(const GridOptions& opts, std::size_t index) {
  const auto layout = grid_layout(opts);
  return {static_cast<double>(index % layout.row_length) * opts.spacing,
          static_cast<double>(index / layout.row_length) * opts.spacing, 0.0};
}

MobilityTrace generate_grid_mobility(const GridOptions& opts) {
  const auto layout = grid_layout(opts);
  const auto samples = sample_count(opts.duration, opts.period);
  const double h = opts.heading * std::numbers::pi / 180.0;
  const double ve = opts.speed * std::sin(h), vn = opts.speed * std::cos(h);

  MobilityTrace trace;
  trace.duration = opts.duration;
  trace.nodes.reserve(opts.n);
  for (std::size_t i = 0; i < opts.n; ++i) {
    const EnuCoord start{static_cast<double>(i % layout.row_length) * opts.spacing,
                         static_cast<double>(i / layout.row_length) * opts.spacing, 0.0};
    NodeTrack track{static_cast<std::uint32_t>(i), {}};
    track.records.reserve(samples);
    for (std::size_t k = 0; k < samples; ++k) {
      const double t = static_cast<double>(k) * opts.period;
      const EnuCoord p{start.e + ve * t, start.n + vn * t, start.u};
      track.records.push_back({track.node_id, t, enu_to_geodetic(p, opts.ref), opts.speed,
                               normalize_heading(opts.heading)});
    }
    trace.nodes.push_back(std::move(track));
  }
  return trace;
}

std::vector<std::vector<LocalRecord>> disc_local_paths(const DiscOptions& opts) {
  if (opts.n < 1) throw std::invalid_argument("disc needs at least one node");
  if (!(opts.radius >= 0)) throw std::invalid_argument("disc radius must be non-negative");
  if (!(opts.change_period > 0)) throw std::invalid_argument("change period must be positive");
  const auto [vmin, vmax] = opts.speed_range;
  if (!(vmin >= 0 && vmax >= vmin)) throw std::invalid_argument("invalid speed range");
  const auto samples = sample_count(opts.duration, opts.period);
  const double bound = opts.radius;

  Rng rng(opts.seed);
  std::vector<std::vector<LocalRecord>> paths(opts.n);
  for (std::size_t i = 0; i < opts.n; ++i) {
    const double r = opts.radius * std::sqrt(rng.unit());
    const double th = 2 * std::numbers::pi * rng.unit();
    double x = r * std::cos(th), y = r * std::sin(th);
    double vx = 0, vy = 0, speed = 0, heading = 0;
    double next_change = 0.0;
    double t = 0.0;

    auto redraw = [&] {
      const double dir = 2 * std::numbers::pi * rng.unit();
      speed = rng.uniform_real(vmin, vmax);
      vx = speed * std::sin(dir);
      vy = speed * std::cos(dir);
      next_change += opts.change_period;
    };
    auto advance_to = [&](double target) {
      while (t < target) {
        if (t >= next_change) redraw();
        const double step = std::min(target, next_change) - t;
        x += vx * step;
        y += vy * step;
        reflect(x, vx, bound);
        reflect(y, vy, bound);
        t += step;
      }
    };

    auto& path = paths[i];
    path.reserve(samples);
    redraw();
    for (std::size_t k = 0; k < samples; ++k) {
      const double ts = static_cast<double>(k) * opts.period;
      advance_to(ts);
      if (speed > 0) heading = normalize_heading(std::atan2(vx, vy) * 180.0 / std::numbers::pi);
      path.push_back({static_cast<std::uint32_t>(i), ts, {x, y, 0.0}, speed, heading});
    }
  }
  return paths;
}

MobilityTrace generate_disc_mobility(const DiscOptions& opts) {
  MobilityTrace trace;
  trace.duration = opts.duration;
  for (const auto& path : disc_local_paths(opts)) {
    NodeTrack track{path.front().node_id, {}};
    track.records.reserve(path.size());
    for (const auto& row : path) track.records.push_back(to_geodetic(row, opts.ref));
    trace.nodes.push_back(std::move(track));
  }
  return trace;
}

}  // namespace rve::geo
