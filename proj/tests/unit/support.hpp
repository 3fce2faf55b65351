#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>

#include "rve/geokit.hpp"

namespace test {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("rve_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

/// Largest ECEF distance between any two nodes at sample index k.
inline double max_pairwise_distance(const rve::geo::MobilityTrace& trace, std::size_t k) {
  std::vector<rve::geo::EcefCoord> pts;
  for (const auto& n : trace.nodes) pts.push_back(rve::geo::geodetic_to_ecef(n.records.at(k).pos));
  double worst = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      worst = std::max(worst, rve::geo::distance(pts[i], pts[j]));
  return worst;
}

/// Stationary nodes 0..n-1, each with a single row at the given start
/// time (seconds), placed `spacing` meters apart along the east axis.
inline rve::geo::MobilityTrace static_trace(const std::vector<double>& starts, double spacing = 2.0) {
  rve::geo::MobilityTrace t;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    rve::geo::BsmRecord r;
    r.node_id = static_cast<std::uint32_t>(i);
    r.t = starts[i];
    r.pos = rve::geo::enu_to_geodetic({spacing * static_cast<double>(i), 0, 0},
                                      rve::geo::kDefaultReference);
    t.nodes.push_back({r.node_id, {r}});
  }
  t.duration = 1.0;
  return t;
}

/// The square grid used by the channel-load scenarios.
inline rve::geo::MobilityTrace load_grid(std::size_t n) {
  rve::geo::GridOptions g;
  g.n = n;
  g.spacing = 5;
  g.side = 160;
  return rve::geo::generate_grid_mobility(g);
}

}  // namespace test
