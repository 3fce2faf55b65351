#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rve/geokit.hpp"
#include "support.hpp"

using namespace rve::geo;

namespace {

// 50-digit evaluations of the WGS-84 forward formula and the ENU rotation.
constexpr EcefCoord kOrlando{857366.60153474620066, -5538251.3147683790959, 3035066.3458567418926};
constexpr EcefCoord kOrlandoEnu{857452.12094764636518, -5538150.0812857012825, 3035246.7293704068948};
constexpr GeodeticCoord kOrlandoRef{28.6, -81.2, 30.0};

double enu_dist(const EnuCoord& a, const EnuCoord& b) {
  return std::hypot(a.e - b.e, a.n - b.n, a.u - b.u);
}

}  // namespace

TEST_CASE("geodetic to ECEF anchors") {
  const auto eq = geodetic_to_ecef({0, 0, 0});
  CHECK(std::abs(eq.x - 6378137.0) <= 1e-6);
  CHECK(std::abs(eq.y) <= 1e-6);
  CHECK(std::abs(eq.z) <= 1e-6);

  const auto pole = geodetic_to_ecef({90, 0, 0});
  CHECK(std::abs(pole.x) <= 1e-6);
  CHECK(std::abs(pole.z - 6356752.3142451795) <= 1e-6);
}

TEST_CASE("geodetic to ECEF matches high-precision evaluation") {
  const auto p = geodetic_to_ecef(kOrlandoRef);
  CHECK(std::abs(p.x - kOrlando.x) <= 1e-6);
  CHECK(std::abs(p.y - kOrlando.y) <= 1e-6);
  CHECK(std::abs(p.z - kOrlando.z) <= 1e-6);
}

TEST_CASE("ENU to ECEF") {
  const auto origin = enu_to_ecef({0, 0, 0}, {0, 0, 0});
  CHECK(std::abs(origin.x - 6378137.0) <= 1e-6);
  const auto up = enu_to_ecef({0, 0, 1}, {0, 0, 0});
  CHECK(std::abs(up.x - 6378138.0) <= 1e-6);
  CHECK(std::abs(up.y) <= 1e-6);
  CHECK(std::abs(up.z) <= 1e-6);

  const auto p = enu_to_ecef({100, 200, 10}, kOrlandoRef);
  CHECK(std::abs(p.x - kOrlandoEnu.x) <= 1e-6);
  CHECK(std::abs(p.y - kOrlandoEnu.y) <= 1e-6);
  CHECK(std::abs(p.z - kOrlandoEnu.z) <= 1e-6);
}

TEST_CASE("ENU origin is exactly the reference point") {
  for (double lat : {-89.0, -45.5, 0.0, 28.6, 60.0, 89.0})
    for (double lon : {-179.0, -81.2, 0.0, 120.3})
      for (double h : {-100.0, 0.0, 30.0, 9000.0}) {
        const GeodeticCoord ref{lat, lon, h};
        CHECK(enu_to_ecef({0, 0, 0}, ref) == geodetic_to_ecef(ref));
      }
}

TEST_CASE("ENU rotation is orthonormal") {
  for (double lat = -89; lat <= 89; lat += 17.8)
    for (double lon = -179; lon <= 180; lon += 35.9) {
      const auto r = enu_rotation({lat, lon, 0});
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double dot = 0;
          for (int k = 0; k < 3; ++k) dot += r[k][i] * r[k][j];
          CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) <= 1e-12);
        }
    }
}

TEST_CASE("ECEF to geodetic anchors") {
  const auto eq = ecef_to_geodetic({6378137.0, 0, 0});
  CHECK(std::abs(eq.lat) <= 1e-12);
  CHECK(std::abs(eq.lon) <= 1e-12);
  CHECK(std::abs(eq.height) <= 1e-6);

  const auto pole = ecef_to_geodetic({0, 0, 6356752.3142451795});
  CHECK(std::abs(pole.lat - 90.0) <= 1e-12);
  CHECK(pole.lon == 0.0);
  CHECK(std::abs(pole.height) <= 1e-6);

  const auto south = ecef_to_geodetic({0, 0, -6356752.3142451795 - 50});
  CHECK(std::abs(south.lat + 90.0) <= 1e-12);
  CHECK(std::abs(south.height - 50) <= 1e-6);

  CHECK_THROWS_AS(ecef_to_geodetic({0, 0, 0}), std::invalid_argument);
}

TEST_CASE("geodetic round trip over a sampled grid") {
  double worst_deg = 0, worst_h = 0;
  for (double lat = -89; lat <= 89; lat += 0.73)
    for (double lon = -179.5; lon <= 180; lon += 7.7)
      for (double h : {-100.0, 0.0, 12.5, 500.0, 4321.0, 10000.0}) {
        const GeodeticCoord g{lat, lon, h};
        const auto back = ecef_to_geodetic(geodetic_to_ecef(g));
        worst_deg = std::max({worst_deg, std::abs(back.lat - lat), std::abs(back.lon - lon)});
        worst_h = std::max(worst_h, std::abs(back.height - h));
      }
  CHECK(worst_deg < 1e-6);
  CHECK(worst_h < 1e-3);
}

TEST_CASE("ENU to geodetic and back") {
  for (const EnuCoord p : {EnuCoord{0, 0, 0}, EnuCoord{100, 200, 10}, EnuCoord{-5000, 3000, -20}}) {
    const auto g = enu_to_geodetic(p, kOrlandoRef);
    CHECK(enu_dist(geodetic_to_enu(g, kOrlandoRef), p) < 1e-6);
  }
}

TEST_CASE("coordinate normalization and validation") {
  CHECK(normalize_lon(180.0) == 180.0);
  CHECK(normalize_lon(-180.0) == 180.0);
  CHECK(normalize_lon(190.0) == doctest::Approx(-170.0));
  CHECK(normalize_lon(540.0) == 180.0);
  CHECK(normalize_heading(-90.0) == 270.0);
  CHECK(normalize_heading(360.0) == 0.0);
  CHECK(make_geodetic(10, 370, 0).lon == doctest::Approx(10.0));
  CHECK_THROWS_AS(make_geodetic(90.5, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_geodetic(NAN, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_geodetic(0, 0, INFINITY), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// NS2

TEST_CASE("NS2: empty input gives an empty trace") {
  CHECK(parse_ns2_trace(std::string{}).nodes.empty());
  CHECK(parse_ns2_trace(std::string{"# comment only\n\n"}).nodes.empty());
}

TEST_CASE("NS2: two-node fixture follows constant-velocity kinematics") {
  const std::string text =
      "$node_(0) set X_ 0.0\n"
      "$node_(0) set Y_ 0.0\n"
      "$node_(0) set Z_ 0.0\n"
      "$node_(1) set X_ 10.0\n"
      "$node_(1) set Y_ 20.0\n"
      "$node_(1) set Z_ 0.0\n"
      "$ns_ at 0.0 \"$node_(0) setdest 30.0 40.0 5.0\"\n"
      "$ns_ at 0.5 \"$node_(1) setdest 10.0 0.0 4.0\"\n";
  Ns2Options opts;
  opts.period = 0.5;
  opts.duration = 2.0;
  const auto trace = parse_ns2_trace(text, opts);
  REQUIRE(trace.nodes.size() == 2);
  CHECK(trace.duration == 2.0);

  auto local = [&](std::size_t node, std::size_t k) {
    return to_local(trace.nodes[node].records.at(k), opts.ref).pos;
  };
  // Node 0 heads toward (30, 40) at 5 m/s: 3-4-5 direction.
  CHECK(enu_dist(local(0, 0), {0, 0, 0}) < 1e-6);
  CHECK(enu_dist(local(0, 2), {3, 4, 0}) < 1e-6);
  CHECK(enu_dist(local(0, 4), {6, 8, 0}) < 1e-6);
  CHECK(trace.nodes[0].records[2].speed == 5.0);
  CHECK(trace.nodes[0].records[2].heading == doctest::Approx(std::atan2(3.0, 4.0) * 180 / M_PI));

  // Node 1 holds until 0.5 s, then moves south at 4 m/s.
  CHECK(enu_dist(local(1, 0), {10, 20, 0}) < 1e-6);
  CHECK(enu_dist(local(1, 1), {10, 20, 0}) < 1e-6);
  CHECK(enu_dist(local(1, 2), {10, 18, 0}) < 1e-6);
  CHECK(trace.nodes[1].records[2].heading == doctest::Approx(180.0));
}

TEST_CASE("NS2: a node stops at its destination") {
  const std::string text =
      "$node_(3) set X_ 0\n$node_(3) set Y_ 0\n"
      "$ns_ at 0 \"$node_(3) setdest 2 0 1\"\n";
  Ns2Options opts;
  opts.period = 1.0;
  opts.duration = 4.0;
  const auto trace = parse_ns2_trace(text, opts);
  const auto& rows = trace.nodes.at(0).records;
  REQUIRE(rows.size() == 5);
  CHECK(trace.nodes[0].node_id == 3);
  CHECK(enu_dist(to_local(rows[4], opts.ref).pos, {2, 0, 0}) < 1e-6);
  CHECK(rows[4].speed == 0.0);
}

TEST_CASE("NS2: node count equals distinct indices") {
  std::string text;
  for (int i : {4, 1, 9, 1, 4})
    text += "$node_(" + std::to_string(i) + ") set X_ " + std::to_string(i) + "\n";
  CHECK(parse_ns2_trace(text).nodes.size() == 3);
}

TEST_CASE("NS2: malformed input reports the line") {
  const std::string bad = "$node_(0) set X_ 1\n$node_(0) set X_ abc\n";
  try {
    parse_ns2_trace(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  const std::string unknown = "$node_(0) set X_ 1\n\n$ns_ at 1 \"$node_(7) setdest 1 1 1\"\n";
  try {
    parse_ns2_trace(unknown);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_ns2_trace(std::string{"$ns_ at 1 \"$node_(0) arrive\"\n"}), ParseError);
}

// ---------------------------------------------------------------------------
// Trace files

TEST_CASE("trace CSV round trip is exact") {
  const auto trace = generate_disc_mobility({.n = 3, .duration = 1.0, .seed = 11});
  std::stringstream buf;
  write_trace_csv(buf, trace.merged());
  CHECK(buf.str().rfind(kTraceCsvHeader, 0) == 0);
  CHECK(read_trace_csv(buf) == trace.merged());
}

TEST_CASE("trace CSV errors carry line numbers") {
  std::istringstream in(std::string(kTraceCsvHeader) + "\n1,0,1,2,3,0,0\n1,0.2,1,2\n");
  try {
    read_trace_csv(in);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("split: one node gives one identical file") {
  test::TempDir dir;
  const auto trace = generate_grid_mobility({.n = 1, .duration = 1.0});
  const auto files = split_per_node(trace, dir.path());
  REQUIRE(files.size() == 1);
  CHECK(files[0].filename() == "node_0.csv");
  std::stringstream expect;
  write_trace_csv(expect, trace.nodes[0].records);
  CHECK(test::slurp(files[0]) == expect.str());
}

TEST_CASE("split: partition of an interleaved trace re-merges to the input") {
  test::TempDir dir;
  const auto trace = generate_disc_mobility({.n = 3, .duration = 2.0, .seed = 5});
  const auto files = split_per_node(trace, dir.path());
  CHECK(files.size() == 3);
  std::vector<BsmRecord> rows;
  for (const auto& f : files) {
    std::ifstream in(f);
    auto part = read_trace_csv(in);
    std::set<std::uint32_t> ids;
    for (const auto& r : part) ids.insert(r.node_id);
    CHECK(ids.size() == 1);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  CHECK(group_by_node(rows).merged() == trace.merged());
  CHECK(load_trace_dir(dir.path()).merged() == trace.merged());
}

TEST_CASE("split: 500-node NS2 scenario gives 500 files") {
  std::string text;
  for (int i = 0; i < 500; ++i) {
    text += "$node_(" + std::to_string(i) + ") set X_ " + std::to_string(i % 25 * 3) + "\n";
    text += "$node_(" + std::to_string(i) + ") set Y_ " + std::to_string(i / 25 * 3) + "\n";
    text += "$ns_ at " + std::to_string(i % 7) + ".0 \"$node_(" + std::to_string(i) +
            ") setdest 100 100 " + std::to_string(5 + i % 10) + "\"\n";
  }
  Ns2Options opts;
  opts.duration = 2.0;
  const auto trace = parse_ns2_trace(text, opts);
  test::TempDir dir;
  CHECK(split_per_node(trace, dir.path()).size() == 500);
  CHECK(load_trace_dir(dir.path()).merged() == trace.merged());
}

TEST_CASE("split: unwritable destination fails") {
  test::TempDir dir;
  const auto blocker = dir.path() / "file";
  std::ofstream(blocker) << "x";
  CHECK_THROWS(split_per_node(generate_grid_mobility({.n = 2}), blocker / "sub"));
}

TEST_CASE("trace validation") {
  MobilityTrace t;
  t.nodes.push_back({1, {{1, 0.0, {}, 0, 0}, {1, 0.0, {}, 0, 0}}});
  CHECK_THROWS_AS(validate(t), std::invalid_argument);
  t.nodes[0].records[1].t = 0.2;
  CHECK_NOTHROW(validate(t));
  t.nodes.push_back(t.nodes[0]);
  CHECK_THROWS_AS(validate(t), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Generators

TEST_CASE("grid: first row placement") {
  const GridOptions opts{.n = 4, .spacing = 2, .row_length = 30};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto p = grid_position(opts, i);
    CHECK(p.e == 2.0 * static_cast<double>(i));
    CHECK(p.n == 0.0);
  }
  const auto trace = generate_grid_mobility(opts);
  CHECK(enu_dist(to_local(trace.nodes[3].records[0], opts.ref).pos, {6, 0, 0}) < 1e-6);
}

TEST_CASE("grid: 500 nodes at 2 m form a 60 x 34 m footprint") {
  const GridOptions opts{.n = 500, .spacing = 2, .row_length = 30, .duration = 1.0};
  const auto layout = grid_layout(opts);
  CHECK(layout.row_length == 30);
  CHECK(layout.rows == 17);
  CHECK(layout.width == 60.0);
  CHECK(layout.height == 34.0);
  CHECK(layout.diagonal <= 68.0);
  CHECK(test::max_pairwise_distance(generate_grid_mobility(opts), 0) <= 68.0);
}

TEST_CASE("grid: row length derives from the side") {
  const GridOptions opts{.n = 100, .spacing = 5, .side = 160, .duration = 1.0};
  CHECK(grid_layout(opts).row_length == 33);
  CHECK(grid_layout({.n = 31, .spacing = 2, .side = 60}).rows == 1);
  CHECK(test::max_pairwise_distance(generate_grid_mobility(opts), 0) < 250.0);
}

TEST_CASE("grid: moving grid keeps its geometry") {
  const GridOptions opts{.n = 40, .spacing = 5, .side = 160, .speed = 15, .heading = 45,
                         .duration = 4.0, .period = 1.0};
  const auto trace = generate_grid_mobility(opts);
  const double diag = grid_layout(opts).diagonal;
  for (std::size_t k = 0; k < trace.nodes[0].records.size(); ++k)
    CHECK(test::max_pairwise_distance(trace, k) <= diag + 1e-6);
  const auto a = to_local(trace.nodes[0].records.front(), opts.ref).pos;
  const auto b = to_local(trace.nodes[0].records.back(), opts.ref).pos;
  CHECK(std::hypot(b.e - a.e, b.n - a.n) == doctest::Approx(60.0).epsilon(1e-6));
}

TEST_CASE("disc: zero radius starts at the center") {
  const auto paths = disc_local_paths({.n = 1, .radius = 0, .duration = 1});
  CHECK(paths.at(0).at(0).pos.e == 0.0);
  CHECK(paths.at(0).at(0).pos.n == 0.0);
}

TEST_CASE("disc: starts within 300 m and paths stay inside the square") {
  const DiscOptions opts{.n = 60, .radius = 150, .duration = 20, .seed = 3};
  const auto trace = generate_disc_mobility(opts);
  CHECK(test::max_pairwise_distance(trace, 0) <= 300.0);
  for (const auto& path : disc_local_paths(opts))
    for (const auto& r : path) {
      CHECK(std::abs(r.pos.e) <= 150.0 + 1e-9);
      CHECK(std::abs(r.pos.n) <= 150.0 + 1e-9);
    }
}

TEST_CASE("disc: fixed seed is bit-identical") {
  const DiscOptions opts{.n = 20, .radius = 150, .duration = 5, .seed = 7};
  CHECK(generate_disc_mobility(opts).merged() == generate_disc_mobility(opts).merged());
  auto other = opts;
  other.seed = 8;
  CHECK_FALSE(generate_disc_mobility(opts).merged() == generate_disc_mobility(other).merged());
}
