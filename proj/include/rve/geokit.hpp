#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

/// Coordinate conversions and mobility-trace production.
namespace rve::geo {

// WGS-84
inline constexpr double kSemiMajor = 6378137.0;
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kSemiMinor = kSemiMajor * (1.0 - kFlattening);
inline constexpr double kEccSq = kFlattening * (2.0 - kFlattening);

/// Latitude/longitude in degrees, height in meters above the ellipsoid.
struct GeodeticCoord {
  double lat = 0.0;
  double lon = 0.0;
  double height = 0.0;

  bool operator==(const GeodeticCoord&) const = default;
};

struct EcefCoord {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const EcefCoord&) const = default;
};

/// Local East-North-Up offset in meters from a reference geodetic point.
struct EnuCoord {
  double e = 0.0;
  double n = 0.0;
  double u = 0.0;

  bool operator==(const EnuCoord&) const = default;
};

/// Default local-frame origin used by the generators and as the receiver
/// model's observer position.
inline constexpr GeodeticCoord kDefaultReference{28.6, -81.2, 30.0};

/// Wraps longitude into (-180, 180].
double normalize_lon(double lon_deg);
/// Wraps heading into [0, 360).
double normalize_heading(double heading_deg);

/// Validates latitude bounds and finiteness, normalizes longitude.
/// Throws std::invalid_argument on bad input.
GeodeticCoord make_geodetic(double lat, double lon, double height);

EcefCoord geodetic_to_ecef(const GeodeticCoord& g);

/// Rotation taking ENU components to ECEF components at `ref`. Columns are
/// the east, north and up unit vectors expressed in ECEF.
using Matrix3 = std::array<std::array<double, 3>, 3>;
Matrix3 enu_rotation(const GeodeticCoord& ref);

EcefCoord enu_to_ecef(const EnuCoord& p, const GeodeticCoord& ref);
EnuCoord ecef_to_enu(const EcefCoord& p, const GeodeticCoord& ref);

/// Closed-form (Ferrari) solution followed by one Newton step on latitude.
/// Longitude is reported as 0 on the polar axis. Throws
/// std::invalid_argument at the Earth's center.
GeodeticCoord ecef_to_geodetic(const EcefCoord& p);

GeodeticCoord enu_to_geodetic(const EnuCoord& p, const GeodeticCoord& ref);
EnuCoord geodetic_to_enu(const GeodeticCoord& g, const GeodeticCoord& ref);

double distance(const EcefCoord& a, const EcefCoord& b);

// ---------------------------------------------------------------------------
// Mobility traces

/// One vehicle-state row.
struct BsmRecord {
  std::uint32_t node_id = 0;
  double t = 0.0;  // seconds since scenario start
  GeodeticCoord pos;
  double speed = 0.0;    // m/s
  double heading = 0.0;  // degrees clockwise from north, [0, 360)

  bool operator==(const BsmRecord&) const = default;
};

struct NodeTrack {
  std::uint32_t node_id = 0;
  std::vector<BsmRecord> records;  // strictly increasing t
};

/// Per-node time-ordered tracks, sorted by node id.
struct MobilityTrace {
  std::vector<NodeTrack> nodes;
  double duration = 0.0;

  std::size_t record_count() const;
  /// All rows, sorted by (t, node_id).
  std::vector<BsmRecord> merged() const;
};

/// Checks the per-node ordering and id-uniqueness invariants.
void validate(const MobilityTrace& trace);

/// Groups rows by node id (order within a node preserved).
MobilityTrace group_by_node(std::vector<BsmRecord> rows);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Ns2Options {
  double period = 0.1;  // sampling period, s
  GeodeticCoord ref = kDefaultReference;
  std::optional<double> duration;  // default: last arrival/event time
};

/// Parses `$node_(i) set X_|Y_|Z_ v` and `$ns_ at t "$node_(i) setdest x y s"`
/// statements, then samples each node's piecewise-constant-velocity path at
/// `period`. Positions are local ENU around `ref`.
MobilityTrace parse_ns2_trace(std::istream& in, const Ns2Options& opts = {});
MobilityTrace parse_ns2_trace(const std::string& text, const Ns2Options& opts = {});

/// Header line of every per-node CSV.
inline constexpr const char* kTraceCsvHeader = "node_id,t,lat,lon,height,speed,heading";
/// Header of the local (ENU) CSV used by coordinate conversion.
inline constexpr const char* kLocalCsvHeader = "node_id,t,e,n,u,speed,heading";

void write_trace_csv(std::ostream& out, const std::vector<BsmRecord>& rows);
std::vector<BsmRecord> read_trace_csv(std::istream& in);

/// A row of a local-frame trace before geodetic conversion.
struct LocalRecord {
  std::uint32_t node_id = 0;
  double t = 0.0;
  EnuCoord pos;
  double speed = 0.0;
  double heading = 0.0;

  bool operator==(const LocalRecord&) const = default;
};
void write_local_csv(std::ostream& out, const std::vector<LocalRecord>& rows);
std::vector<LocalRecord> read_local_csv(std::istream& in);

BsmRecord to_geodetic(const LocalRecord& r, const GeodeticCoord& ref);
LocalRecord to_local(const BsmRecord& r, const GeodeticCoord& ref);

/// Writes `node_<id>.csv` per node into `dir` (created if missing).
/// Returns the written paths in node order. Throws std::runtime_error when a
/// file cannot be written.
std::vector<std::filesystem::path> split_per_node(const MobilityTrace& trace,
                                                  const std::filesystem::path& dir);

/// Loads every `node_<id>.csv` in `dir`.
MobilityTrace load_trace_dir(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Synthetic mobility

/// Row length the command-line and Python front ends use when neither a row
/// length nor a side is given; 500 nodes at 2 m then cover 60 x 34 m.
inline constexpr std::size_t kDefaultRowLength = 30;

struct GridOptions {
  std::size_t n = 1;
  double spacing = 2.0;  // m
  /// Nodes per row. When unset, derived from `side` as floor(side/spacing)+1.
  std::optional<std::size_t> row_length;
  double side = 60.0;
  double speed = 0.0;     // m/s, common to all nodes
  double heading = 90.0;  // degrees, common to all nodes
  double duration = 40.0;
  double period = 0.2;
  GeodeticCoord ref = kDefaultReference;
};

struct GridLayout {
  std::size_t row_length = 0;
  std::size_t rows = 0;
  /// Cell footprint: row_length*spacing by rows*spacing.
  double width = 0.0;
  double height = 0.0;
  /// Diagonal of the occupied positions' bounding box; bounds every
  /// pairwise distance.
  double diagonal = 0.0;
};

GridLayout grid_layout(const GridOptions& opts);
/// Start position of node `index` in the local frame (row-major).
EnuCoord grid_position(const GridOptions& opts, std::size_t index);
MobilityTrace generate_grid_mobility(const GridOptions& opts);

struct DiscOptions {
  std::size_t n = 1;
  double radius = 150.0;
  std::pair<double, double> speed_range{0.0, 20.0};
  double change_period = 1.0;
  double duration = 40.0;
  double period = 0.2;
  std::uint64_t seed = 1;
  GeodeticCoord ref = kDefaultReference;
};

/// Local-frame positions sampled every `period`, per node. Exposed so
/// callers can check the bounding-square invariant without a geodetic
/// round trip.
std::vector<std::vector<LocalRecord>> disc_local_paths(const DiscOptions& opts);
MobilityTrace generate_disc_mobility(const DiscOptions& opts);

}  // namespace rve::geo
