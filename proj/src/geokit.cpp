#include "rve/geokit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

namespace rve::geo {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double sq(double x) { return x * x; }

}  // namespace

double normalize_lon(double lon) {
  double r = std::fmod(lon, 360.0);
  if (r <= -180.0) r += 360.0;
  if (r > 180.0) r -= 360.0;
  return r;
}

double normalize_heading(double heading) {
  double r = std::fmod(heading, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r;
}

GeodeticCoord make_geodetic(double lat, double lon, double height) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || !std::isfinite(height))
    throw std::invalid_argument("geodetic coordinate must be finite");
  if (lat < -90.0 || lat > 90.0)
    throw std::invalid_argument(fmt::format("latitude {} outside [-90, 90]", lat));
  return {lat, normalize_lon(lon), height};
}

EcefCoord geodetic_to_ecef(const GeodeticCoord& g) {
  const double phi = g.lat * kDeg;
  const double lam = g.lon * kDeg;
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double n = kSemiMajor / std::sqrt(1.0 - kEccSq * sp * sp);
  return {(n + g.height) * cp * std::cos(lam),
          (n + g.height) * cp * std::sin(lam),
          (n * (1.0 - kEccSq) + g.height) * sp};
}

Matrix3 enu_rotation(const GeodeticCoord& ref) {
  const double phi = ref.lat * kDeg;
  const double lam = ref.lon * kDeg;
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double sl = std::sin(lam), cl = std::cos(lam);
  return {{{-sl, -sp * cl, cp * cl},
           {cl, -sp * sl, cp * sl},
           {0.0, cp, sp}}};
}

EcefCoord enu_to_ecef(const EnuCoord& p, const GeodeticCoord& ref) {
  const Matrix3 r = enu_rotation(ref);
  const EcefCoord o = geodetic_to_ecef(ref);
  return {r[0][0] * p.e + r[0][1] * p.n + r[0][2] * p.u + o.x,
          r[1][0] * p.e + r[1][1] * p.n + r[1][2] * p.u + o.y,
          r[2][0] * p.e + r[2][1] * p.n + r[2][2] * p.u + o.z};
}

EnuCoord ecef_to_enu(const EcefCoord& p, const GeodeticCoord& ref) {
  const Matrix3 r = enu_rotation(ref);
  const EcefCoord o = geodetic_to_ecef(ref);
  const double dx = p.x - o.x, dy = p.y - o.y, dz = p.z - o.z;
  // Transpose of the ENU->ECEF rotation.
  return {r[0][0] * dx + r[1][0] * dy + r[2][0] * dz,
          r[0][1] * dx + r[1][1] * dy + r[2][1] * dz,
          r[0][2] * dx + r[1][2] * dy + r[2][2] * dz};
}

GeodeticCoord ecef_to_geodetic(const EcefCoord& pt) {
  const double x = pt.x, y = pt.y, z = pt.z;
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
    throw std::invalid_argument("ECEF coordinate must be finite");
  const double p = std::hypot(x, y);
  if (p == 0.0 && z == 0.0)
    throw std::invalid_argument("ECEF origin has no geodetic position");

  const double a = kSemiMajor, b = kSemiMinor, e2 = kEccSq;
  const double lon = p < 1e-9 ? 0.0 : std::atan2(y, x) / kDeg;

  if (p < 1e-9) {
    const double lat = z > 0 ? 90.0 : -90.0;
    return {lat, 0.0, std::abs(z) - b};
  }

  // Ferrari's solution of the quartic in closed form.
  const double ep2 = (a * a - b * b) / (b * b);
  const double f = 54.0 * b * b * z * z;
  const double g = p * p + (1.0 - e2) * z * z - e2 * (a * a - b * b);
  const double c = e2 * e2 * f * p * p / (g * g * g);
  const double s = std::cbrt(1.0 + c + std::sqrt(c * c + 2.0 * c));
  const double k = s + 1.0 + 1.0 / s;
  const double pp = f / (3.0 * k * k * g * g);
  const double q = std::sqrt(1.0 + 2.0 * e2 * e2 * pp);
  const double r0 = -(pp * e2 * p) / (1.0 + q) +
                    std::sqrt(std::max(0.0, 0.5 * a * a * (1.0 + 1.0 / q) -
                                                pp * (1.0 - e2) * z * z / (q * (1.0 + q)) -
                                                0.5 * pp * p * p));
  const double v = std::sqrt(sq(p - e2 * r0) + (1.0 - e2) * z * z);
  const double z0 = b * b * z / (a * v);
  double phi = std::atan2(z + ep2 * z0, p);

  // One Newton step on f(phi) = p sin(phi) - z cos(phi) - e2 N(phi) sin(phi) cos(phi).
  {
    const double sp = std::sin(phi), cp = std::cos(phi);
    const double w2 = 1.0 - e2 * sp * sp;
    const double w = std::sqrt(w2);
    const double fv = p * sp - z * cp - e2 * a * sp * cp / w;
    const double dfv = p * cp + z * sp -
                       e2 * a * ((cp * cp - sp * sp) / w + e2 * sq(sp * cp) / (w2 * w));
    if (dfv != 0.0) phi -= fv / dfv;
  }

  const double sp = std::sin(phi), cp = std::cos(phi);
  const double h = p * cp + z * sp - a * std::sqrt(1.0 - e2 * sp * sp);
  return {phi / kDeg, normalize_lon(lon), h};
}

GeodeticCoord enu_to_geodetic(const EnuCoord& p, const GeodeticCoord& ref) {
  return ecef_to_geodetic(enu_to_ecef(p, ref));
}

EnuCoord geodetic_to_enu(const GeodeticCoord& g, const GeodeticCoord& ref) {
  return ecef_to_enu(geodetic_to_ecef(g), ref);
}

double distance(const EcefCoord& a, const EcefCoord& b) {
  return std::sqrt(sq(a.x - b.x) + sq(a.y - b.y) + sq(a.z - b.z));
}

// ---------------------------------------------------------------------------

std::size_t MobilityTrace::record_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes) n += node.records.size();
  return n;
}

std::vector<BsmRecord> MobilityTrace::merged() const {
  std::vector<BsmRecord> rows;
  rows.reserve(record_count());
  for (const auto& node : nodes) rows.insert(rows.end(), node.records.begin(), node.records.end());
  std::stable_sort(rows.begin(), rows.end(), [](const BsmRecord& a, const BsmRecord& b) {
    return a.t != b.t ? a.t < b.t : a.node_id < b.node_id;
  });
  return rows;
}

void validate(const MobilityTrace& trace) {
  std::set<std::uint32_t> ids;
  for (const auto& node : trace.nodes) {
    if (!ids.insert(node.node_id).second)
      throw std::invalid_argument(fmt::format("duplicate node id {}", node.node_id));
    for (std::size_t i = 0; i < node.records.size(); ++i) {
      const auto& r = node.records[i];
      if (r.node_id != node.node_id)
        throw std::invalid_argument(fmt::format("row for node {} in track {}", r.node_id, node.node_id));
      if (!std::isfinite(r.t) || !std::isfinite(r.speed) || !std::isfinite(r.heading))
        throw std::invalid_argument(fmt::format("non-finite field in node {}", node.node_id));
      if (i > 0 && !(node.records[i - 1].t < r.t))
        throw std::invalid_argument(
            fmt::format("node {} rows not strictly increasing at t={}", node.node_id, r.t));
    }
  }
}

MobilityTrace group_by_node(std::vector<BsmRecord> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const BsmRecord& a, const BsmRecord& b) { return a.node_id < b.node_id; });
  MobilityTrace trace;
  for (auto& r : rows) {
    if (trace.nodes.empty() || trace.nodes.back().node_id != r.node_id)
      trace.nodes.push_back({r.node_id, {}});
    trace.duration = std::max(trace.duration, r.t);
    trace.nodes.back().records.push_back(r);
  }
  for (auto& node : trace.nodes)
    std::stable_sort(node.records.begin(), node.records.end(),
                     [](const BsmRecord& a, const BsmRecord& b) { return a.t < b.t; });
  return trace;
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", line, what)), line_(line) {}

}  // namespace rve::geo
