#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <regex>
#include <sstream>

#include "rve/geokit.hpp"

namespace rve::geo {

namespace {

struct SetDest {
  double t;
  double x, y, speed;
};

struct NodeScript {
  double x = 0, y = 0, z = 0;
  std::vector<SetDest> moves;
};

// Piecewise-constant-velocity leg starting at t0.
struct Leg {
  double t0;
  double x0, y0;
  double ve, vn;
  double speed;
  double heading;
  double t_arrive;
};

double parse_number(const std::string& s, std::size_t line) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ParseError(line, "invalid number '" + s + "'");
  return v;
}

std::uint32_t parse_index(const std::string& s, std::size_t line) {
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(line, "invalid node index '" + s + "'");
  return v;
}

std::vector<Leg> build_legs(const NodeScript& script) {
  std::vector<Leg> legs{{0.0, script.x, script.y, 0.0, 0.0, 0.0, 0.0, 0.0}};
  auto moves = script.moves;
  std::stable_sort(moves.begin(), moves.end(),
                   [](const SetDest& a, const SetDest& b) { return a.t < b.t; });
  for (const auto& m : moves) {
    const Leg& cur = legs.back();
    const double dt = std::min(m.t, cur.t_arrive) - cur.t0;
    const double x = cur.x0 + cur.ve * std::max(dt, 0.0);
    const double y = cur.y0 + cur.vn * std::max(dt, 0.0);
    const double de = m.x - x, dn = m.y - y;
    const double dist = std::hypot(de, dn);
    Leg next{m.t, x, y, 0.0, 0.0, 0.0, cur.heading, m.t};
    if (m.speed > 0 && dist > 0) {
      next.ve = de / dist * m.speed;
      next.vn = dn / dist * m.speed;
      next.speed = m.speed;
      next.heading = normalize_heading(std::atan2(de, dn) * 180.0 / std::numbers::pi);
      next.t_arrive = m.t + dist / m.speed;
    }
    legs.push_back(next);
  }
  return legs;
}

}  // namespace

MobilityTrace parse_ns2_trace(std::istream& in, const Ns2Options& opts) {
  static const std::regex set_re(R"(^\s*\$node_\((\d+)\)\s+set\s+([XYZ])_\s+(\S+)\s*$)");
  static const std::regex dest_re(
      R"(^\s*\$ns_\s+at\s+(\S+)\s+"\s*\$node_\((\d+)\)\s+setdest\s+(\S+)\s+(\S+)\s+(\S+)\s*"\s*$)");

  if (!(opts.period > 0)) throw std::invalid_argument("sampling period must be positive");

  std::map<std::uint32_t, NodeScript> nodes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    std::smatch m;
    if (std::regex_match(line, m, set_re)) {
      auto& node = nodes[parse_index(m[1], lineno)];
      const double v = parse_number(m[3], lineno);
      switch (m.str(2)[0]) {
        case 'X': node.x = v; break;
        case 'Y': node.y = v; break;
        default: node.z = v; break;
      }
    } else if (std::regex_match(line, m, dest_re)) {
      const double t = parse_number(m[1], lineno);
      const auto id = parse_index(m[2], lineno);
      auto it = nodes.find(id);
      if (it == nodes.end())
        throw ParseError(lineno, "unknown node index " + std::to_string(id));
      const double speed = parse_number(m[5], lineno);
      if (t < 0 || speed < 0) throw ParseError(lineno, "negative time or speed");
      it->second.moves.push_back({t, parse_number(m[3], lineno), parse_number(m[4], lineno), speed});
    } else {
      throw ParseError(lineno, "unsupported statement: " + line);
    }
  }

  MobilityTrace trace;
  if (nodes.empty()) return trace;

  std::map<std::uint32_t, std::vector<Leg>> legs;
  double horizon = 0.0;
  for (const auto& [id, script] : nodes) {
    auto l = build_legs(script);
    for (const auto& leg : l) horizon = std::max({horizon, leg.t0, leg.t_arrive});
    legs.emplace(id, std::move(l));
  }
  trace.duration = opts.duration.value_or(horizon);

  const auto samples = static_cast<std::size_t>(std::floor(trace.duration / opts.period + 1e-9)) + 1;
  for (const auto& [id, path] : legs) {
    NodeTrack track{id, {}};
    track.records.reserve(samples);
    const double z = nodes.at(id).z;
    std::size_t li = 0;
    for (std::size_t k = 0; k < samples; ++k) {
      const double t = static_cast<double>(k) * opts.period;
      while (li + 1 < path.size() && path[li + 1].t0 <= t) ++li;
      const Leg& leg = path[li];
      const double dt = std::min(t, leg.t_arrive) - leg.t0;
      const EnuCoord local{leg.x0 + leg.ve * dt, leg.y0 + leg.vn * dt, z};
      BsmRecord r;
      r.node_id = id;
      r.t = t;
      r.pos = enu_to_geodetic(local, opts.ref);
      r.speed = t < leg.t_arrive ? leg.speed : 0.0;
      r.heading = leg.heading;
      track.records.push_back(r);
    }
    trace.nodes.push_back(std::move(track));
  }
  return trace;
}

MobilityTrace parse_ns2_trace(const std::string& text, const Ns2Options& opts) {
  std::istringstream in(text);
  return parse_ns2_trace(in, opts);
}

}  // namespace rve::geo
