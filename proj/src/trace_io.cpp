#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <string_view>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rve/geokit.hpp"

namespace rve::geo {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double field_double(std::string_view s, std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(line, fmt::format("invalid number '{}'", s));
  return v;
}

std::uint32_t field_id(std::string_view s, std::size_t line) {
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(line, fmt::format("invalid node id '{}'", s));
  return v;
}

// Calls `row(fields, lineno)` for each data line; skips the header and blanks.
template <typename F>
void for_each_row(std::istream& in, F&& row) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("node_id", 0) == 0) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 7)
      throw ParseError(lineno, fmt::format("expected 7 fields, got {}", fields.size()));
    row(fields, lineno);
  }
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<BsmRecord>& rows) {
  fmt::print(out, "{}\n", kTraceCsvHeader);
  for (const auto& r : rows)
    fmt::print(out, "{},{},{},{},{},{},{}\n", r.node_id, r.t, r.pos.lat, r.pos.lon, r.pos.height,
               r.speed, r.heading);
}

std::vector<BsmRecord> read_trace_csv(std::istream& in) {
  std::vector<BsmRecord> rows;
  for_each_row(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
    BsmRecord r;
    r.node_id = field_id(f[0], line);
    r.t = field_double(f[1], line);
    try {
      r.pos = make_geodetic(field_double(f[2], line), field_double(f[3], line),
                            field_double(f[4], line));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line, e.what());
    }
    r.speed = field_double(f[5], line);
    r.heading = field_double(f[6], line);
    if (r.speed < 0) throw ParseError(line, "negative speed");
    rows.push_back(r);
  });
  return rows;
}

void write_local_csv(std::ostream& out, const std::vector<LocalRecord>& rows) {
  fmt::print(out, "{}\n", kLocalCsvHeader);
  for (const auto& r : rows)
    fmt::print(out, "{},{},{},{},{},{},{}\n", r.node_id, r.t, r.pos.e, r.pos.n, r.pos.u, r.speed,
               r.heading);
}

std::vector<LocalRecord> read_local_csv(std::istream& in) {
  std::vector<LocalRecord> rows;
  for_each_row(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
    rows.push_back({field_id(f[0], line), field_double(f[1], line),
                    {field_double(f[2], line), field_double(f[3], line), field_double(f[4], line)},
                    field_double(f[5], line), field_double(f[6], line)});
  });
  return rows;
}

BsmRecord to_geodetic(const LocalRecord& r, const GeodeticCoord& ref) {
  return {r.node_id, r.t, enu_to_geodetic(r.pos, ref), r.speed, normalize_heading(r.heading)};
}

LocalRecord to_local(const BsmRecord& r, const GeodeticCoord& ref) {
  return {r.node_id, r.t, geodetic_to_enu(r.pos, ref), r.speed, r.heading};
}

std::vector<std::filesystem::path> split_per_node(const MobilityTrace& trace,
                                                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  std::vector<std::filesystem::path> paths;
  paths.reserve(trace.nodes.size());
  for (const auto& node : trace.nodes) {
    auto path = dir / fmt::format("node_{}.csv", node.node_id);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_trace_csv(out, node.records);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
    paths.push_back(std::move(path));
  }
  return paths;
}

MobilityTrace load_trace_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("scenario directory not found: " + dir.string());
  static const std::regex name_re(R"(node_(\d+)\.csv)");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && std::regex_match(entry.path().filename().string(), name_re))
      files.push_back(entry.path());
  }
  std::vector<BsmRecord> rows;
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    try {
      auto part = read_trace_csv(in);
      rows.insert(rows.end(), part.begin(), part.end());
    } catch (const ParseError& e) {
      throw ParseError(e.line(), path.filename().string() + ": " + e.what());
    }
  }
  auto trace = group_by_node(std::move(rows));
  validate(trace);
  return trace;
}

}  // namespace rve::geo
