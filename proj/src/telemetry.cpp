#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rve/geokit.hpp"
#include "rve/telemetry.hpp"

namespace rve::telemetry {

double cbr(const MetricsWindow& w) {
  return w.window_len == 0 ? 0.0 : static_cast<double>(w.busy) / static_cast<double>(w.window_len);
}

double per(const MetricsWindow& w) {
  return w.tx_count == 0 ? 0.0
                         : static_cast<double>(w.error_count) / static_cast<double>(w.tx_count);
}

ChannelMetrics::ChannelMetrics(Ticks duration, Ticks window_len)
    : duration_(duration), window_len_(window_len) {
  if (duration == 0) throw std::invalid_argument("metrics duration must be positive");
  if (window_len == 0) throw std::invalid_argument("metrics window must be positive");
  const Ticks n = (duration + window_len - 1) / window_len;
  windows_.reserve(n);
  for (Ticks i = 0; i < n; ++i) {
    MetricsWindow w;
    w.window_start = i * window_len;
    w.window_len = std::min(window_len, duration - w.window_start);
    w.partial = w.window_len < window_len;
    windows_.push_back(w);
  }
}

void ChannelMetrics::record_transmission(const TransmissionRecord& rec) {
  if (records_ > 0 && rec.start < last_start_)
    throw std::logic_error(
        fmt::format("record at {} ns arrived after one at {} ns", rec.start, last_start_));
  last_start_ = rec.start;
  ++records_;
  const auto tx = static_cast<std::uint64_t>(rec.participants.size());
  const auto err = static_cast<std::uint64_t>(rec.error_count());
  tx_all_ += tx;
  err_all_ += err;

  if (rec.start >= duration_) {
    ++flushed_records_;
    flushed_packets_ += tx;
    return;
  }
  auto& home = windows_[rec.start / window_len_];
  home.tx_count += tx;
  home.error_count += err;

  const Ticks end = std::min(rec.end(), duration_);
  for (Ticks t = rec.start; t < end;) {
    auto& w = windows_[t / window_len_];
    const Ticks w_end = w.window_start + w.window_len;
    const Ticks seg_end = std::min(end, w_end);
    w.busy += seg_end - t;
    t = seg_end;
  }
}

RunSummary ChannelMetrics::summary() const {
  RunSummary s;
  Ticks busy = 0;
  for (const auto& w : windows_) {
    busy += w.busy;
    s.tx_total += w.tx_count;
    s.error_total += w.error_count;
  }
  s.mean_cbr = static_cast<double>(busy) / static_cast<double>(duration_);
  s.mean_per = s.tx_total == 0 ? 0.0
                               : static_cast<double>(s.error_total) / static_cast<double>(s.tx_total);
  s.records = records_;
  s.flushed_records = flushed_records_;
  s.flushed_packets = flushed_packets_;
  s.clamped_distances = clamped_;
  s.virtual_duration_s = to_seconds(duration_);
  return s;
}

double ChannelMetrics::window_cbr_at(Ticks t) const {
  if (t >= duration_) return 0.0;
  return cbr(windows_[t / window_len_]);
}

double ChannelMetrics::success_rate() const {
  return tx_all_ == 0 ? 0.0
                      : static_cast<double>(tx_all_ - err_all_) / static_cast<double>(tx_all_);
}

// ---------------------------------------------------------------------------
// CSV

void export_csv(std::ostream& out, const RunSummary& s, std::span<const MetricsWindow> windows) {
  fmt::print(out, "{}\n", kCsvHeader);
  for (const auto& w : windows)
    fmt::print(out, "{},{},{}\n", to_ms(w.window_start), cbr(w), per(w));
  fmt::print(out, "# mean_cbr={}\n", s.mean_cbr);
  fmt::print(out, "# mean_per={}\n", s.mean_per);
  fmt::print(out, "# tx_total={}\n", s.tx_total);
  fmt::print(out, "# error_total={}\n", s.error_total);
  fmt::print(out, "# records={}\n", s.records);
  fmt::print(out, "# flushed_records={}\n", s.flushed_records);
  fmt::print(out, "# flushed_packets={}\n", s.flushed_packets);
  fmt::print(out, "# clamped_distances={}\n", s.clamped_distances);
  fmt::print(out, "# virtual_duration_s={}\n", s.virtual_duration_s);
  if (!out) throw std::runtime_error("failed writing telemetry CSV");
}

void export_csv(const std::filesystem::path& path, const RunSummary& s,
                std::span<const MetricsWindow> windows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  export_csv(out, s, windows);
}

namespace {

double parse_double(std::string_view field, std::size_t line) {
  double v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw geo::ParseError(line, fmt::format("invalid number '{}'", field));
  return v;
}

}  // namespace

CsvSeries read_csv(std::istream& in) {
  CsvSeries series;
  std::string line;
  std::size_t no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = line.substr(1);
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      auto key = body.substr(0, eq);
      key.erase(0, key.find_first_not_of(' '));
      series.footer[key] = body.substr(eq + 1);
      continue;
    }
    if (!header_seen) {
      if (line != kCsvHeader) throw geo::ParseError(no, "expected header " + std::string(kCsvHeader));
      header_seen = true;
      continue;
    }
    std::string_view rest = line;
    double vals[3];
    for (int i = 0; i < 3; ++i) {
      const auto comma = rest.find(',');
      if ((i < 2) == (comma == std::string_view::npos))
        throw geo::ParseError(no, "expected 3 fields");
      vals[i] = parse_double(rest.substr(0, comma), no);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    series.t_ms.push_back(vals[0]);
    series.cbr.push_back(vals[1]);
    series.per.push_back(vals[2]);
  }
  if (!header_seen) throw geo::ParseError(no == 0 ? 1 : no, "missing header");
  return series;
}

CsvSeries read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  return read_csv(in);
}

}  // namespace rve::telemetry
