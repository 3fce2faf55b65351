#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rve/eventheap.hpp"
#include "rve/record.hpp"
#include "rve/ticks.hpp"

/// Channel busy ratio, packet error rate and the human-readable event log.
namespace rve::telemetry {

inline constexpr Ticks kDefaultWindow = ms(100);

struct MetricsWindow {
  Ticks window_start = 0;
  Ticks window_len = kDefaultWindow;
  Ticks busy = 0;
  std::uint64_t tx_count = 0;
  std::uint64_t error_count = 0;
  /// Final window cut short by the run duration.
  bool partial = false;
};

/// busy / window_len.
double cbr(const MetricsWindow& w);
/// error_count / tx_count, 0 for a window with no transmissions.
double per(const MetricsWindow& w);

struct RunSummary {
  /// Busy time over the run duration (time-weighted mean of window CBRs).
  double mean_cbr = 0.0;
  /// Errors over transmitted packets, across all windows.
  double mean_per = 0.0;
  std::uint64_t tx_total = 0;
  std::uint64_t error_total = 0;
  std::uint64_t records = 0;
  /// Records started at or after the run duration (end-of-run flush).
  std::uint64_t flushed_records = 0;
  std::uint64_t flushed_packets = 0;
  /// Receiver-model distances below the reference distance.
  std::uint64_t clamped_distances = 0;
  double wall_clock_s = 0.0;
  double virtual_duration_s = 0.0;
};

/// Per-window accumulation of channel occupancy and packet outcomes.
/// Busy time is apportioned across every window a record overlaps and
/// clipped to the run duration; packet counts go to the window holding the
/// record's start.
class ChannelMetrics {
 public:
  explicit ChannelMetrics(Ticks duration, Ticks window_len = kDefaultWindow);

  /// Records must arrive in non-decreasing start order (std::logic_error
  /// otherwise).
  void record_transmission(const TransmissionRecord& rec);
  void note_clamped_distance() { ++clamped_; }

  const std::vector<MetricsWindow>& windows() const { return windows_; }
  RunSummary summary() const;

  Ticks duration() const { return duration_; }
  /// CBR of the window holding `t`, so far.
  double window_cbr_at(Ticks t) const;
  /// Successful packets over transmitted packets so far.
  double success_rate() const;

 private:
  Ticks duration_;
  Ticks window_len_;
  std::vector<MetricsWindow> windows_;
  Ticks last_start_ = 0;
  std::uint64_t records_ = 0, flushed_records_ = 0, flushed_packets_ = 0;
  std::uint64_t tx_all_ = 0, err_all_ = 0;
  std::uint64_t clamped_ = 0;
};

/// Header written by export_csv.
inline constexpr const char* kCsvHeader = "t_ms,cbr,per";

/// Writes the header, one row per window, then the summary as `# key=value`
/// comment lines.
void export_csv(std::ostream& out, const RunSummary& summary,
                std::span<const MetricsWindow> windows);
void export_csv(const std::filesystem::path& path, const RunSummary& summary,
                std::span<const MetricsWindow> windows);

/// A telemetry CSV read back.
struct CsvSeries {
  std::vector<double> t_ms;
  std::vector<double> cbr;
  std::vector<double> per;
  std::map<std::string, std::string> footer;
};

/// Throws geo::ParseError carrying the offending line number.
CsvSeries read_csv(std::istream& in);
CsvSeries read_csv(const std::filesystem::path& path);

/// Writes the per-cycle decision log: queue snapshots as `<node: seconds>`
/// pairs, branch decisions, and a status block per transmission.
class EventLog {
 public:
  explicit EventLog(std::ostream& out) : out_(&out) {}

  void header(std::size_t traces_loaded);
  void cycle_begin();
  /// `pending` are packets rescheduled this cycle and not yet reinserted.
  void snapshot(const ScheduledPacket& curr, const PacketQueue& queue,
                std::span<const ScheduledPacket> pending);
  void collision(Ticks offset);
  void backoff(int counter, bool fresh_draw);
  void aifs_defer(std::uint32_t node, Ticks new_tx);
  void transmission(const TransmissionRecord& rec, double cbp_percent, double success_percent,
                    Ticks lapsed);

  /// Throws std::runtime_error if the sink reported a write failure.
  void check() const;

 private:
  std::ostream* out_;
};

}  // namespace rve::telemetry
