#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "rve/macsim.hpp"
#include "rve/record.hpp"

namespace rve::mac {

enum class EmitMode { Virtual, Realtime };

class RealtimeOverrun : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RealtimeOptions {
  /// Channel seconds per wall-clock second.
  double speed = 1.0;
  /// Records the engine may run ahead of the wall clock.
  std::size_t capacity = 4096;
  /// A record released later than this behind schedule is an overrun.
  std::chrono::microseconds max_lag{50'000};
  /// Ask for real-time scheduling on the release thread. Best effort; without
  /// the privilege the thread keeps normal priority.
  bool realtime_priority = true;
};

struct RealtimeStats {
  std::size_t delivered = 0;
  /// Whether the release thread ran with real-time scheduling.
  bool elevated = false;
  std::chrono::nanoseconds max_lateness{0};
  /// Per-record lateness against its scheduled release, in delivery order.
  std::vector<std::chrono::nanoseconds> lateness;
};

/// Releases records to a consumer on a separate thread at wall-clock times
/// proportional to their start, while the producer keeps computing. The
/// clock starts when the buffer first fills or finish() is called. Records
/// cross threads as values; delivery order equals emit order.
class RealtimeEmitter {
 public:
  using Consumer = std::function<void(const TransmissionRecord&)>;

  RealtimeEmitter(Consumer consumer, RealtimeOptions opts = {});
  ~RealtimeEmitter();
  RealtimeEmitter(const RealtimeEmitter&) = delete;
  RealtimeEmitter& operator=(const RealtimeEmitter&) = delete;

  /// Blocks while `capacity` records are waiting. Throws RealtimeOverrun if
  /// delivery has already fallen behind.
  void emit(TransmissionRecord rec);

  /// Waits for every queued record to be delivered; rethrows a delivery
  /// failure.
  void finish();

  RealtimeStats stats() const;

 private:
  void worker();
  void start_clock();

  Consumer consumer_;
  RealtimeOptions opts_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<TransmissionRecord> buffer_;
  bool closed_ = false;
  bool started_ = false;
  std::chrono::steady_clock::time_point epoch_;
  std::exception_ptr error_;
  RealtimeStats stats_;
  std::thread thread_;
};

/// Delivers a finalized record: appended synchronously in virtual mode,
/// handed to the emitter thread in realtime mode.
void emit(TransmissionRecord record, EmitMode mode, std::vector<TransmissionRecord>& sink,
          RealtimeEmitter* realtime);

/// Runs to completion, streaming records through a RealtimeEmitter. The
/// returned records and metrics equal run() for the same inputs.
RunResult run_realtime(const EngineConfig& cfg, geo::MobilityTrace trace,
                       RealtimeEmitter::Consumer consumer, const RealtimeOptions& opts = {},
                       std::ostream* log = nullptr, RealtimeStats* stats = nullptr);

}  // namespace rve::mac
