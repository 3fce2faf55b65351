#include <pthread.h>
#include <sched.h>

#include <chrono>

#include <fmt/format.h>

#include "rve/emitter.hpp"

namespace rve::mac {

namespace {

using Clock = std::chrono::steady_clock;

// sleep_until overshoots by scheduler granularity; sleep to just short of the
// deadline and spin the rest.
constexpr auto kSpinMargin = std::chrono::microseconds(200);

void wait_until(Clock::time_point deadline) {
  if (deadline - Clock::now() > kSpinMargin) std::this_thread::sleep_until(deadline - kSpinMargin);
  while (Clock::now() < deadline) std::this_thread::yield();
}

// Lowest FIFO priority is enough to preempt ordinary threads. Release
// deadlines are otherwise at the mercy of the time-sharing scheduler, which
// on a busy or single-core host can delay a wakeup by milliseconds.
bool elevate_current_thread() {
  sched_param p{};
  p.sched_priority = sched_get_priority_min(SCHED_FIFO);
  return pthread_setschedparam(pthread_self(), SCHED_FIFO, &p) == 0;
}

}  // namespace

RealtimeEmitter::RealtimeEmitter(Consumer consumer, RealtimeOptions opts)
    : consumer_(std::move(consumer)), opts_(opts) {
  if (!consumer_) throw std::invalid_argument("realtime emitter needs a consumer");
  if (!(opts_.speed > 0)) throw std::invalid_argument("realtime speed must be positive");
  if (opts_.capacity == 0) throw std::invalid_argument("realtime buffer capacity must be positive");
  thread_ = std::thread([this] { worker(); });
}

RealtimeEmitter::~RealtimeEmitter() {
  {
    std::lock_guard lk(mu_);
    closed_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void RealtimeEmitter::emit(TransmissionRecord rec) {
  std::unique_lock lk(mu_);
  cv_.wait(lk, [&] { return buffer_.size() < opts_.capacity || error_; });
  if (error_) std::rethrow_exception(error_);
  buffer_.push_back(std::move(rec));
  // The clock starts once the buffer is primed, so the early releases do not
  // compete with the producer's initial burst.
  if (!started_ && buffer_.size() == opts_.capacity) start_clock();
  lk.unlock();
  cv_.notify_all();
}

void RealtimeEmitter::start_clock() {
  started_ = true;
  epoch_ = Clock::now();
}

void RealtimeEmitter::finish() {
  {
    std::lock_guard lk(mu_);
    if (!started_) start_clock();
    closed_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  std::lock_guard lk(mu_);
  if (error_) std::rethrow_exception(error_);
}

RealtimeStats RealtimeEmitter::stats() const {
  std::lock_guard lk(mu_);
  return stats_;
}

void RealtimeEmitter::worker() {
  if (opts_.realtime_priority && elevate_current_thread()) {
    std::lock_guard lk(mu_);
    stats_.elevated = true;
  }
  for (;;) {
    TransmissionRecord rec;
    Clock::time_point epoch;
    {
      std::unique_lock lk(mu_);
      cv_.wait(lk, [&] { return (started_ && !buffer_.empty()) || closed_; });
      if (buffer_.empty()) return;
      rec = std::move(buffer_.front());
      buffer_.pop_front();
      epoch = epoch_;
    }
    cv_.notify_all();

    const auto offset = std::chrono::nanoseconds(
        static_cast<std::int64_t>(static_cast<double>(rec.start) / opts_.speed));
    const auto release = epoch + std::chrono::duration_cast<Clock::duration>(offset);
    wait_until(release);
    const auto late = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - release);

    std::lock_guard lk(mu_);
    if (late > opts_.max_lag) {
      error_ = std::make_exception_ptr(RealtimeOverrun(fmt::format(
          "record at {} us released {} us late", to_us(rec.start), late.count() / 1000.0)));
      buffer_.clear();
      cv_.notify_all();
      return;
    }
    stats_.max_lateness = std::max(stats_.max_lateness, late);
    stats_.lateness.push_back(late);
    ++stats_.delivered;
    try {
      consumer_(rec);
    } catch (...) {
      error_ = std::current_exception();
      buffer_.clear();
      cv_.notify_all();
      return;
    }
  }
}

void emit(TransmissionRecord record, EmitMode mode, std::vector<TransmissionRecord>& sink,
          RealtimeEmitter* realtime) {
  if (mode == EmitMode::Realtime) {
    if (realtime == nullptr) throw std::invalid_argument("realtime mode needs an emitter");
    sink.push_back(record);
    realtime->emit(std::move(record));
  } else {
    sink.push_back(std::move(record));
  }
}

RunResult run_realtime(const EngineConfig& cfg, geo::MobilityTrace trace,
                       RealtimeEmitter::Consumer consumer, const RealtimeOptions& opts,
                       std::ostream* log, RealtimeStats* stats) {
  const auto wall_start = Clock::now();
  Engine engine(cfg, std::move(trace));
  if (log != nullptr && cfg.log_enabled) engine.set_event_log(log);
  RealtimeEmitter emitter(std::move(consumer), opts);
  RunResult result;
  while (auto rec = engine.step()) emit(std::move(*rec), EmitMode::Realtime, result.records, &emitter);
  emitter.finish();
  if (stats != nullptr) *stats = emitter.stats();
  result.windows = engine.metrics().windows();
  result.summary = engine.metrics().summary();
  result.summary.wall_clock_s = std::chrono::duration<double>(Clock::now() - wall_start).count();
  return result;
}

}  // namespace rve::mac
