#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rve/telemetry.hpp"

namespace rve::telemetry {

namespace {

// Seconds with microsecond digits, truncated; integer math keeps the text
// independent of floating-point formatting.
std::string seconds6(Ticks t) {
  return fmt::format("{}.{:06}", t / kTicksPerSec, (t % kTicksPerSec) / kTicksPerUs);
}

std::string entry(const ScheduledPacket& p) {
  return fmt::format(" <{}: {}>", p.node_id(), seconds6(p.tx_time));
}

}  // namespace

void EventLog::header(std::size_t traces_loaded) {
  fmt::print(*out_, "CSMA/CA Communication Simulator\n\n(info) {} log files loaded.\n\n",
             traces_loaded);
}

void EventLog::cycle_begin() { fmt::print(*out_, "*****\n"); }

void EventLog::snapshot(const ScheduledPacket& curr, const PacketQueue& queue,
                        std::span<const ScheduledPacket> pending) {
  std::string line = "Current TX Buffer" + entry(curr);
  for (const auto& p : queue.items()) line += entry(p);
  for (const auto& p : pending) line += entry(p);
  fmt::print(*out_, "{}\n", line);
}

void EventLog::collision(Ticks offset) {
  fmt::print(*out_, "-> Collision Occurred at {:.7g} us\n", to_us(offset));
}

void EventLog::backoff(int counter, bool fresh_draw) {
  if (fresh_draw)
    fmt::print(*out_, "-> Transmission in progress, Back-off with random {}\nBack-off\n", counter);
  else
    fmt::print(*out_, "-> Transmission in progress, Back-off resumed at {}\nBack-off\n", counter);
}

void EventLog::aifs_defer(std::uint32_t node, Ticks new_tx) {
  fmt::print(*out_, "-> AIFS in progress, Deferred Node {} to {}\n", node, seconds6(new_tx));
}

void EventLog::transmission(const TransmissionRecord& rec, double cbp_percent,
                            double success_percent, Ticks lapsed) {
  const auto first = rec.participants.empty() ? 0u : rec.participants.front().node_id;
  if (rec.damaged) {
    fmt::print(*out_, "Damage Transmission\n(info) Transmitted Damaged Packet from Node: {}\n", first);
    if (rec.winner) fmt::print(*out_, "(info) Captured Packet from Node: {}\n", *rec.winner);
  } else {
    fmt::print(*out_, "Success Transmission\n(info) Successfully Transmitted Packet from Node: {}\n",
               first);
  }
  fmt::print(*out_, "(info) Current Transmission Time: {:.7g} us\n", to_us(rec.duration));
  fmt::print(*out_, "(info) CBP: {:.4g} %\n", cbp_percent);
  fmt::print(*out_, "(info) Success Rate: {:.4g} %\n", success_percent);
  fmt::print(*out_, "(info) Total Time Lapsed: {:.7g}\n", to_us(lapsed));
}

void EventLog::check() const {
  if (!*out_) throw std::runtime_error("event log write failed");
}

}  // namespace rve::telemetry
