#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "rve/ticks.hpp"

namespace rve {

enum class Outcome : std::uint8_t { Success, Error };

struct Transmitter {
  std::uint32_t node_id = 0;
  Ticks tx_time = 0;
  Outcome outcome = Outcome::Success;

  bool operator==(const Transmitter&) const = default;
};

/// One channel occupancy: a clean transmission or a damaged (collided) one.
struct TransmissionRecord {
  Ticks start = 0;
  /// ptxtime, or ptxtime + (last - first participant tx_time) when damaged.
  Ticks duration = 0;
  bool damaged = false;
  /// Ordered by (tx_time, node_id); the first entry started the transmission.
  std::vector<Transmitter> participants;
  /// Capture winner chosen by the receiver model, if any.
  std::optional<std::uint32_t> winner;

  Ticks end() const { return start + duration; }

  std::size_t error_count() const {
    return static_cast<std::size_t>(std::count_if(
        participants.begin(), participants.end(),
        [](const Transmitter& t) { return t.outcome == Outcome::Error; }));
  }
  std::size_t success_count() const { return participants.size() - error_count(); }

  bool operator==(const TransmissionRecord&) const = default;
};

}  // namespace rve
