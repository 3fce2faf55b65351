#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rve/geokit.hpp"
#include "rve/ticks.hpp"

namespace rve {

/// A BSM waiting for the channel, plus its CSMA/CA state.
struct ScheduledPacket {
  geo::BsmRecord bsm;
  Ticks tx_time = 0;
  bool collision_flag = false;
  /// -1 until the first backoff draw, then in [0, CW].
  int backoff_counter = -1;
  /// Instant from which idle slots count toward the backoff counter
  /// (end of the busy period that last froze it, plus AIFS).
  Ticks backoff_anchor = 0;

  std::uint32_t node_id() const { return bsm.node_id; }
};

class EmptyQueueError : public std::logic_error {
 public:
  EmptyQueueError() : std::logic_error("packet queue is empty") {}
};

/// Binary min-heap of ScheduledPacket keyed by (tx_time, node_id).
///
/// Insertion appends at the end and sifts up; pop_min moves the last element
/// to the root and sifts down toward the smaller child. Both touch at most
/// one element per level.
class PacketQueue {
 public:
  PacketQueue() = default;
  explicit PacketQueue(std::size_t capacity) { heap_.reserve(capacity); }

  void insert(ScheduledPacket p);
  ScheduledPacket pop_min();
  const ScheduledPacket& peek() const;

  std::size_t size() const { return heap_.size(); }
  bool empty() const { return heap_.empty(); }
  void reserve(std::size_t n) { heap_.reserve(n); }

  /// Backing array in heap order (root first).
  std::span<const ScheduledPacket> items() const { return heap_; }

  /// Parent/child swaps performed by the most recent insert or pop_min.
  std::size_t last_swaps() const { return last_swaps_; }

  /// Full scan of the parent <= child property.
  bool is_heap() const;

  static bool before(const ScheduledPacket& a, const ScheduledPacket& b) {
    return a.tx_time != b.tx_time ? a.tx_time < b.tx_time : a.node_id() < b.node_id();
  }

 private:
  void sift_up(std::size_t i);
  void sift_down(std::size_t i);

  std::vector<ScheduledPacket> heap_;
  std::size_t last_swaps_ = 0;
};

}  // namespace rve
