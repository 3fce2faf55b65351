#include "rve/eventheap.hpp"

#include <utility>

namespace rve {

void PacketQueue::insert(ScheduledPacket p) {
  last_swaps_ = 0;
  heap_.push_back(std::move(p));
  sift_up(heap_.size() - 1);
}

ScheduledPacket PacketQueue::pop_min() {
  if (heap_.empty()) throw EmptyQueueError();
  last_swaps_ = 0;
  ScheduledPacket root = std::move(heap_.front());
  if (heap_.size() > 1) heap_.front() = std::move(heap_.back());
  heap_.pop_back();
  if (!heap_.empty()) sift_down(0);
  return root;
}

const ScheduledPacket& PacketQueue::peek() const {
  if (heap_.empty()) throw EmptyQueueError();
  return heap_.front();
}

bool PacketQueue::is_heap() const {
  for (std::size_t i = 1; i < heap_.size(); ++i)
    if (before(heap_[i], heap_[(i - 1) / 2])) return false;
  return true;
}

void PacketQueue::sift_up(std::size_t i) {
  while (i > 0) {
    const std::size_t parent = (i - 1) / 2;
    if (!before(heap_[i], heap_[parent])) break;
    std::swap(heap_[i], heap_[parent]);
    ++last_swaps_;
    i = parent;
  }
}

void PacketQueue::sift_down(std::size_t i) {
  const std::size_t n = heap_.size();
  while (true) {
    const std::size_t l = 2 * i + 1;
    if (l >= n) break;
    std::size_t child = l;
    if (l + 1 < n && before(heap_[l + 1], heap_[l])) child = l + 1;
    if (!before(heap_[child], heap_[i])) break;
    std::swap(heap_[i], heap_[child]);
    ++last_swaps_;
    i = child;
  }
}

}  // namespace rve
