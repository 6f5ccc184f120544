#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "speclog/encoding.hpp"

namespace speclog::protocol {

/// Faults applied to frames by send order (0-based).
struct FaultPlan {
  std::optional<std::size_t> drop;
  std::optional<std::size_t> flip;  // flips one bit of that frame
  std::optional<std::size_t> flip_bit;  // bit offset within the frame; defaults to the middle of the body
  std::optional<std::size_t> replay;  // delivers that frame twice
  std::optional<std::size_t> reorder;  // swaps that frame with the next one
};

/// Ordered in-process message channel with fault injection. Safe for one
/// producer thread and one consumer thread.
class Channel {
 public:
  Channel() = default;
  explicit Channel(FaultPlan plan) : plan_(plan) {}

  void send(Bytes frame) {
    std::lock_guard lock(mu_);
    const auto index = sent_++;
    if (plan_.drop == index) return;
    if (plan_.flip == index && !frame.empty()) {
      const std::size_t bit = plan_.flip_bit.value_or(8 * (4 + (frame.size() - 4) / 2)) % (8 * frame.size());
      frame[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    }
    if (held_) {
      queue_.push_back(std::move(frame));
      queue_.push_back(std::move(*held_));
      held_.reset();
    } else if (plan_.reorder == index) {
      held_ = std::move(frame);
      return;
    } else {
      if (plan_.replay == index) queue_.push_back(frame);
      queue_.push_back(std::move(frame));
    }
    cv_.notify_one();
  }

  /// Releases any frame held back for reordering and wakes blocked receivers.
  void close() {
    std::lock_guard lock(mu_);
    if (held_) {
      queue_.push_back(std::move(*held_));
      held_.reset();
    }
    closed_ = true;
    cv_.notify_all();
  }

  /// Blocks until a frame arrives or the channel is closed and drained.
  std::optional<Bytes> receive() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    auto f = std::move(queue_.front());
    queue_.pop_front();
    return f;
  }

  std::optional<Bytes> try_receive() {
    std::lock_guard lock(mu_);
    if (queue_.empty()) return std::nullopt;
    auto f = std::move(queue_.front());
    queue_.pop_front();
    return f;
  }

 private:
  FaultPlan plan_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Bytes> queue_;
  std::optional<Bytes> held_;
  std::size_t sent_ = 0;
  bool closed_ = false;
};

}  // namespace speclog::protocol
