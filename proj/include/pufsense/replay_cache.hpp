#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <unordered_set>

namespace pufsense {

/// Bounded seen-token set with oldest-first eviction.
class BoundedReplayCache {
 public:
  explicit BoundedReplayCache(size_t capacity = 4096) : capacity_(capacity) {}

  bool seen(std::span<const uint8_t> token) const {
    return set_.count(std::string(token.begin(), token.end())) > 0;
  }

  void remember(std::span<const uint8_t> token) {
    std::string t(token.begin(), token.end());
    if (set_.count(t)) return;
    if (order_.size() >= capacity_) {
      set_.erase(order_.front());
      order_.pop_front();
    }
    set_.insert(t);
    order_.push_back(std::move(t));
  }

  size_t size() const { return order_.size(); }

 private:
  size_t capacity_;
  std::deque<std::string> order_;
  std::unordered_set<std::string> set_;
};

}  // namespace pufsense
