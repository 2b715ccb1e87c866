#pragma once

#include <mutex>
#include <utility>

namespace flexinst {

/// Single-slot hand-off between threads: writers overwrite, readers copy the newest value.
template <typename T>
class LatestValue {
 public:
  LatestValue() = default;
  explicit LatestValue(T initial) : value_(std::move(initial)) {}

  void store(T value) {
    std::lock_guard lock(mutex_);
    value_ = std::move(value);
  }

  T load() const {
    std::lock_guard lock(mutex_);
    return value_;
  }

 private:
  mutable std::mutex mutex_;
  T value_{};
};

}  // namespace flexinst
