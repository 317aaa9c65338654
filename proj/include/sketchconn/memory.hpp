#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <new>
#include <utility>

namespace sketchconn {

/// Process-wide byte counter for engine-owned allocations. Only structures
/// allocated through TrackedAllocator / tracked_new are counted.
class MemoryTracker {
 public:
  static MemoryTracker& instance() {
    static MemoryTracker tracker;
    return tracker;
  }

  void on_alloc(std::size_t bytes) noexcept {
    const auto now = current_.fetch_add(bytes, std::memory_order_relaxed) + bytes;
    auto peak = peak_.load(std::memory_order_relaxed);
    while (now > peak && !peak_.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
    }
  }
  void on_free(std::size_t bytes) noexcept { current_.fetch_sub(bytes, std::memory_order_relaxed); }

  std::size_t current() const noexcept { return current_.load(std::memory_order_relaxed); }
  std::size_t peak() const noexcept { return peak_.load(std::memory_order_relaxed); }
  void reset_peak() noexcept { peak_.store(current(), std::memory_order_relaxed); }

 private:
  std::atomic<std::size_t> current_{0};
  std::atomic<std::size_t> peak_{0};
};

template <class T>
struct TrackedAllocator {
  using value_type = T;

  TrackedAllocator() noexcept = default;
  template <class U>
  TrackedAllocator(const TrackedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    MemoryTracker::instance().on_alloc(n * sizeof(T));
    return std::allocator<T>{}.allocate(n);
  }
  void deallocate(T* p, std::size_t n) noexcept {
    MemoryTracker::instance().on_free(n * sizeof(T));
    std::allocator<T>{}.deallocate(p, n);
  }

  template <class U>
  bool operator==(const TrackedAllocator<U>&) const noexcept { return true; }
  template <class U>
  bool operator!=(const TrackedAllocator<U>&) const noexcept { return false; }
};

template <class T, class... Args>
T* tracked_new(Args&&... args) {
  MemoryTracker::instance().on_alloc(sizeof(T));
  return new T(std::forward<Args>(args)...);
}

template <class T>
void tracked_delete(T* p) noexcept {
  if (!p) return;
  delete p;
  MemoryTracker::instance().on_free(sizeof(T));
}

}  // namespace sketchconn
