#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sketchconn/sketch.hpp"

namespace sketchconn {

/// Per-span aggregate of an Euler tour list: XOR of vertex sketches and the
/// number of sketch-bearing occurrences. An absent sketch reads as zero.
struct ComponentAggregate {
  Sketch sketch;
  std::uint64_t count = 0;
};

/// dst = a ^ b over a word range; null sources read as zero.
struct SketchTask {
  std::uint64_t* dst;
  const std::uint64_t* a;
  const std::uint64_t* b;
};

/// Aggregate arithmetic for ComponentAggregate. In deferred mode sketch word
/// work is logged as SketchTasks instead of executed; counts are always
/// applied immediately. Buffers retired while deferred are parked until the
/// log has been executed, so pending tasks never dangle.
class AggregatePolicy {
 public:
  AggregatePolicy() = default;
  explicit AggregatePolicy(std::optional<SketchConfig> cfg) : cfg_(cfg) {}

  bool augmented() const noexcept { return cfg_.has_value(); }
  const SketchConfig& config() const { return *cfg_; }

  void init_upper(ComponentAggregate& v) {
    v.count = 0;
    if (!cfg_) return;
    if (v.sketch.absent()) {
      v.sketch = Sketch(*cfg_);
    } else {
      zero_sketch(v.sketch);
    }
  }

  void zero(ComponentAggregate& v) {
    v.count = 0;
    if (!v.sketch.absent()) zero_sketch(v.sketch);
  }

  void add(ComponentAggregate& dst, const ComponentAggregate& src) {
    dst.count += src.count;
    xor_into(dst.sketch, src.sketch);
  }

  /// dst = a + b, b optional; overwrites dst without zeroing it first.
  void assign(ComponentAggregate& dst, const ComponentAggregate& a, const ComponentAggregate* b) {
    dst.count = a.count + (b ? b->count : 0);
    const Sketch* sa = a.sketch.absent() ? nullptr : &a.sketch;
    const Sketch* sb = b && !b->sketch.absent() ? &b->sketch : nullptr;
    if (!sa) std::swap(sa, sb);
    if (!sa) {
      if (!dst.sketch.absent()) zero_sketch(dst.sketch);
      return;
    }
    if (dst.sketch.absent()) dst.sketch = Sketch(sa->config());
    const SketchTask task{dst.sketch.data(), sa->data(), sb ? sb->data() : nullptr};
    if (deferred_) {
      tasks_.push_back(task);
    } else {
      run_task(task, 0, sa->words().size());
    }
  }

  void sub(ComponentAggregate& dst, const ComponentAggregate& src) {
    dst.count -= src.count;
    xor_into(dst.sketch, src.sketch);
  }

  void retire(ComponentAggregate& v) {
    if (deferred_ && !v.sketch.absent()) graveyard_.push_back(std::move(v.sketch));
    v.sketch = Sketch();
    v.count = 0;
  }

  void begin_deferred() {
    deferred_ = true;
    tasks_.clear();
  }
  bool deferred() const noexcept { return deferred_; }
  const std::vector<SketchTask>& tasks() const noexcept { return tasks_; }
  std::size_t word_count() const { return cfg_ ? cfg_->word_count() : 0; }

  /// Runs the logged tasks on words [begin, end) of every sketch.
  void execute_range(std::size_t begin, std::size_t end) const { run_tasks(tasks_, begin, end); }

  static void run_tasks(const std::vector<SketchTask>& tasks, std::size_t begin, std::size_t end) {
    for (const auto& t : tasks) run_task(t, begin, end);
  }

  static void run_task(const SketchTask& t, std::size_t begin, std::size_t end) {
    std::uint64_t* dst = t.dst;
    const std::uint64_t* a = t.a ? t.a : t.b;
    const std::uint64_t* b = t.a ? t.b : nullptr;
    if (dst == a) {
      if (b) Sketch::xor_words(dst + begin, b + begin, end - begin);
    } else if (dst == b) {
      Sketch::xor_words(dst + begin, a + begin, end - begin);
    } else if (!a) {
      std::fill(dst + begin, dst + end, 0);
    } else if (!b) {
      std::copy(a + begin, a + end, dst + begin);
    } else {
      for (std::size_t w = begin; w < end; ++w) dst[w] = a[w] ^ b[w];
    }
  }

  /// Leaves deferred mode; the caller must have executed every word range.
  void finish_deferred() {
    deferred_ = false;
    tasks_.clear();
    graveyard_.clear();
  }

  std::size_t graveyard_size() const noexcept { return graveyard_.size(); }

 private:
  void zero_sketch(Sketch& s) {
    if (deferred_) {
      tasks_.push_back({s.data(), nullptr, nullptr});
    } else {
      s.clear();
    }
  }

  void xor_into(Sketch& dst, const Sketch& src) {
    if (src.absent()) return;
    if (dst.absent()) dst = Sketch(src.config());
    if (deferred_) {
      tasks_.push_back({dst.data(), dst.data(), src.data()});
    } else {
      Sketch::xor_words(dst.data(), src.data(), src.words().size());
    }
  }

  std::optional<SketchConfig> cfg_;
  bool deferred_ = false;
  std::vector<SketchTask> tasks_;
  std::vector<Sketch> graveyard_;
};

}  // namespace sketchconn
