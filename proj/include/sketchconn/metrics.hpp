#pragma once

#include <array>
#include <bit>
#include <chrono>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "sketchconn/engine.hpp"
#include "sketchconn/memory.hpp"

namespace sketchconn {

/// Power-of-two latency buckets in nanoseconds: bucket b counts samples in
/// [2^b, 2^(b+1)), bucket 0 also takes 0.
struct LatencyHistogram {
  static constexpr std::size_t kBuckets = 40;

  std::array<std::uint64_t, kBuckets> counts{};
  std::uint64_t samples = 0;
  std::uint64_t total_ns = 0;
  std::uint64_t max_ns = 0;

  void record(std::uint64_t ns) {
    const std::size_t b = ns ? std::min<std::size_t>(std::bit_width(ns) - 1, kBuckets - 1) : 0;
    ++counts[b];
    ++samples;
    total_ns += ns;
    max_ns = std::max(max_ns, ns);
  }

  double mean_ns() const { return samples ? static_cast<double>(total_ns) / static_cast<double>(samples) : 0.0; }

  /// Upper edge of the bucket holding quantile q.
  std::uint64_t quantile_ns(double q) const {
    if (!samples) return 0;
    const auto want = static_cast<std::uint64_t>(q * static_cast<double>(samples - 1)) + 1;
    std::uint64_t seen = 0;
    for (std::size_t b = 0; b < kBuckets; ++b) {
      seen += counts[b];
      if (seen >= want) return std::uint64_t{2} << b;
    }
    return max_ns;
  }
};

struct RunMetrics {
  static constexpr int kSchemaVersion = 1;

  std::string mode;
  std::uint64_t vertex_count = 0;
  std::uint32_t num_levels = 0;
  std::uint32_t workers = 1;
  std::uint32_t buffer_capacity = 1;
  std::uint64_t updates = 0;
  std::uint64_t queries = 0;
  double update_seconds = 0;
  double query_seconds = 0;  // includes buffer flushes triggered by queries
  std::uint64_t peak_memory_bytes = 0;
  std::uint64_t isolated_update_count = 0;
  std::uint64_t normal_update_count = 0;
  std::uint64_t links = 0;
  std::uint64_t cuts = 0;
  std::uint64_t flushes = 0;
  std::uint64_t reverted_updates = 0;
  LatencyHistogram update_latency;
  LatencyHistogram query_latency;

  double updates_per_second() const { return update_seconds > 0 ? updates / update_seconds : 0.0; }
  double queries_per_second() const { return query_seconds > 0 ? queries / query_seconds : 0.0; }
};

inline nlohmann::json to_json(const LatencyHistogram& h) {
  // trailing empty buckets are dropped
  std::size_t used = LatencyHistogram::kBuckets;
  while (used && !h.counts[used - 1]) --used;
  return {{"unit", "ns"},
          {"bucket_base", 2},
          {"counts", std::vector<std::uint64_t>(h.counts.begin(), h.counts.begin() + used)},
          {"samples", h.samples},
          {"mean", h.mean_ns()},
          {"p50", h.quantile_ns(0.5)},
          {"p99", h.quantile_ns(0.99)},
          {"max", h.max_ns}};
}

inline nlohmann::json to_json(const RunMetrics& m) {
  return {{"schema_version", RunMetrics::kSchemaVersion},
          {"mode", m.mode},
          {"vertex_count", m.vertex_count},
          {"num_levels", m.num_levels},
          {"workers", m.workers},
          {"buffer_capacity", m.buffer_capacity},
          {"updates", m.updates},
          {"queries", m.queries},
          {"update_seconds", m.update_seconds},
          {"query_seconds", m.query_seconds},
          {"updates_per_second", m.updates_per_second()},
          {"queries_per_second", m.queries_per_second()},
          {"peak_memory_bytes", m.peak_memory_bytes},
          {"isolated_update_count", m.isolated_update_count},
          {"normal_update_count", m.normal_update_count},
          {"links", m.links},
          {"cuts", m.cuts},
          {"flushes", m.flushes},
          {"reverted_updates", m.reverted_updates},
          {"latency", {{"update", to_json(m.update_latency)}, {"query", to_json(m.query_latency)}}}};
}

/// Runs ops through a fresh engine, timing every op. Query answers are
/// passed to on_answer(op index, answer) when given.
template <class OnAnswer>
RunMetrics measure_run(const EngineConfig& cfg, const std::vector<StreamOp>& ops, OnAnswer&& on_answer) {
  using Clock = std::chrono::steady_clock;
  auto& tracker = MemoryTracker::instance();
  const std::size_t base = tracker.current();
  tracker.reset_peak();

  RunMetrics m;
  m.mode = update_mode_name(cfg.mode);
  m.vertex_count = cfg.vertex_count;
  m.num_levels = cfg.levels();
  m.workers = cfg.workers;
  m.buffer_capacity = cfg.buffer_capacity;
  {
    ConnectivityEngine engine(cfg);
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const auto& op = ops[i];
      const auto t0 = Clock::now();
      const auto answer = engine.apply(op);
      const auto ns = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
      if (answer) {
        m.query_latency.record(ns);
        ++m.queries;
        on_answer(i, *answer);
      } else {
        m.update_latency.record(ns);
        ++m.updates;
      }
    }
    const auto t0 = Clock::now();
    engine.flush();
    m.update_seconds = 1e-9 * static_cast<double>(m.update_latency.total_ns) +
                       std::chrono::duration<double>(Clock::now() - t0).count();
    m.query_seconds = 1e-9 * static_cast<double>(m.query_latency.total_ns);
    const auto& c = engine.counters();
    m.isolated_update_count = c.isolated_updates;
    m.normal_update_count = c.normal_updates;
    m.links = c.links;
    m.cuts = c.cuts;
    m.flushes = c.flushes;
    m.reverted_updates = c.reverted_updates;
    m.peak_memory_bytes = tracker.peak() - base;
  }
  return m;
}

inline RunMetrics measure_run(const EngineConfig& cfg, const std::vector<StreamOp>& ops) {
  return measure_run(cfg, ops, [](std::size_t, bool) {});
}

}  // namespace sketchconn
