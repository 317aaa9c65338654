#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sketchconn/ett.hpp"
#include "sketchconn/executor.hpp"
#include "sketchconn/random.hpp"
#include "sketchconn/sketch.hpp"

namespace sketchconn {

enum class StructuralOp : std::uint8_t { kLink, kCut };

/// One level of the connectivity structure: a sketch-augmented Euler tour
/// forest whose component aggregates sample edges leaving the component.
class CutsetLevel {
 public:
  static constexpr std::size_t kBlockWords = 32;

  CutsetLevel(std::uint32_t index, std::uint64_t vertex_count, std::uint32_t columns, std::uint64_t master_seed,
              HeightMode height_mode)
      : index_(index),
        seed_(hash_combine(master_seed, index)),
        cfg_(SketchConfig::for_vertices(vertex_count, columns, seed_)),
        hasher_(cfg_),
        forest_(vertex_count, cfg_, HeightDistribution::make(height_mode, vertex_count, mix64(seed_ ^ 0x5eedULL))) {}

  std::uint32_t index() const noexcept { return index_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t vertex_count() const noexcept { return forest_.vertex_count(); }
  const SketchConfig& config() const noexcept { return cfg_; }
  const SketchHasher& hasher() const noexcept { return hasher_; }
  EulerTourForest& forest() noexcept { return forest_; }

  /// Toggles edge (u, v) in the sketches of both endpoints.
  void update(Vertex u, Vertex v) {
    if (u == v) throw Error(ErrorCode::kInvalidEdge, "self loop");
    const auto delta = SketchDelta::make(hasher_, encode_edge(u, v, vertex_count()));
    forest_.vertex_apply(u, delta);
    forest_.vertex_apply(v, delta);
  }

  void link(Vertex u, Vertex v) { forest_.link(u, v); }
  void cut(Vertex u, Vertex v) { forest_.cut(u, v); }

  /// An edge leaving v's component, or nullopt when the sample fails or the
  /// cut is empty.
  std::optional<std::pair<Vertex, Vertex>> query(Vertex v) {
    const auto hit = forest_.component_aggregate(v).sketch.query(hasher_);
    if (!hit) return std::nullopt;
    return decode_edge(*hit, vertex_count());
  }

  std::uint64_t component_size(Vertex v) { return forest_.component_size(v); }
  bool connected(Vertex u, Vertex v) { return forest_.connected(u, v); }
  bool has_edge(Vertex u, Vertex v) const { return forest_.has_edge(u, v); }

  // Two-phase structural op. begin_structural + link/cut log the sketch
  // additions, execute_block runs them over one word block, and
  // finish_structural releases the log.
  void begin_structural() { forest_.policy().begin_deferred(); }
  std::size_t block_count() const { return (cfg_.word_count() + kBlockWords - 1) / kBlockWords; }
  void execute_block(std::size_t block) const {
    const std::size_t begin = block * kBlockWords;
    const std::size_t end = std::min(begin + kBlockWords, cfg_.word_count());
    forest_policy().execute_range(begin, end);
  }
  std::size_t pending_tasks() const { return forest_policy().tasks().size(); }
  void finish_structural() {
    last_task_count_ = pending_tasks();
    forest_.policy().finish_deferred();
  }

  /// Link or cut with sketch word work spread over the pool's workers.
  void parallel_structural_op(StructuralOp op, Vertex u, Vertex v, WorkerPool& pool) {
    begin_structural();
    try {
      if (op == StructuralOp::kLink) {
        link(u, v);
      } else {
        cut(u, v);
      }
    } catch (...) {
      forest_.policy().finish_deferred();
      throw;
    }
    pool.parallel_for(block_count(), [&](std::size_t b) { execute_block(b); });
    finish_structural();
  }

  /// Sketch additions logged by the last finished structural op.
  std::size_t last_task_count() const noexcept { return last_task_count_; }

  void serialize_to(std::vector<std::uint8_t>& out) {
    Sketch::put_u64(out, index_);
    Sketch::put_u64(out, seed_);
    forest_.serialize_to(out);
  }

  std::vector<std::uint8_t> serialize() {
    std::vector<std::uint8_t> out;
    serialize_to(out);
    return out;
  }

 private:
  const AggregatePolicy& forest_policy() const { return forest_.policy(); }

  std::uint32_t index_;
  std::uint64_t seed_;
  SketchConfig cfg_;
  SketchHasher hasher_;
  EulerTourForest forest_;
  std::size_t last_task_count_ = 0;
};

}  // namespace sketchconn
