#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sketchconn/cutset.hpp"
#include "sketchconn/error.hpp"
#include "sketchconn/ett.hpp"
#include "sketchconn/executor.hpp"
#include "sketchconn/lct.hpp"
#include "sketchconn/memory.hpp"
#include "sketchconn/stream.hpp"

namespace sketchconn {

enum class UpdateMode { kSequential, kParallel, kBuffered };

inline const char* update_mode_name(UpdateMode m) {
  switch (m) {
    case UpdateMode::kSequential: return "sequential";
    case UpdateMode::kParallel: return "parallel";
    case UpdateMode::kBuffered: return "buffered";
  }
  return "unknown";
}

/// 2 ceil(log2 V) + 1, at least 2.
inline std::uint32_t default_num_levels(std::uint64_t vertex_count) {
  std::uint32_t lg = 0;
  while (lg < 64 && (std::uint64_t{1} << lg) < vertex_count) ++lg;
  return std::max<std::uint32_t>(2, 2 * lg + 1);
}

struct LevelBound {
  double alpha = 0;  // ceil(log_{4/(4-p)} V)
  double beta = 0;   // (1-p)/(1-p/2)
  std::uint32_t top = 0;
};

/// top = ceil(max(2 alpha / beta, 8 c ln V / beta)).
inline LevelBound level_bound(std::uint64_t vertex_count, double p, double c) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::kInvalidConfig, "p must lie in (0, 1)");
  if (c < 1.0) throw Error(ErrorCode::kInvalidConfig, "c must be at least 1");
  if (vertex_count < 2) throw Error(ErrorCode::kInvalidConfig, "need at least 2 vertices");
  LevelBound b;
  const double ln_v = std::log(static_cast<double>(vertex_count));
  b.alpha = std::ceil(ln_v / std::log(4.0 / (4.0 - p)));
  b.beta = (1.0 - p) / (1.0 - p / 2.0);
  b.top = static_cast<std::uint32_t>(std::ceil(std::max(2.0 * b.alpha / b.beta, 8.0 * c * ln_v / b.beta)));
  return b;
}

/// Level count (top + 1) from the bound above.
inline std::uint32_t compute_num_levels(std::uint64_t vertex_count, double p, double c) {
  return level_bound(vertex_count, p, c).top + 1;
}

struct EngineConfig {
  std::uint64_t vertex_count = 0;
  std::uint32_t num_levels = 0;  // 0 = default_num_levels(vertex_count)
  std::uint32_t sketch_columns = 7;
  double success_p = 0.9;
  std::uint64_t seed = 1;
  std::uint32_t buffer_capacity = 128;
  UpdateMode mode = UpdateMode::kSequential;
  std::uint32_t workers = 1;
  HeightMode height_mode = HeightMode::kReduced;
  bool track_edges = false;  // reject illegal stream ops (keeps an O(E) edge set)
  bool fault_drop_links = false;  // test hook: never promote sampled edges

  std::uint32_t levels() const { return num_levels ? num_levels : default_num_levels(vertex_count); }

  void validate() const {
    if (vertex_count == 0) throw Error(ErrorCode::kInvalidConfig, "vertex count must be positive");
    if (vertex_count > (std::uint64_t{1} << 32)) throw Error(ErrorCode::kInvalidConfig, "vertex count too large");
    if (levels() < 2) throw Error(ErrorCode::kInvalidConfig, "need at least 2 levels");
    if (sketch_columns < 1 || sketch_columns > SketchConfig::kMaxColumns) {
      throw Error(ErrorCode::kInvalidConfig, "sketch columns out of range");
    }
    if (buffer_capacity < 1) throw Error(ErrorCode::kInvalidConfig, "buffer capacity must be positive");
    if (workers < 1) throw Error(ErrorCode::kInvalidConfig, "need at least one worker");
  }
};

struct EngineCounters {
  std::uint64_t updates = 0;
  std::uint64_t queries = 0;
  std::uint64_t isolated_updates = 0;  // induced at least one link or cut
  std::uint64_t normal_updates = 0;
  std::uint64_t links = 0;
  std::uint64_t cuts = 0;
  std::uint64_t flushes = 0;
  std::uint64_t reverted_updates = 0;
  std::uint64_t spurious_samples = 0;  // sampled edge inside the component
};

struct InvariantReport {
  std::vector<std::string> violations;
  bool clean() const noexcept { return violations.empty(); }
  std::string str() const {
    std::string out;
    for (const auto& v : violations) out += v + "\n";
    return out;
  }
};

/// Fully dynamic connectivity over vertices 0..V-1 from a stream of edge
/// insertions and deletions. Levels 0..top each hold a cutset forest with
/// F_0 empty and F_i a subforest of F_{i+1}; F_top is a spanning forest of
/// the graph (whp). A weighted link-cut tree mirrors F_top with each edge
/// weighted by the lowest level holding it, and a sketchless tour forest
/// answers queries.
class ConnectivityEngine {
 public:
  explicit ConnectivityEngine(const EngineConfig& cfg) : cfg_((cfg.validate(), cfg)), pool_(cfg.workers) {
    const std::uint32_t n = cfg_.levels();
    cfg_.num_levels = n;
    levels_.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      levels_.push_back(std::make_unique<CutsetLevel>(i, cfg_.vertex_count, cfg_.sketch_columns, cfg_.seed,
                                                      cfg_.height_mode));
    }
    tree_ = std::make_unique<LinkCutForest>(cfg_.vertex_count);
    query_forest_ = std::make_unique<EulerTourForest>(
        cfg_.vertex_count, std::nullopt,
        HeightDistribution::make(cfg_.height_mode, cfg_.vertex_count, hash_combine(cfg_.seed, 0x71e5ULL)));
  }

  ConnectivityEngine(const ConnectivityEngine&) = delete;
  ConnectivityEngine& operator=(const ConnectivityEngine&) = delete;

  const EngineConfig& config() const noexcept { return cfg_; }
  const EngineCounters& counters() const noexcept { return counters_; }
  std::uint32_t num_levels() const noexcept { return static_cast<std::uint32_t>(levels_.size()); }
  std::uint32_t top() const noexcept { return num_levels() - 1; }
  std::size_t pending() const noexcept { return buffer_.size(); }
  std::size_t forest_edge_count() const noexcept { return forest_edges_.size(); }
  WorkerPool& pool() noexcept { return pool_; }

  /// Direct access to one level, for tests and fault injection.
  CutsetLevel& level(std::uint32_t i) { return *levels_.at(i); }

  void insert(Vertex u, Vertex v) { update(u, v, false); }
  void erase(Vertex u, Vertex v) { update(u, v, true); }

  void update(Vertex u, Vertex v, bool is_deletion) {
    check_edge(u, v);
    if (cfg_.track_edges) track(u, v, is_deletion);
    ++counters_.updates;
    switch (cfg_.mode) {
      case UpdateMode::kSequential: update_sequential(u, v, is_deletion); break;
      case UpdateMode::kParallel: update_parallel(u, v, is_deletion); break;
      case UpdateMode::kBuffered:
        buffer_.push_back({is_deletion ? OpKind::kDelete : OpKind::kInsert, u, v});
        if (buffer_.size() >= cfg_.buffer_capacity) flush();
        break;
    }
  }

  bool connected(Vertex u, Vertex v) {
    if (u >= cfg_.vertex_count || v >= cfg_.vertex_count) {
      throw Error(ErrorCode::kInvalidQuery, "vertex out of range");
    }
    ++counters_.queries;
    flush();
    return query_forest_->connected(u, v);
  }

  /// Applies one stream op; returns the answer for queries.
  std::optional<bool> apply(const StreamOp& op) {
    if (op.kind == OpKind::kQuery) return connected(op.u, op.v);
    update(op.u, op.v, op.kind == OpKind::kDelete);
    return std::nullopt;
  }

  /// Processes every buffered update.
  void flush() {
    if (buffer_.empty()) return;
    std::vector<StreamOp> batch;
    batch.swap(buffer_);
    flush_batch(batch);
  }

  /// Component label (smallest vertex) of every vertex in F_top.
  std::vector<Vertex> components() {
    flush();
    return query_forest_->component_labels();
  }

  std::vector<Edge> spanning_forest() {
    flush();
    std::vector<Edge> out;
    for (auto idx : query_forest_->edges()) out.push_back(decode_edge(idx, cfg_.vertex_count));
    return out;
  }

  /// Insertion level of a forest edge, if (u, v) is one.
  std::optional<std::uint32_t> forest_level(Vertex u, Vertex v) const {
    if (u == v || u >= cfg_.vertex_count || v >= cfg_.vertex_count) return std::nullopt;
    auto it = forest_edges_.find(key(u, v));
    if (it == forest_edges_.end()) return std::nullopt;
    return it->second;
  }

  /// Canonical engine state: configuration, every level, the weighted tree,
  /// the query forest and the forest-edge map. Flushes first.
  std::vector<std::uint8_t> serialize() {
    flush();
    std::vector<std::uint8_t> out;
    Sketch::put_u64(out, cfg_.vertex_count);
    Sketch::put_u64(out, levels_.size());
    Sketch::put_u64(out, cfg_.sketch_columns);
    Sketch::put_u64(out, cfg_.seed);
    for (auto& level : levels_) level->serialize_to(out);
    const auto tree_edges = tree_->edges();
    Sketch::put_u64(out, tree_edges.size());
    for (auto [a, b, w] : tree_edges) {
      Sketch::put_u64(out, a);
      Sketch::put_u64(out, b);
      Sketch::put_u64(out, w);
    }
    query_forest_->serialize_to(out);
    std::vector<std::pair<std::uint64_t, std::uint32_t>> map(forest_edges_.begin(), forest_edges_.end());
    std::sort(map.begin(), map.end());
    Sketch::put_u64(out, map.size());
    for (auto [k, l] : map) {
      Sketch::put_u64(out, k);
      Sketch::put_u64(out, l);
    }
    return out;
  }

  /// Checks I1 (F_0 empty), I2 (F_i within F_{i+1}), I3 (no level-i
  /// component with a successful query equals its level-(i+1) component)
  /// and the mirror between F_top, the tree, the query forest and the map.
  /// Does not flush. `deep` also validates every skip list.
  InvariantReport check_invariants(bool deep = false) {
    InvariantReport report;
    auto& r = report.violations;
    const std::uint64_t n = cfg_.vertex_count;
    if (auto e = levels_[0]->forest().edge_count(); e != 0) r.push_back("I1: level 0 has " + std::to_string(e) + " edges");
    std::vector<std::vector<EdgeIndex>> level_edges(levels_.size());
    for (std::uint32_t i = 0; i < levels_.size(); ++i) level_edges[i] = levels_[i]->forest().edges();
    for (std::uint32_t i = 0; i < top(); ++i) {
      for (auto idx : level_edges[i]) {
        const auto [a, b] = decode_edge(idx, n);
        if (!levels_[i + 1]->has_edge(a, b)) {
          r.push_back("I2: edge (" + std::to_string(a) + "," + std::to_string(b) + ") at level " + std::to_string(i) +
                      " missing from level " + std::to_string(i + 1));
        }
      }
    }
    for (std::uint32_t i = 0; i < top(); ++i) {
      const auto labels = levels_[i]->forest().component_labels();
      for (Vertex v = 0; v < n; ++v) {
        if (labels[v] != v) continue;
        if (!levels_[i]->query(v)) continue;
        if (levels_[i]->component_size(v) == levels_[i + 1]->component_size(v)) {
          r.push_back("I3: level " + std::to_string(i) + " component of " + std::to_string(v) + " (size " +
                      std::to_string(levels_[i]->component_size(v)) + ") is isolated");
        }
      }
    }
    // mirror
    std::vector<std::uint64_t> top_edges, tree_edges, map_edges;
    for (auto idx : level_edges[top()]) top_edges.push_back(idx.value);
    for (auto [a, b, w] : tree_->edges()) tree_edges.push_back(key(a, b));
    for (auto [k, l] : forest_edges_) map_edges.push_back(k);
    std::vector<std::uint64_t> query_edges;
    for (auto idx : query_forest_->edges()) query_edges.push_back(idx.value);
    std::sort(tree_edges.begin(), tree_edges.end());
    std::sort(map_edges.begin(), map_edges.end());
    std::sort(top_edges.begin(), top_edges.end());
    std::sort(query_edges.begin(), query_edges.end());
    if (tree_edges != top_edges) r.push_back("mirror: tree edges differ from the top level");
    if (query_edges != top_edges) r.push_back("mirror: query forest differs from the top level");
    if (map_edges != top_edges) r.push_back("mirror: forest-edge map differs from the top level");
    for (auto [k, l] : forest_edges_) {
      const auto [a, b] = decode_edge(EdgeIndex{k}, n);
      std::uint32_t lowest = num_levels();
      for (std::uint32_t i = 0; i < num_levels(); ++i) {
        if (levels_[i]->has_edge(a, b)) {
          lowest = i;
          break;
        }
      }
      if (lowest != l) {
        r.push_back("mirror: edge (" + std::to_string(a) + "," + std::to_string(b) + ") mapped to level " +
                    std::to_string(l) + " but lowest level holding it is " + std::to_string(lowest));
      }
      if (tree_->has_edge(a, b) && tree_->weight(a, b) != l) {
        r.push_back("mirror: tree weight of (" + std::to_string(a) + "," + std::to_string(b) + ") is not its level");
      }
    }
    if (deep) {
      for (std::uint32_t i = 0; i < num_levels(); ++i) {
        if (auto msg = levels_[i]->forest().validate(); !msg.empty()) r.push_back("level " + std::to_string(i) + ": " + msg);
      }
      if (auto msg = query_forest_->validate(); !msg.empty()) r.push_back("query forest: " + msg);
    }
    return report;
  }

 private:
  struct RevertRecord {
    std::uint32_t index;  // position in the batch
    bool cut;             // a cut after the toggle
  };

  std::uint64_t key(Vertex u, Vertex v) const { return encode_edge(u, v, cfg_.vertex_count).value; }

  void check_edge(Vertex u, Vertex v) const {
    if (u >= cfg_.vertex_count || v >= cfg_.vertex_count) throw Error(ErrorCode::kInvalidEdge, "vertex out of range");
    if (u == v) throw Error(ErrorCode::kInvalidEdge, "self loop " + std::to_string(u));
  }

  void track(Vertex u, Vertex v, bool is_deletion) {
    const auto k = key(u, v);
    if (is_deletion) {
      if (present_.erase(k) == 0) throw Error(ErrorCode::kStreamViolation, "delete of an absent edge");
    } else if (!present_.insert(k).second) {
      throw Error(ErrorCode::kStreamViolation, "insert of a present edge");
    }
  }

  void count(bool structural) {
    if (structural) {
      ++counters_.isolated_updates;
    } else {
      ++counters_.normal_updates;
    }
  }

  // Level i is isolated at w: a successful query whose component did not grow at i+1.
  bool isolated(std::uint32_t i, Vertex w) {
    if (!levels_[i]->query(w)) return false;
    return levels_[i]->component_size(w) == levels_[i + 1]->component_size(w);
  }

  void update_sequential(Vertex u, Vertex v, bool is_deletion) {
    const auto cut_level = is_deletion ? forest_level(u, v) : std::nullopt;
    for (std::uint32_t i = 0; i < num_levels(); ++i) {
      levels_[i]->update(u, v);
      if (cut_level && i >= *cut_level) levels_[i]->cut(u, v);
    }
    if (cut_level) drop_top(u, v);
    const bool restored = restore(u, v, 0, false);
    count(cut_level.has_value() || restored);
  }

  void update_parallel(Vertex u, Vertex v, bool is_deletion) {
    const auto cut_level = is_deletion ? forest_level(u, v) : std::nullopt;
    pool_.parallel_for(num_levels(), [&](std::size_t i) {
      levels_[i]->update(u, v);
      if (cut_level && i >= *cut_level) levels_[i]->cut(u, v);
    });
    if (cut_level) drop_top(u, v);
    bool restored = false;
    if (auto min_level = lowest_violation(u, v)) restored = restore(u, v, *min_level, true);
    count(cut_level.has_value() || restored);
  }

  std::optional<std::uint32_t> lowest_violation(Vertex u, Vertex v) {
    std::vector<char> violation(top(), 0);
    pool_.parallel_for(top(), [&](std::size_t i) {
      const auto l = static_cast<std::uint32_t>(i);
      violation[i] = isolated(l, u) || isolated(l, v);
    });
    for (std::uint32_t i = 0; i < top(); ++i) {
      if (violation[i]) return i;
    }
    return std::nullopt;
  }

  // Restoration sweep from level `from` upward.
  bool restore(Vertex u, Vertex v, std::uint32_t from, bool parallel) {
    bool structural = false;
    for (std::uint32_t i = from; i < top(); ++i) {
      for (Vertex w : {u, v}) {
        const auto sample = levels_[i]->query(w);
        if (!sample) continue;
        if (levels_[i]->component_size(w) != levels_[i + 1]->component_size(w)) continue;
        const auto [a, b] = *sample;
        if (levels_[i]->connected(a, b)) {
          ++counters_.spurious_samples;
          continue;
        }
        if (cfg_.fault_drop_links) continue;
        if (tree_->connected(a, b)) {
          const PathMax heaviest = tree_->path_query(a, b);
          cut_from(heaviest.a, heaviest.b, static_cast<std::uint32_t>(heaviest.weight), parallel);
        }
        link_from(a, b, i + 1, parallel);
        structural = true;
      }
    }
    return structural;
  }

  void cut_from(Vertex a, Vertex b, std::uint32_t from, bool parallel) {
    if (parallel) {
      structural_op(StructuralOp::kCut, a, b, from);
    } else {
      for (std::uint32_t j = from; j < num_levels(); ++j) levels_[j]->cut(a, b);
    }
    drop_top(a, b);
  }

  void link_from(Vertex a, Vertex b, std::uint32_t from, bool parallel) {
    if (parallel) {
      structural_op(StructuralOp::kLink, a, b, from);
    } else {
      for (std::uint32_t j = from; j < num_levels(); ++j) levels_[j]->link(a, b);
    }
    tree_->link(a, b, from);
    query_forest_->link(a, b);
    forest_edges_[key(a, b)] = from;
    ++counters_.links;
  }

  void drop_top(Vertex a, Vertex b) {
    tree_->cut(a, b);
    query_forest_->cut(a, b);
    forest_edges_.erase(key(a, b));
    ++counters_.cuts;
  }

  // Link or cut on levels [from, top]: every level logs its sketch work,
  // then all (level, word block) pairs run in one parallel round.
  void structural_op(StructuralOp op, Vertex a, Vertex b, std::uint32_t from) {
    const std::size_t n = num_levels() - from;
    try {
      pool_.parallel_for(n, [&](std::size_t k) {
        CutsetLevel& level = *levels_[from + k];
        level.begin_structural();
        if (op == StructuralOp::kLink) {
          level.link(a, b);
        } else {
          level.cut(a, b);
        }
      });
      const std::size_t blocks = levels_[from]->block_count();
      pool_.parallel_for(n * blocks, [&](std::size_t t) { levels_[from + t / blocks]->execute_block(t % blocks); });
    } catch (...) {
      for (std::size_t k = 0; k < n; ++k) levels_[from + k]->finish_structural();
      throw;
    }
    for (std::size_t k = 0; k < n; ++k) levels_[from + k]->finish_structural();
  }

  void flush_batch(const std::vector<StreamOp>& batch) {
    ++counters_.flushes;
    const std::size_t n = batch.size();
    const std::uint32_t levels = num_levels();

    // forest edges deleted by the batch leave the top structures up front
    std::vector<std::optional<std::uint32_t>> cut_level(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (batch[j].kind != OpKind::kDelete) continue;
      cut_level[j] = forest_level(batch[j].u, batch[j].v);
      if (cut_level[j]) drop_top(batch[j].u, batch[j].v);
    }

    // phase A: every level runs the whole batch, logging its work and the
    // evidence needed to spot isolated components
    std::vector<std::vector<RevertRecord>> log(levels);
    std::vector<std::vector<char>> success(levels, std::vector<char>(2 * n, 0));
    std::vector<std::vector<std::uint64_t>> size(levels, std::vector<std::uint64_t>(2 * n, 0));
    pool_.parallel_for(levels, [&](std::size_t i) {
      CutsetLevel& level = *levels_[i];
      const bool has_above = i + 1 < levels;
      for (std::size_t j = 0; j < n; ++j) {
        const auto& op = batch[j];
        level.update(op.u, op.v);
        const bool cut = cut_level[j] && i >= *cut_level[j];
        if (cut) level.cut(op.u, op.v);
        log[i].push_back({static_cast<std::uint32_t>(j), cut});
        for (int s = 0; s < 2; ++s) {
          const Vertex w = s ? op.v : op.u;
          if (has_above) success[i][2 * j + s] = level.query(w).has_value();
          size[i][2 * j + s] = level.component_size(w);
        }
      }
    });

    // each level reports its earliest isolated index; take the minimum
    std::vector<std::size_t> earliest(levels, n);
    pool_.parallel_for(levels - 1, [&](std::size_t i) {
      for (std::size_t t = 0; t < 2 * n; ++t) {
        if (success[i][t] && size[i][t] == size[i + 1][t]) {
          earliest[i] = t / 2;
          break;
        }
      }
    });
    const std::size_t k = *std::min_element(earliest.begin(), earliest.end());

    for (std::size_t j = 0; j < std::min(k, n); ++j) count(cut_level[j].has_value());
    if (k == n) return;

    // undo updates k.. in reverse, then replay them one by one
    pool_.parallel_for(levels, [&](std::size_t i) {
      CutsetLevel& level = *levels_[i];
      while (!log[i].empty() && log[i].back().index >= k) {
        const RevertRecord rec = log[i].back();
        log[i].pop_back();
        const auto& op = batch[rec.index];
        if (rec.cut) level.link(op.u, op.v);
        level.update(op.u, op.v);
      }
    });
    for (std::size_t j = n; j-- > k;) {
      if (!cut_level[j]) continue;
      const auto& op = batch[j];
      tree_->link(op.u, op.v, *cut_level[j]);
      query_forest_->link(op.u, op.v);
      forest_edges_[key(op.u, op.v)] = *cut_level[j];
      --counters_.cuts;
    }
    counters_.reverted_updates += n - k;
    for (std::size_t j = k; j < n; ++j) update_parallel(batch[j].u, batch[j].v, batch[j].kind == OpKind::kDelete);
  }

  using LevelMap = std::unordered_map<std::uint64_t, std::uint32_t, std::hash<std::uint64_t>, std::equal_to<>,
                                      TrackedAllocator<std::pair<const std::uint64_t, std::uint32_t>>>;

  EngineConfig cfg_;
  WorkerPool pool_;
  std::vector<std::unique_ptr<CutsetLevel>> levels_;
  std::unique_ptr<LinkCutForest> tree_;
  std::unique_ptr<EulerTourForest> query_forest_;
  LevelMap forest_edges_;
  std::vector<StreamOp> buffer_;
  std::unordered_set<std::uint64_t> present_;
  EngineCounters counters_;
};

}  // namespace sketchconn
