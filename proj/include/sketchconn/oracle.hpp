#pragma once

#include <cstdint>
#include <numeric>
#include <queue>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sketchconn/error.hpp"
#include "sketchconn/sketch.hpp"
#include "sketchconn/stream.hpp"

namespace sketchconn {

/// Lossless edge set with BFS connectivity.
class ShadowGraph {
 public:
  explicit ShadowGraph(std::uint64_t vertex_count) : vertex_count_(vertex_count), adj_(vertex_count) {}

  std::uint64_t vertex_count() const noexcept { return vertex_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  bool has_edge(Vertex u, Vertex v) const {
    if (u == v || u >= vertex_count_ || v >= vertex_count_) return false;
    return edges_.count(encode_edge(u, v, vertex_count_).value) != 0;
  }

  void apply(const StreamOp& op) {
    if (op.kind == OpKind::kQuery) return;
    const auto key = encode_edge(op.u, op.v, vertex_count_).value;
    if (op.kind == OpKind::kInsert) {
      if (!edges_.insert(key).second) throw Error(ErrorCode::kStreamViolation, "insert of a present edge");
      adj_[op.u].insert(op.v);
      adj_[op.v].insert(op.u);
    } else {
      if (edges_.erase(key) == 0) throw Error(ErrorCode::kStreamViolation, "delete of an absent edge");
      adj_[op.u].erase(op.v);
      adj_[op.v].erase(op.u);
    }
  }

  bool connected(Vertex u, Vertex v) const {
    if (u == v) return true;
    std::vector<char> seen(vertex_count_, 0);
    std::vector<Vertex> stack{u};
    seen[u] = 1;
    while (!stack.empty()) {
      const Vertex x = stack.back();
      stack.pop_back();
      for (Vertex y : adj_[x]) {
        if (y == v) return true;
        if (!seen[y]) {
          seen[y] = 1;
          stack.push_back(y);
        }
      }
    }
    return false;
  }

  /// Component label (smallest vertex id) per vertex, by repeated BFS.
  std::vector<Vertex> components() const {
    std::vector<Vertex> label(vertex_count_, static_cast<Vertex>(vertex_count_));
    for (std::uint64_t s = 0; s < vertex_count_; ++s) {
      if (label[s] != vertex_count_) continue;
      std::queue<Vertex> q;
      q.push(static_cast<Vertex>(s));
      label[s] = static_cast<Vertex>(s);
      while (!q.empty()) {
        const Vertex x = q.front();
        q.pop();
        for (Vertex y : adj_[x]) {
          if (label[y] == vertex_count_) {
            label[y] = static_cast<Vertex>(s);
            q.push(y);
          }
        }
      }
    }
    return label;
  }

  std::vector<std::pair<Vertex, Vertex>> edge_list() const {
    std::vector<std::pair<Vertex, Vertex>> out;
    for (auto key : edges_) out.push_back(decode_edge(EdgeIndex{key}, vertex_count_));
    std::sort(out.begin(), out.end());
    return out;
  }

  const std::unordered_set<Vertex>& neighbors(Vertex v) const { return adj_[v]; }

 private:
  std::uint64_t vertex_count_;
  std::unordered_set<std::uint64_t> edges_;
  std::vector<std::unordered_set<Vertex>> adj_;
};

/// Second, independently coded oracle: keeps an edge list and rebuilds a
/// union-find from scratch whenever the edge set changed since the last
/// question.
class RebuildUnionFind {
 public:
  explicit RebuildUnionFind(std::uint64_t vertex_count) : vertex_count_(vertex_count), parent_(vertex_count) {}

  void apply(const StreamOp& op) {
    if (op.kind == OpKind::kQuery) return;
    const Vertex a = std::min(op.u, op.v);
    const Vertex b = std::max(op.u, op.v);
    const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
    if (op.kind == OpKind::kInsert) {
      if (!index_.emplace(key, edges_.size()).second) throw Error(ErrorCode::kStreamViolation, "duplicate insert");
      edges_.push_back(key);
    } else {
      auto it = index_.find(key);
      if (it == index_.end()) throw Error(ErrorCode::kStreamViolation, "delete of an absent edge");
      const std::size_t pos = it->second;
      index_.erase(it);
      if (pos + 1 != edges_.size()) {
        edges_[pos] = edges_.back();
        index_[edges_[pos]] = pos;
      }
      edges_.pop_back();
    }
    dirty_ = true;
  }

  bool connected(Vertex u, Vertex v) {
    rebuild();
    return find(u) == find(v);
  }

  std::size_t component_count() {
    rebuild();
    std::size_t n = 0;
    for (std::uint64_t v = 0; v < vertex_count_; ++v) n += find(static_cast<Vertex>(v)) == v;
    return n;
  }

 private:
  void rebuild() {
    if (!dirty_) return;
    std::iota(parent_.begin(), parent_.end(), 0);
    for (auto key : edges_) {
      const Vertex a = find(static_cast<Vertex>(key >> 32));
      const Vertex b = find(static_cast<Vertex>(key & 0xffffffffu));
      if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }
    dirty_ = false;
  }

  Vertex find(Vertex x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  std::uint64_t vertex_count_;
  std::vector<Vertex> parent_;
  std::vector<std::uint64_t> edges_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  bool dirty_ = true;
};

}  // namespace sketchconn
