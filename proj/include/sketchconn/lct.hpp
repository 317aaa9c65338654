#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sketchconn/error.hpp"
#include "sketchconn/memory.hpp"
#include "sketchconn/sketch.hpp"

namespace sketchconn {

struct PathMax {
  Vertex a;  // endpoint nearer the query's first vertex
  Vertex b;
  std::uint32_t weight;
  friend bool operator==(const PathMax&, const PathMax&) = default;
};

/// Link-cut tree over vertices 0..V-1 with weighted edges. Each edge is an
/// internal splay node between its endpoints; vertex nodes have weight -1.
/// Path queries return a maximum-weight edge, the one nearest the first
/// vertex among ties.
class LinkCutForest {
 public:
  explicit LinkCutForest(std::uint64_t vertex_count) : vertex_count_(vertex_count) {
    if (vertex_count == 0) throw Error(ErrorCode::kInvalidConfig, "empty vertex set");
    nodes_.resize(vertex_count);
    for (std::uint64_t v = 0; v < vertex_count; ++v) init(static_cast<int>(v), -1);
  }

  std::uint64_t vertex_count() const noexcept { return vertex_count_; }
  std::size_t edge_count() const noexcept { return edge_node_.size(); }

  bool connected(Vertex u, Vertex v) {
    check(u);
    check(v);
    if (u == v) return true;
    return find_root(static_cast<int>(u)) == find_root(static_cast<int>(v));
  }

  bool has_edge(Vertex u, Vertex v) const {
    if (u == v || u >= vertex_count_ || v >= vertex_count_) return false;
    return edge_node_.count(key(u, v)) != 0;
  }

  void link(Vertex u, Vertex v, std::uint32_t weight) {
    check(u);
    check(v);
    if (u == v) throw Error(ErrorCode::kInvalidEdge, "self loop");
    if (connected(u, v)) throw Error(ErrorCode::kIllegalLink, "endpoints already connected");
    int e;
    if (!free_.empty()) {
      e = free_.back();
      free_.pop_back();
    } else {
      e = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
    }
    init(e, static_cast<std::int64_t>(weight));
    nodes_[e].u = u;
    nodes_[e].v = v;
    edge_node_.emplace(key(u, v), e);
    link_nodes(static_cast<int>(u), e);
    link_nodes(e, static_cast<int>(v));
  }

  void cut(Vertex u, Vertex v) {
    check(u);
    check(v);
    auto it = u == v ? edge_node_.end() : edge_node_.find(key(u, v));
    if (it == edge_node_.end()) throw Error(ErrorCode::kIllegalCut, "edge not in forest");
    const int e = it->second;
    edge_node_.erase(it);
    cut_nodes(static_cast<int>(u), e);
    cut_nodes(e, static_cast<int>(v));
    free_.push_back(e);
  }

  std::uint32_t weight(Vertex u, Vertex v) const {
    auto it = u == v ? edge_node_.end() : edge_node_.find(key(u, v));
    if (it == edge_node_.end()) throw Error(ErrorCode::kIllegalCut, "edge not in forest");
    return static_cast<std::uint32_t>(nodes_[it->second].w);
  }

  PathMax path_query(Vertex u, Vertex v) {
    check(u);
    check(v);
    if (u == v || !connected(u, v)) throw Error(ErrorCode::kNoPath, "vertices are not joined by a path");
    evert(static_cast<int>(u));
    access(static_cast<int>(v));
    splay(static_cast<int>(v));
    const int e = at(static_cast<int>(v)).lm;
    // predecessor of e on the path is its endpoint nearer u
    splay(e);
    push(e);
    int p = at(e).ch[0];
    push(p);
    while (at(p).ch[1] >= 0) {
      p = at(p).ch[1];
      push(p);
    }
    splay(p);
    const Vertex near = static_cast<Vertex>(p);
    const Vertex far = at(e).u == near ? at(e).v : at(e).u;
    return {near, far, static_cast<std::uint32_t>(at(e).w)};
  }

  /// (u, v, weight) with u < v, sorted.
  std::vector<std::tuple<Vertex, Vertex, std::uint32_t>> edges() const {
    std::vector<std::tuple<Vertex, Vertex, std::uint32_t>> out;
    for (const auto& [k, e] : edge_node_) {
      const auto& n = nodes_[e];
      out.emplace_back(std::min(n.u, n.v), std::max(n.u, n.v), static_cast<std::uint32_t>(n.w));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct Node {
    int ch[2] = {-1, -1};
    int p = -1;
    bool rev = false;
    std::int64_t w = -1;
    std::int64_t mx = -1;
    int lm = 0;  // leftmost node attaining mx
    int rm = 0;  // rightmost node attaining mx
    Vertex u = 0;
    Vertex v = 0;
  };

  // vertices are nodes 0..V-1, edge nodes follow; -1 is null
  void init(int x, std::int64_t w) {
    Node& n = at(x);
    n = Node{};
    n.w = w;
    n.mx = w;
    n.lm = n.rm = x;
  }

  Node& at(int x) { return nodes_[static_cast<std::size_t>(x)]; }
  const Node& at(int x) const { return nodes_[static_cast<std::size_t>(x)]; }

  bool is_root(int x) {
    const int p = at(x).p;
    return p < 0 || (at(p).ch[0] != x && at(p).ch[1] != x);
  }

  void pull(int x) {
    Node& n = at(x);
    n.mx = n.w;
    n.lm = n.rm = x;
    const int l = n.ch[0];
    const int r = n.ch[1];
    if (l >= 0) {
      const Node& L = at(l);
      if (L.mx >= n.mx) {
        n.lm = L.lm;
        if (L.mx > n.mx) n.rm = L.rm;
        n.mx = L.mx;
      }
    }
    if (r >= 0) {
      const Node& R = at(r);
      if (R.mx > n.mx) {
        n.mx = R.mx;
        n.lm = R.lm;
        n.rm = R.rm;
      } else if (R.mx == n.mx) {
        n.rm = R.rm;
      }
    }
  }

  void flip(int x) {
    if (x < 0) return;
    Node& n = at(x);
    std::swap(n.ch[0], n.ch[1]);
    std::swap(n.lm, n.rm);
    n.rev = !n.rev;
  }

  void push(int x) {
    if (x < 0) return;
    Node& n = at(x);
    if (n.rev) {
      flip(n.ch[0]);
      flip(n.ch[1]);
      n.rev = false;
    }
  }

  void rotate(int x) {
    const int p = at(x).p;
    const int g = at(p).p;
    const int dir = at(p).ch[1] == x ? 1 : 0;
    const int b = at(x).ch[dir ^ 1];
    if (!is_root(p)) {
      if (at(g).ch[0] == p) {
        at(g).ch[0] = x;
      } else {
        at(g).ch[1] = x;
      }
    }
    at(x).p = g;
    at(x).ch[dir ^ 1] = p;
    at(p).p = x;
    at(p).ch[dir] = b;
    if (b >= 0) at(b).p = p;
    pull(p);
    pull(x);
  }

  void splay(int x) {
    stack_.clear();
    for (int y = x;; y = at(y).p) {
      stack_.push_back(y);
      if (is_root(y)) break;
    }
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) push(*it);
    while (!is_root(x)) {
      const int p = at(x).p;
      if (!is_root(p)) {
        const int g = at(p).p;
        const bool zigzig = (at(g).ch[0] == p) == (at(p).ch[0] == x);
        rotate(zigzig ? p : x);
      }
      rotate(x);
    }
  }

  void access(int x) {
    int last = -1;
    for (int y = x; y >= 0; y = at(y).p) {
      splay(y);
      at(y).ch[1] = last;
      pull(y);
      last = y;
    }
    splay(x);
  }

  void evert(int x) {
    access(x);
    flip(x);
  }

  int find_root(int x) {
    access(x);
    int r = x;
    push(r);
    while (at(r).ch[0] >= 0) {
      r = at(r).ch[0];
      push(r);
    }
    splay(r);
    return r;
  }

  void link_nodes(int x, int y) {
    evert(x);
    at(x).p = y;
  }

  void cut_nodes(int x, int y) {
    evert(x);
    access(y);
    // y's left subtree is exactly x
    at(y).ch[0] = -1;
    at(x).p = -1;
    pull(y);
  }

  void check(Vertex v) const {
    if (v >= vertex_count_) throw Error(ErrorCode::kInvalidEdge, "vertex " + std::to_string(v) + " out of range");
  }
  std::uint64_t key(Vertex u, Vertex v) const { return encode_edge(u, v, vertex_count_).value; }

  std::uint64_t vertex_count_;
  std::vector<Node, TrackedAllocator<Node>> nodes_;
  std::vector<int> free_;
  std::unordered_map<std::uint64_t, int> edge_node_;
  std::vector<int> stack_;
};

}  // namespace sketchconn
