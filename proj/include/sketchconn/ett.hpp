#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sketchconn/aggregate.hpp"
#include "sketchconn/error.hpp"
#include "sketchconn/skiplist.hpp"
#include "sketchconn/sketch.hpp"

namespace sketchconn {

struct TourItem {
  Vertex vertex = 0;
};

/// Dynamic forest over vertices 0..V-1. Each component is stored as a
/// vertex-occurrence tour x0 .. xm with xm a closing occurrence of x0's
/// vertex, so a component of k vertices has 2(k-1)+1 occurrences. The arc
/// x_i -> x_{i+1} is owned by x_i; the closing occurrence owns no arc.
/// Exactly one occurrence per vertex is designated and carries the vertex's
/// sketch and a count of 1; all others carry an absent sketch and count 0.
class EulerTourForest {
 public:
  using Forest = SkipForest<TourItem, ComponentAggregate, AggregatePolicy>;
  using Node = Forest::Node;

  EulerTourForest(std::uint64_t vertex_count, std::optional<SketchConfig> sketch_cfg, HeightDistribution dist)
      : vertex_count_(vertex_count), policy_(sketch_cfg), forest_(policy_, dist) {
    if (vertex_count == 0 || vertex_count > (std::uint64_t{1} << 32)) {
      throw Error(ErrorCode::kInvalidConfig, "vertex count out of range");
    }
    designated_.resize(vertex_count);
    for (std::uint64_t v = 0; v < vertex_count; ++v) {
      ComponentAggregate payload;
      payload.count = 1;
      if (sketch_cfg) payload.sketch = Sketch(*sketch_cfg);
      designated_[v] = forest_.make(TourItem{static_cast<Vertex>(v)}, std::move(payload));
    }
  }

  EulerTourForest(const EulerTourForest&) = delete;
  EulerTourForest& operator=(const EulerTourForest&) = delete;

  ~EulerTourForest() {
    for (Node* head : heads()) forest_.destroy_list(head);
  }

  std::uint64_t vertex_count() const noexcept { return vertex_count_; }
  bool augmented() const noexcept { return policy_.augmented(); }
  AggregatePolicy& policy() noexcept { return policy_; }
  const AggregatePolicy& policy() const noexcept { return policy_; }
  Forest& skip_forest() noexcept { return forest_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  bool connected(Vertex u, Vertex v) {
    check_vertex(u);
    check_vertex(v);
    if (u == v) return true;
    return forest_.find_root(designated_[u]) == forest_.find_root(designated_[v]);
  }

  bool has_edge(Vertex u, Vertex v) const {
    if (u == v || u >= vertex_count_ || v >= vertex_count_) return false;
    return edges_.count(key(u, v)) != 0;
  }

  const ComponentAggregate& component_aggregate(Vertex v) {
    check_vertex(v);
    return forest_.root_aggregate(designated_[v]);
  }

  std::uint64_t component_size(Vertex v) { return component_aggregate(v).count; }

  /// Head occurrence of v's tour; equal for exactly the vertices of one component.
  const Node* component_root(Vertex v) {
    check_vertex(v);
    return forest_.find_root(designated_[v]);
  }

  void vertex_apply(Vertex v, const SketchDelta& delta) {
    check_vertex(v);
    if (!augmented()) throw Error(ErrorCode::kUnsupported, "sketch update on a sketchless forest");
    forest_.point_apply(designated_[v], [&](ComponentAggregate& agg) { agg.sketch.apply(delta); });
  }

  const Sketch& vertex_sketch(Vertex v) const {
    check_vertex(v);
    return designated_[v]->payload().sketch;
  }

  void link(Vertex u, Vertex v) {
    check_edge(u, v);
    if (connected(u, v)) {
      throw Error(ErrorCode::kIllegalLink, std::to_string(u) + " and " + std::to_string(v) + " already connected");
    }
    Forest::Batch batch(forest_);
    reroot(v);
    Node* lv = forest_.find_root(designated_[v]);
    Node* cv = lv->tail;
    Node* nu = designated_[u];
    auto [before, from_nu] = forest_.split(nu);
    Node* nw = forest_.make(TourItem{u}, ComponentAggregate{});
    Node* head = forest_.join(before, nw);
    head = forest_.join(head, lv);
    forest_.join(head, from_nu);
    edges_[key(u, v)] = u < v ? std::pair{nw, cv} : std::pair{cv, nw};
  }

  void cut(Vertex u, Vertex v) {
    check_edge(u, v);
    auto it = edges_.find(key(u, v));
    if (it == edges_.end()) {
      throw Error(ErrorCode::kIllegalCut, "(" + std::to_string(u) + "," + std::to_string(v) + ") is not a forest edge");
    }
    Node* nu = u < v ? it->second.first : it->second.second;
    Node* nv = u < v ? it->second.second : it->second.first;
    edges_.erase(it);
    Forest::Batch batch(forest_);

    Node* su = nu->next();
    Node* sv = nv->next();
    auto [l1, l2] = forest_.split(su);
    if (forest_.find_root(nv) == l2) {
      // l1 = P.nu, l2 = [su .. nv].sv.Q
      auto rest = forest_.split(sv).second;
      Node* p = forest_.split(nu).first;
      if (designated_[u] == nu) migrate(nu, sv);
      forest_.join(p, rest);
      forest_.destroy(nu);
    } else {
      // l1 = P.nv.[sv .. nu], l2 = su.Q
      forest_.split(sv);
      Node* p = forest_.split(nv).first;
      if (designated_[v] == nv) migrate(nv, su);
      forest_.join(p, l2);
      forest_.destroy(nv);
    }
  }

  /// Rotates v's tour so that it starts (and closes) at v.
  void reroot(Vertex v) {
    check_vertex(v);
    Node* dv = designated_[v];
    Node* head = forest_.find_root(dv);
    if (head->item.vertex == v) return;
    Forest::Batch batch(forest_);
    Node* closing = head->tail;
    const Vertex r = head->item.vertex;
    if (designated_[r] == closing) migrate(closing, head);
    forest_.split(closing);
    Node* before = forest_.split(dv).first;
    Node* rotated = forest_.join(dv, before);
    closing->item.vertex = v;
    forest_.join(rotated, closing);
  }

  /// Edges of the forest as sorted edge indices.
  std::vector<EdgeIndex> edges() const {
    std::vector<EdgeIndex> out;
    out.reserve(edges_.size());
    for (const auto& [k, nodes] : edges_) out.push_back(EdgeIndex{k});
    std::sort(out.begin(), out.end());
    return out;
  }

  /// For each vertex, the smallest vertex id in its component.
  std::vector<Vertex> component_labels() {
    std::vector<Vertex> labels(vertex_count_);
    std::unordered_map<const Node*, Vertex> first_seen;
    for (std::uint64_t v = 0; v < vertex_count_; ++v) {
      const Node* root = forest_.find_root(designated_[v]);
      auto [it, inserted] = first_seen.emplace(root, static_cast<Vertex>(v));
      labels[v] = it->second;
    }
    return labels;
  }

  /// Canonical state: independent of tour rotation, node identities and
  /// tower heights, so equal forests with equal sketches serialize equally.
  void serialize_to(std::vector<std::uint8_t>& out) {
    Sketch::put_u64(out, vertex_count_);
    out.push_back(augmented() ? 1 : 0);
    const auto labels = component_labels();
    for (Vertex label : labels) Sketch::put_u64(out, label);
    if (augmented()) {
      for (std::uint64_t v = 0; v < vertex_count_; ++v) put_sketch(out, designated_[v]->payload().sketch);
    }
    for (std::uint64_t v = 0; v < vertex_count_; ++v) {
      if (labels[v] != v) continue;
      const auto& agg = forest_.root_aggregate(designated_[v]);
      Sketch::put_u64(out, agg.count);
      if (augmented()) put_sketch(out, agg.sketch);
    }
    const auto sorted = edges();
    Sketch::put_u64(out, sorted.size());
    for (EdgeIndex e : sorted) Sketch::put_u64(out, e.value);
  }

  std::vector<std::uint8_t> serialize() {
    std::vector<std::uint8_t> out;
    serialize_to(out);
    return out;
  }

  /// Debug dump: one tour per line as vertex ids, '*' marking designated
  /// occurrences.
  std::string dump_tours() {
    std::ostringstream out;
    for (Node* head : heads()) {
      for (Node* x = head; x; x = x->next()) {
        out << x->item.vertex << (designated_[x->item.vertex] == x ? "*" : "") << (x->next() ? " " : "");
      }
      out << '\n';
    }
    return out.str();
  }

  /// Full structural audit. Returns an empty string when consistent.
  std::string validate() {
    std::ostringstream err;
    const auto equal = [](const ComponentAggregate& a, const ComponentAggregate& b) {
      return a.count == b.count && a.sketch == b.sketch;
    };
    std::vector<int> designated_seen(vertex_count_, 0);
    std::size_t arcs = 0;
    std::uint64_t total = 0;
    for (Node* head : heads()) {
      if (auto msg = forest_.validate(head, equal); !msg.empty()) return "skip list: " + msg;
      std::uint64_t occurrences = 0;
      std::vector<Vertex> members;
      for (Node* x = head; x; x = x->next()) {
        ++occurrences;
        const Vertex w = x->item.vertex;
        if (w >= vertex_count_) return "occurrence with bad vertex";
        const bool is_designated = designated_[w] == x;
        if (is_designated) {
          ++designated_seen[w];
          members.push_back(w);
          if (x->payload().count != 1) return "designated occurrence count != 1";
          if (augmented() && x->payload().sketch.absent()) return "designated occurrence lost its sketch";
        } else if (x->payload().count != 0 || !x->payload().sketch.absent()) {
          err << "non-designated occurrence of " << w << " carries a payload";
          return err.str();
        }
        if (Node* y = x->next()) {
          const Vertex z = y->item.vertex;
          if (z == w) return "repeated vertex in tour";
          auto it = edges_.find(key(w, z));
          if (it == edges_.end()) {
            err << "tour step " << w << "->" << z << " has no edge";
            return err.str();
          }
          Node* owner = w < z ? it->second.first : it->second.second;
          if (owner != x) return "arc owner mismatch";
          ++arcs;
        }
      }
      if (head->tail->item.vertex != head->item.vertex) return "tour does not close at its start vertex";
      const std::uint64_t k = members.size();
      if (occurrences != 2 * (k - 1) + 1) {
        err << "component of " << k << " vertices has " << occurrences << " occurrences";
        return err.str();
      }
      if (head->levels.back().agg.count != k) return "root count differs from vertex count";
      total += k;
    }
    for (std::uint64_t v = 0; v < vertex_count_; ++v) {
      if (designated_seen[v] != 1) {
        err << "vertex " << v << " designated " << designated_seen[v] << " times";
        return err.str();
      }
    }
    if (total != vertex_count_) return "counts do not sum to V";
    if (arcs != 2 * edges_.size()) return "edge records without arcs";
    return {};
  }

  /// Distinct list heads, in order of their smallest vertex.
  std::vector<Node*> heads() {
    std::vector<Node*> out;
    std::unordered_map<Node*, bool> seen;
    for (Node* d : designated_) {
      Node* root = forest_.find_root(d);
      if (seen.emplace(root, true).second) out.push_back(root);
    }
    return out;
  }

  Node* designated(Vertex v) const { return designated_[v]; }

 private:
  static void put_sketch(std::vector<std::uint8_t>& out, const Sketch& s) {
    for (auto w : s.serialize()) out.push_back(w);
  }

  void migrate(Node* from, Node* to) {
    forest_.ancestors_apply(from, [&](ComponentAggregate& agg) { policy_.sub(agg, from->payload()); });
    std::swap(from->payload(), to->payload());
    forest_.ancestors_apply(to, [&](ComponentAggregate& agg) { policy_.add(agg, to->payload()); });
    designated_[to->item.vertex] = to;
  }

  std::uint64_t key(Vertex u, Vertex v) const { return encode_edge(u, v, vertex_count_).value; }

  void check_vertex(Vertex v) const {
    if (v >= vertex_count_) throw Error(ErrorCode::kInvalidEdge, "vertex " + std::to_string(v) + " out of range");
  }
  void check_edge(Vertex u, Vertex v) const {
    check_vertex(u);
    check_vertex(v);
    if (u == v) throw Error(ErrorCode::kInvalidEdge, "self loop");
  }

  using EdgeMap = std::unordered_map<std::uint64_t, std::pair<Node*, Node*>, std::hash<std::uint64_t>,
                                     std::equal_to<>, TrackedAllocator<std::pair<const std::uint64_t, std::pair<Node*, Node*>>>>;

  std::uint64_t vertex_count_;
  AggregatePolicy policy_;
  Forest forest_;
  std::vector<Node*> designated_;
  EdgeMap edges_;
};

}  // namespace sketchconn
