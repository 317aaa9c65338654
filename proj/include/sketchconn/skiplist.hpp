#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "sketchconn/error.hpp"
#include "sketchconn/memory.hpp"
#include "sketchconn/random.hpp"

namespace sketchconn {

enum class HeightMode { kReduced, kClassic };

/// Tower heights are 1 + Geometric: P(height > h) = p^h.
struct HeightDistribution {
  double promotion_probability = 0.5;
  std::uint64_t seed = 1;

  static constexpr std::uint32_t kMaxHeight = 40;

  static HeightDistribution reduced(std::uint64_t vertex_count, std::uint64_t seed) {
    const double lg = std::max(2.0, std::log2(static_cast<double>(std::max<std::uint64_t>(vertex_count, 1))));
    return {1.0 / lg, seed};
  }
  static HeightDistribution classic(std::uint64_t seed) { return {0.5, seed}; }
  static HeightDistribution make(HeightMode mode, std::uint64_t vertex_count, std::uint64_t seed) {
    return mode == HeightMode::kReduced ? reduced(vertex_count, seed) : classic(seed);
  }

  std::uint32_t sample(Rng& rng) const {
    std::uint32_t h = 1;
    while (h < kMaxHeight && uniform_unit(rng) < promotion_probability) ++h;
    return h;
  }
};

/// One element of a skip list. Non-head nodes have levels.size() == height.
/// The head of a list is virtually tall: it carries levels up to one above
/// the tallest tower in the list, so its top aggregate covers the whole list.
template <class Item, class Value>
struct SkipNode {
  struct Level {
    SkipNode* left = nullptr;
    SkipNode* right = nullptr;
    Value agg{};
  };
  static_assert(std::is_nothrow_move_constructible_v<Value>);

  std::vector<Level, TrackedAllocator<Level>> levels;
  // nearest node to the left with more levels; null only at the head
  SkipNode* parent = nullptr;
  SkipNode* tail = nullptr;  // head only
  std::uint32_t height = 1;
  std::uint64_t id = 0;
  Item item{};

  std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(levels.size()); }
  bool is_head() const noexcept { return parent == nullptr; }
  SkipNode* next() const noexcept { return levels[0].right; }
  SkipNode* prev() const noexcept { return levels[0].left; }
  const Value& payload() const noexcept { return levels[0].agg; }
  Value& payload() noexcept { return levels[0].agg; }
};

struct SkipStats {
  std::uint64_t last_path = 0;  // nodes visited by the most recent split/join
  std::uint64_t max_path = 0;
  std::uint64_t splits = 0;
  std::uint64_t joins = 0;
};

/// Owns the node allocation and height RNG for a family of skip lists.
/// Policy supplies init_upper(v), zero(v), add(dst, src), sub(dst, src) and
/// retire(v) over Value.
template <class Item, class Value, class Policy>
class SkipForest {
 public:
  using Node = SkipNode<Item, Value>;
  static constexpr std::uint32_t kMaxLevels = HeightDistribution::kMaxHeight + 2;

  SkipForest(Policy& policy, HeightDistribution dist) : policy_(&policy), dist_(dist), rng_(dist.seed) {}
  SkipForest(const SkipForest&) = delete;
  SkipForest& operator=(const SkipForest&) = delete;

  Policy& policy() noexcept { return *policy_; }
  const HeightDistribution& distribution() const noexcept { return dist_; }
  SkipStats& stats() noexcept { return stats_; }
  const SkipStats& stats() const noexcept { return stats_; }

  Node* make(Item item, Value payload) { return make_with_height(dist_.sample(rng_), item, std::move(payload)); }

  Node* make_with_height(std::uint32_t height, Item item, Value payload) {
    height = std::clamp<std::uint32_t>(height, 1, HeightDistribution::kMaxHeight);
    Node* n = tracked_new<Node>();
    n->height = height;
    n->id = next_id_++;
    n->item = item;
    n->tail = n;
    n->levels.resize(height + 1);
    n->levels[0].agg = std::move(payload);
    for (std::uint32_t j = 1; j <= height; ++j) {
      policy_->init_upper(n->levels[j].agg);
      recompute(n, j);
    }
    return n;
  }

  /// Frees a singleton list.
  void destroy(Node* n) {
    if (!n) return;
    flush_dirty();
    if (n->parent || n->tail != n || n->levels[0].right) {
      throw Error(ErrorCode::kCorruption, "destroy on a non-singleton list");
    }
    for (auto& level : n->levels) policy_->retire(level.agg);
    tracked_delete(n);
  }

  /// Frees every node of the list headed by head.
  void destroy_list(Node* head) {
    flush_dirty();
    while (head) {
      Node* next = head->levels[0].right;
      for (auto& level : head->levels) policy_->retire(level.agg);
      tracked_delete(head);
      head = next;
    }
  }

  /// While a batch is open, split and join only mark the aggregates they
  /// invalidate; closing the outermost batch refolds each marked aggregate
  /// once, lowest level first. Aggregates are stale inside a batch.
  void begin_batch() noexcept { ++batch_depth_; }
  void end_batch() {
    if (batch_depth_ && --batch_depth_ == 0) flush_dirty();
  }

  struct Batch {
    explicit Batch(SkipForest& f) : forest(f) { forest.begin_batch(); }
    ~Batch() { forest.end_batch(); }
    Batch(const Batch&) = delete;
    Batch& operator=(const Batch&) = delete;
    SkipForest& forest;
  };

  // read-only, so concurrent queries on one list are safe
  static Node* find_root(Node* n) {
    while (n->parent) n = n->parent;
    return n;
  }

  /// Parent hops from n to its root.
  static std::uint32_t root_distance(const Node* n) {
    std::uint32_t hops = 0;
    for (; n->parent; n = n->parent) ++hops;
    return hops;
  }

  static const Value& root_aggregate(Node* n) { return find_root(n)->levels.back().agg; }

  /// Calls f on every aggregate whose span contains n, bottom-up.
  template <class F>
  void point_apply(Node* n, F&& f) {
    walk_ancestors(n, 0, f);
  }

  /// As point_apply but skipping n's payload.
  template <class F>
  void ancestors_apply(Node* n, F&& f) {
    walk_ancestors(n, 1, f);
  }

  void point_update(Node* n, const Value& delta) {
    point_apply(n, [&](Value& agg) { policy_->add(agg, delta); });
  }

  /// Splits the list headed by head into [head, at) and [at, ...).
  std::pair<Node*, Node*> split(Node* head, Node* at) {
    if (!head || !at) throw Error(ErrorCode::kWrongList, "split on a null list");
    if (find_root(at) != head) throw Error(ErrorCode::kWrongList, "split point is not in the list");
    return split(at);
  }

  /// Splits at's list just before at; returns (left head or null, at).
  std::pair<Node*, Node*> split(Node* at) {
    Node* head = find_root(at);
    if (at == head) return {nullptr, head};
    ++stats_.splits;
    std::uint64_t path = 0;
    const std::uint32_t top = head->size() - 1;
    std::array<Node*, kMaxLevels> last{};
    std::array<Node*, kMaxLevels> first{};

    Node* y = at->levels[0].left;
    for (std::uint32_t j = 0; j <= top; ++j) {
      while (y->size() <= j) {
        y = y->parent;
        ++path;
      }
      last[j] = y;
    }
    const std::uint32_t s_at = at->size();
    std::uint32_t right_top = s_at;
    std::uint32_t left_top = head->height;
    for (std::uint32_t j = 0; j <= top; ++j) {
      first[j] = j < s_at ? at : last[j]->levels[j].right;
      if (first[j]) right_top = std::max(right_top, j + 1);
      if (last[j] != head) left_top = std::max(left_top, j + 1);
    }
    // nodes of R with no strictly taller node before them in R had their
    // parent in L; at becomes the virtually tall head they hang from
    for (std::uint32_t j = s_at - 1; j < top; ++j) {
      Node* x = j < s_at ? at->levels[j].right : first[j];
      for (; x && x->size() == j + 1; x = x->levels[j].right) {
        x->parent = at;
        ++path;
      }
    }
    for (std::uint32_t j = 0; j <= top; ++j) {
      last[j]->levels[j].right = nullptr;
      if (first[j]) first[j]->levels[j].left = nullptr;
    }

    at->parent = nullptr;
    at->tail = head->tail;
    at->levels.resize(right_top + 1);
    for (std::uint32_t j = s_at; j <= right_top; ++j) {
      auto& level = at->levels[j];
      level.left = nullptr;
      level.right = first[j];
      if (first[j]) first[j]->levels[j].left = at;
      policy_->init_upper(level.agg);
    }
    for (std::uint32_t j = s_at; j <= right_top; ++j) path += touch(at, j);

    for (std::uint32_t j = left_top + 1; j <= top; ++j) policy_->retire(head->levels[j].agg);
    head->levels.resize(left_top + 1);
    for (std::uint32_t j = 1; j <= left_top; ++j) path += touch(last[j], j);
    head->tail = last[0];

    note_path(path);
    return {head, at};
  }

  /// Concatenates the lists headed by a and b; returns the new head.
  Node* join(Node* a, Node* b) {
    if (!a) return b;
    if (!b) return a;
    if (a == b || a->parent || b->parent) throw Error(ErrorCode::kCorruption, "join of overlapping lists");
    ++stats_.joins;
    std::uint64_t path = 0;
    const std::uint32_t top_a = a->size() - 1;
    const std::uint32_t top_b = b->size() - 1;
    const std::uint32_t hb = b->height;
    const std::uint32_t top = std::max(top_a, top_b);
    std::array<Node*, kMaxLevels> last{};
    std::array<Node*, kMaxLevels> target{};

    Node* y = a->tail;
    for (std::uint32_t j = 0; j <= top_a; ++j) {
      while (y->size() <= j) {
        y = y->parent;
        ++path;
      }
      last[j] = y;
    }
    a->levels.resize(top + 1);
    for (std::uint32_t j = top_a + 1; j <= top; ++j) {
      policy_->init_upper(a->levels[j].agg);
      last[j] = a;
    }
    for (std::uint32_t j = 0; j <= top; ++j) {
      target[j] = j < hb ? b : (j <= top_b ? b->levels[j].right : nullptr);
    }

    // nodes that hung from b's virtual levels move to their nearest taller
    // node in a
    for (std::uint32_t j = hb - 1; j < top_b; ++j) {
      for (Node* x = b->levels[j].right; x && x->size() == j + 1; x = x->levels[j].right) {
        x->parent = last[j + 1];
        ++path;
      }
    }
    b->parent = last[hb];
    for (std::uint32_t j = 0; j <= top; ++j) {
      last[j]->levels[j].right = target[j];
      if (target[j]) target[j]->levels[j].left = last[j];
    }

    Node* b_tail = b->tail;
    for (std::uint32_t j = hb; j <= top_b; ++j) policy_->retire(b->levels[j].agg);
    b->levels.resize(hb);
    b->tail = nullptr;
    for (std::uint32_t j = 1; j <= top; ++j) path += touch(last[j], j);
    a->tail = b_tail;

    note_path(path);
    return a;
  }

  /// Builds a list from payloads in order.
  template <class Range>
  Node* make_list(const Range& items) {
    Node* head = nullptr;
    for (const auto& [item, payload] : items) head = join(head, make(item, payload));
    return head;
  }

  /// Backward search path length from n to its root: left moves along each
  /// level until a taller node, plus the levels climbed.
  std::uint64_t reverse_search_path(const Node* n) const {
    std::uint64_t steps = 0;
    const Node* x = n;
    while (x->parent) {
      const std::uint32_t j = x->size() - 1;
      const Node* y = x;
      while (y->size() <= j + 1) {
        y = y->levels[j].left;
        ++steps;
      }
      steps += y->size() - x->size();
      x = y;
    }
    return steps + (x->size() - 1);
  }

  /// Checks links, parent pointers, head shape and every aggregate against a
  /// fresh fold. Returns an empty string when the list is consistent.
  std::string validate(const Node* head, const std::function<bool(const Value&, const Value&)>& equal) {
    std::ostringstream err;
    if (!head) return {};
    if (head->parent) return "head has a parent";
    std::vector<const Node*> nodes;
    for (const Node* x = head; x; x = x->levels[0].right) {
      if (x->levels[0].right && x->levels[0].right->levels[0].left != x) return "level-0 back link broken";
      nodes.push_back(x);
      if (nodes.size() > (1u << 26)) return "level-0 cycle";
    }
    if (head->tail != nodes.back()) return "tail pointer stale";
    std::uint32_t max_height = 0;
    for (const Node* x : nodes) {
      max_height = std::max(max_height, x->height);
      if (x != head && x->size() != x->height) return "non-head size differs from height";
    }
    if (head->size() != max_height + 1) {
      err << "head size " << head->size() << " expected " << max_height + 1;
      return err.str();
    }
    const std::uint32_t top = head->size() - 1;
    // each level is exactly the subsequence of nodes tall enough
    for (std::uint32_t j = 0; j <= top; ++j) {
      const Node* prev = nullptr;
      for (const Node* x : nodes) {
        if (x->size() <= j) continue;
        if (x->levels[j].left != prev) {
          err << "left link wrong at level " << j << " node " << x->id;
          return err.str();
        }
        if (prev && prev->levels[j].right != x) {
          err << "right link wrong at level " << j << " node " << prev->id;
          return err.str();
        }
        prev = x;
      }
      if (prev && prev->levels[j].right) return "level does not terminate";
    }
    // parent = nearest strictly taller node to the left
    std::vector<const Node*> stack;
    for (const Node* x : nodes) {
      while (!stack.empty() && stack.back()->size() <= x->size()) stack.pop_back();
      const Node* expected = stack.empty() ? nullptr : stack.back();
      if (x->parent != expected) {
        err << "parent wrong at node " << x->id;
        return err.str();
      }
      stack.push_back(x);
    }
    // aggregates
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Node* x = nodes[i];
      for (std::uint32_t j = 1; j < x->size(); ++j) {
        Value expect{};
        policy_->init_upper(expect);
        for (std::size_t k = i; k < nodes.size(); ++k) {
          if (k > i && nodes[k]->size() > j) break;
          policy_->add(expect, nodes[k]->levels[0].agg);
        }
        const bool ok = equal(expect, x->levels[j].agg);
        policy_->retire(expect);
        if (!ok) {
          err << "aggregate wrong at node " << x->id << " level " << j;
          return err.str();
        }
      }
    }
    return {};
  }

  /// One line per level listing node ids, bottom level first.
  std::string dump(const Node* head) const {
    std::ostringstream out;
    if (!head) return out.str();
    for (std::uint32_t j = 0; j < head->size(); ++j) {
      out << j << ":";
      for (const Node* x = head; x; x = x->levels[j].right) out << ' ' << x->id;
      out << '\n';
    }
    return out.str();
  }

 private:
  template <class F>
  void walk_ancestors(Node* n, std::uint32_t from, F& f) {
    for (Node* x = n; x; x = x->parent) {
      for (std::uint32_t j = from; j < x->size(); ++j) f(x->levels[j].agg);
      from = x->size();
    }
  }

  // x.levels[j].agg = fold of level j-1 aggregates over x's level-j span
  std::uint64_t recompute(Node* x, std::uint32_t j) {
    auto& dst = x->levels[j].agg;
    const Node* stop = x->levels[j].right;
    Node* y = x;
    std::uint64_t visited = 0;
    if constexpr (requires(Policy& p, Value& v, const Value* b) { p.assign(v, v, b); }) {
      // dst = first ^ second in one pass, then fold the rest in
      Node* second = y->levels[j - 1].right;
      const bool pair = second != stop;
      policy_->assign(dst, y->levels[j - 1].agg, pair ? &second->levels[j - 1].agg : nullptr);
      visited = pair ? 2 : 1;
      y = pair ? second->levels[j - 1].right : second;
    } else {
      policy_->zero(dst);
    }
    for (; y != stop; y = y->levels[j - 1].right) {
      policy_->add(dst, y->levels[j - 1].agg);
      ++visited;
    }
    return visited;
  }

  std::uint64_t touch(Node* x, std::uint32_t j) {
    if (!batch_depth_) return recompute(x, j);
    dirty_.push_back({j, x->id, x});
    return 0;
  }

  void flush_dirty() {
    if (dirty_.empty()) return;
    std::sort(dirty_.begin(), dirty_.end(), [](const Dirty& a, const Dirty& b) {
      return a.level != b.level ? a.level < b.level : a.id < b.id;
    });
    std::uint64_t path = 0;
    for (std::size_t i = 0; i < dirty_.size(); ++i) {
      const auto& d = dirty_[i];
      if (i && d.level == dirty_[i - 1].level && d.id == dirty_[i - 1].id) continue;
      if (d.level < d.node->size()) path += recompute(d.node, d.level);
    }
    dirty_.clear();
    note_path(path);
  }

  void note_path(std::uint64_t path) {
    stats_.last_path = path;
    stats_.max_path = std::max(stats_.max_path, path);
  }

  Policy* policy_;
  struct Dirty {
    std::uint32_t level;
    std::uint64_t id;
    Node* node;
  };
  std::vector<Dirty> dirty_;
  std::uint32_t batch_depth_ = 0;
  HeightDistribution dist_;
  Rng rng_;
  SkipStats stats_;
  std::uint64_t next_id_ = 0;
};

/// Plain additive aggregate over integers; used by tests and the sketchless
/// forest's counts.
struct SumPolicy {
  void init_upper(std::int64_t& v) const { v = 0; }
  void zero(std::int64_t& v) const { v = 0; }
  void add(std::int64_t& dst, std::int64_t src) const { dst += src; }
  void sub(std::int64_t& dst, std::int64_t src) const { dst -= src; }
  void retire(std::int64_t& v) const { v = 0; }
};

}  // namespace sketchconn
