#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "sketchconn/cutset.hpp"
#include "sketchconn/oracle.hpp"

using namespace sketchconn;

TEST(Cutset, ToggleTwiceIsIdentity) {
  CutsetLevel level(3, 32, 7, 99, HeightMode::kReduced);
  level.update(4, 9);
  level.link(1, 2);
  const auto before = level.serialize();
  level.update(5, 17);
  level.update(17, 5);
  EXPECT_EQ(level.serialize(), before);
}

TEST(Cutset, SingleEdgeIsRecovered) {
  CutsetLevel level(0, 8, 7, 1, HeightMode::kReduced);
  EXPECT_FALSE(level.query(0).has_value());
  level.update(0, 1);
  const auto q = level.query(0);
  ASSERT_TRUE(q.has_value());
  EXPECT_EQ(*q, (std::pair<Vertex, Vertex>{0, 1}));
}

TEST(Cutset, InternalEdgeCancels) {
  CutsetLevel level(1, 8, 7, 2, HeightMode::kClassic);
  level.update(0, 1);
  level.update(1, 2);
  level.link(0, 1);
  const auto q = level.query(0);
  ASSERT_TRUE(q.has_value());
  EXPECT_EQ(*q, (std::pair<Vertex, Vertex>{1, 2}));
}

TEST(Cutset, SelfLoopRejected) {
  CutsetLevel level(0, 8, 7, 2, HeightMode::kReduced);
  try {
    level.update(3, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidEdge);
  }
}

TEST(Cutset, LevelsUseIndependentSeeds) {
  CutsetLevel a(0, 16, 7, 5, HeightMode::kReduced);
  CutsetLevel b(1, 16, 7, 5, HeightMode::kReduced);
  EXPECT_NE(a.seed(), b.seed());
  EXPECT_NE(a.config().seed, b.config().seed);
}

// Random graphs and random spanning sub-forests; every successful query must
// return a real edge with exactly one endpoint in the component.
TEST(Cutset, QueriesAreSoundAndUsuallySucceed) {
  std::uint64_t trials = 0, hits = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::uint64_t n = 48;
    CutsetLevel level(static_cast<std::uint32_t>(seed), n, 7, seed * 31 + 7, HeightMode::kReduced);
    ShadowGraph graph(n);
    Rng rng(seed);
    for (int i = 0; i < 160; ++i) {
      const Vertex u = static_cast<Vertex>(uniform_below(rng, n));
      const Vertex v = static_cast<Vertex>(uniform_below(rng, n));
      if (u == v || graph.has_edge(u, v)) continue;
      graph.apply({OpKind::kInsert, u, v});
      level.update(u, v);
    }
    // forest over a random subset of graph edges
    for (auto [u, v] : graph.edge_list()) {
      if (uniform_below(rng, 3) == 0 && !level.connected(u, v)) level.link(u, v);
    }
    const auto labels = level.forest().component_labels();
    for (Vertex v = 0; v < n; ++v) {
      bool has_cut_edge = false;
      for (auto [a, b] : graph.edge_list()) has_cut_edge |= (labels[a] == labels[v]) != (labels[b] == labels[v]);
      const auto q = level.query(v);
      if (!has_cut_edge) {
        EXPECT_FALSE(q.has_value());
        continue;
      }
      ++trials;
      if (!q) continue;
      ++hits;
      ASSERT_TRUE(graph.has_edge(q->first, q->second));
      ASSERT_NE(labels[q->first] == labels[v], labels[q->second] == labels[v]);
    }
  }
  ASSERT_GT(trials, 500u);
  EXPECT_GE(static_cast<double>(hits) / static_cast<double>(trials), 0.9);
}

TEST(Cutset, ParallelStructuralOpsMatchSequential) {
  const std::uint64_t n = 64;
  std::vector<std::vector<std::uint8_t>> states;
  for (std::size_t helpers : {0, 1, 2, 4, 8}) {
    CutsetLevel level(2, n, 7, 11, HeightMode::kReduced);
    WorkerPool pool(std::max<std::size_t>(helpers, 1));
    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
      const Vertex u = static_cast<Vertex>(uniform_below(rng, n));
      const Vertex v = static_cast<Vertex>(uniform_below(rng, n));
      if (u != v) level.update(u, v);
    }
    std::set<std::pair<Vertex, Vertex>> forest;
    for (int step = 0; step < 400; ++step) {
      const Vertex u = static_cast<Vertex>(uniform_below(rng, n));
      const Vertex v = static_cast<Vertex>(uniform_below(rng, n));
      if (u == v) continue;
      const auto key = std::make_pair(std::min(u, v), std::max(u, v));
      if (forest.count(key)) {
        if (helpers == 0) {
          level.cut(u, v);
        } else {
          level.parallel_structural_op(StructuralOp::kCut, u, v, pool);
        }
        forest.erase(key);
      } else if (!level.connected(u, v)) {
        if (helpers == 0) {
          level.link(u, v);
        } else {
          level.parallel_structural_op(StructuralOp::kLink, u, v, pool);
        }
        forest.insert(key);
      }
    }
    ASSERT_EQ(level.forest().validate(), "");
    states.push_back(level.serialize());
  }
  for (std::size_t i = 1; i < states.size(); ++i) EXPECT_EQ(states[i], states[0]) << "variant " << i;
}

TEST(Cutset, CutTaskLogIsPolylog) {
  // a path on 501 vertices has a 1001-element tour
  const std::uint64_t n = 501;
  CutsetLevel level(0, n, 7, 17, HeightMode::kReduced);
  WorkerPool pool(2);
  for (Vertex v = 1; v < n; ++v) level.link(v - 1, v);
  const double lg = std::log2(static_cast<double>(2 * n - 1));
  std::size_t worst = 0;
  for (Vertex v : {10u, 250u, 499u}) {
    level.parallel_structural_op(StructuralOp::kCut, v, v + 1, pool);
    worst = std::max(worst, level.last_task_count());
    level.parallel_structural_op(StructuralOp::kLink, v, v + 1, pool);
    worst = std::max(worst, level.last_task_count());
  }
  EXPECT_GT(worst, 0u);
  EXPECT_LE(static_cast<double>(worst), 8 * lg * lg);
}

TEST(Cutset, SizeIndependentOfNonForestEdges) {
  const std::uint64_t n = 40;
  CutsetLevel sparse(0, n, 7, 23, HeightMode::kReduced);
  CutsetLevel dense(0, n, 7, 23, HeightMode::kReduced);
  for (Vertex v = 1; v < n; ++v) {
    sparse.update(v - 1, v);
    dense.update(v - 1, v);
  }
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 2; v < n; ++v) dense.update(u, v);
  }
  EXPECT_EQ(sparse.serialize().size(), dense.serialize().size());
}
