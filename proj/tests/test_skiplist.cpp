#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "sketchconn/skiplist.hpp"

using namespace sketchconn;

namespace {

using List = SkipForest<int, std::int64_t, SumPolicy>;
using Node = List::Node;

const auto kEq = [](const std::int64_t& a, const std::int64_t& b) { return a == b; };

struct Harness {
  SumPolicy policy;
  List forest;
  explicit Harness(HeightDistribution dist) : forest(policy, dist) {}

  Node* build(int n, int first = 0) {
    std::vector<std::pair<int, std::int64_t>> items;
    for (int i = 0; i < n; ++i) items.emplace_back(first + i, (first + i) * 7 + 1);
    return forest.make_list(items);
  }

  static std::vector<int> items(const Node* head) {
    std::vector<int> out;
    for (const Node* x = head; x; x = x->next()) out.push_back(x->item);
    return out;
  }
  static std::int64_t fold(const Node* head) {
    std::int64_t s = 0;
    for (const Node* x = head; x; x = x->next()) s += x->payload();
    return s;
  }
  static Node* nth(Node* head, int k) {
    while (k-- > 0) head = head->next();
    return head;
  }
  ~Harness() {
    for (Node* h : lists) forest.destroy_list(h);
  }
  std::vector<Node*> lists;
};

}  // namespace

TEST(SkipList, EmptyAndSingleton) {
  Harness h(HeightDistribution::classic(1));
  EXPECT_EQ(h.build(0), nullptr);
  Node* one = h.build(1);
  h.lists.push_back(one);
  EXPECT_EQ(h.forest.find_root(one), one);
  EXPECT_EQ(h.forest.root_aggregate(one), 1);
  EXPECT_EQ(one->size(), one->height + 1);
  EXPECT_EQ(h.forest.validate(one, kEq), "");
}

TEST(SkipList, RandomListsAreValid) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (auto dist : {HeightDistribution::classic(seed), HeightDistribution::reduced(1 << 10, seed)}) {
      Harness h(dist);
      Node* head = h.build(300);
      h.lists.push_back(head);
      ASSERT_EQ(h.forest.validate(head, kEq), "");
      EXPECT_EQ(h.forest.root_aggregate(Harness::nth(head, 123)), Harness::fold(head));
      for (Node* x = head; x; x = x->next()) ASSERT_EQ(h.forest.find_root(x), head);
    }
  }
}

TEST(SkipList, SplitAtHeadIsIdentity) {
  Harness h(HeightDistribution::classic(4));
  Node* head = h.build(10);
  auto [l, r] = h.forest.split(head, head);
  EXPECT_EQ(l, nullptr);
  EXPECT_EQ(r, head);
  h.lists.push_back(r);
}

TEST(SkipList, SplitJoinRoundTrip) {
  Harness h(HeightDistribution::reduced(1 << 12, 9));
  Node* head = h.build(200);
  const auto before = Harness::items(head);
  std::vector<std::uint32_t> heights;
  for (Node* x = head; x; x = x->next()) heights.push_back(x->height);
  Node* at = Harness::nth(head, 77);
  auto [l, r] = h.forest.split(head, at);
  EXPECT_EQ(Harness::items(l).size(), 77u);
  EXPECT_EQ(r, at);
  Node* joined = h.forest.join(l, r);
  h.lists.push_back(joined);
  EXPECT_EQ(Harness::items(joined), before);
  std::vector<std::uint32_t> after;
  for (Node* x = joined; x; x = x->next()) after.push_back(x->height);
  EXPECT_EQ(after, heights);
  EXPECT_EQ(h.forest.validate(joined, kEq), "");
}

TEST(SkipList, JoinWithEmptyIsIdentity) {
  Harness h(HeightDistribution::classic(2));
  Node* head = h.build(5);
  EXPECT_EQ(h.forest.join(head, nullptr), head);
  EXPECT_EQ(h.forest.join(nullptr, head), head);
  h.lists.push_back(head);
}

TEST(SkipList, RandomSplitsKeepInvariants) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    Harness h(trial % 2 ? HeightDistribution::classic(trial) : HeightDistribution::reduced(1 << 10, trial));
    Node* head = h.build(1000);
    const auto total = Harness::fold(head);
    const int k = static_cast<int>(uniform_below(rng, 1000));
    Node* at = Harness::nth(head, k);
    auto [l, r] = h.forest.split(head, at);
    if (l) {
      ASSERT_EQ(h.forest.validate(l, kEq), "");
      h.lists.push_back(l);
    }
    ASSERT_EQ(h.forest.validate(r, kEq), "");
    h.lists.push_back(r);
    const auto left_sum = l ? h.forest.root_aggregate(l) : 0;
    EXPECT_EQ(left_sum + h.forest.root_aggregate(r), total);
  }
}

TEST(SkipList, RandomJoinsKeepInvariants) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    Harness h(trial % 2 ? HeightDistribution::classic(trial) : HeightDistribution::reduced(1 << 10, trial));
    const int na = 1 + static_cast<int>(uniform_below(rng, 300));
    const int nb = 1 + static_cast<int>(uniform_below(rng, 300));
    Node* a = h.build(na, 0);
    Node* b = h.build(nb, na);
    const auto total = Harness::fold(a) + Harness::fold(b);
    Node* j = h.forest.join(a, b);
    h.lists.push_back(j);
    ASSERT_EQ(h.forest.validate(j, kEq), "");
    EXPECT_EQ(h.forest.root_aggregate(j), total);
    std::vector<int> expect(na + nb);
    std::iota(expect.begin(), expect.end(), 0);
    EXPECT_EQ(Harness::items(j), expect);
  }
}

TEST(SkipList, ShuffleBySplitsAndJoins) {
  Rng rng(77);
  Harness h(HeightDistribution::reduced(1 << 8, 3));
  std::vector<Node*> lists{h.build(400)};
  for (int step = 0; step < 2000; ++step) {
    const auto i = uniform_below(rng, lists.size());
    if (uniform_below(rng, 2) == 0 || lists.size() == 1) {
      const auto n = Harness::items(lists[i]).size();
      Node* at = Harness::nth(lists[i], static_cast<int>(uniform_below(rng, n)));
      auto [l, r] = h.forest.split(lists[i], at);
      if (l) {
        lists[i] = l;
        lists.push_back(r);
      }
    } else {
      auto j = uniform_below(rng, lists.size() - 1);
      if (j >= i) ++j;
      lists[i] = h.forest.join(lists[i], lists[j]);
      lists.erase(lists.begin() + static_cast<std::ptrdiff_t>(j));
    }
    if (step % 50 == 0) {
      for (Node* l : lists) ASSERT_EQ(h.forest.validate(l, kEq), "") << "step " << step;
    }
  }
  std::size_t total = 0;
  for (Node* l : lists) {
    ASSERT_EQ(h.forest.validate(l, kEq), "");
    total += Harness::items(l).size();
  }
  EXPECT_EQ(total, 400u);
  h.lists = lists;
}

TEST(SkipList, Errors) {
  Harness h(HeightDistribution::classic(5));
  Node* a = h.build(10, 0);
  Node* b = h.build(10, 10);
  h.lists = {a, b};
  try {
    h.forest.split(a, Harness::nth(b, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWrongList);
  }
  try {
    h.forest.join(a, a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruption);
  }
  EXPECT_THROW(h.forest.join(a, Harness::nth(b, 2)), Error);
}

TEST(SkipList, PointUpdates) {
  Harness h(HeightDistribution::reduced(1 << 10, 12));
  Node* single = h.build(1);
  h.forest.point_update(single, 41);
  EXPECT_EQ(h.forest.root_aggregate(single), 42);
  h.lists.push_back(single);

  Node* head = h.build(500);
  h.lists.push_back(head);
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    Node* x = Harness::nth(head, static_cast<int>(uniform_below(rng, 500)));
    h.forest.point_update(x, static_cast<std::int64_t>(uniform_below(rng, 100)) - 50);
  }
  EXPECT_EQ(h.forest.validate(head, kEq), "");
  EXPECT_EQ(h.forest.root_aggregate(head), Harness::fold(head));
}

TEST(SkipList, DeterministicUnderSeed) {
  Harness a(HeightDistribution::reduced(1 << 10, 55));
  Harness b(HeightDistribution::reduced(1 << 10, 55));
  Node* x = a.build(256);
  Node* y = b.build(256);
  a.lists.push_back(x);
  b.lists.push_back(y);
  EXPECT_EQ(a.forest.dump(x), b.forest.dump(y));
}

TEST(SkipList, DumpFormat) {
  SumPolicy p;
  List forest(p, HeightDistribution::classic(1));
  Node* a = forest.make_with_height(2, 0, 1);
  Node* b = forest.make_with_height(1, 1, 1);
  Node* c = forest.make_with_height(3, 2, 1);
  Node* head = forest.join(forest.join(a, b), c);
  EXPECT_EQ(forest.dump(head), "0: 0 1 2\n1: 0 2\n2: 0 2\n3: 0\n");
  EXPECT_EQ(c->parent, a);
  EXPECT_EQ(b->parent, a);
  forest.destroy_list(head);
}

TEST(SkipList, ReducedHeightNeedsFewerRootHops) {
  const int n = 1 << 16;
  double mean[2] = {0, 0};
  int idx = 0;
  for (auto dist : {HeightDistribution::reduced(n, 1), HeightDistribution::classic(1)}) {
    Harness h(dist);
    Node* head = h.build(n);
    h.lists.push_back(head);
    std::uint64_t hops = 0;
    for (Node* x = head; x; x = x->next()) hops += List::root_distance(x);
    mean[idx++] = static_cast<double>(hops) / n;
  }
  EXPECT_LT(mean[0], mean[1]);
}
