#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "sketchconn/sketch.hpp"

using namespace sketchconn;

namespace {

// Oracle: rank by explicit enumeration of pairs in lexicographic order.
std::uint64_t enumerated_rank(std::uint64_t u, std::uint64_t v, std::uint64_t n) {
  if (u > v) std::swap(u, v);
  std::uint64_t rank = 0;
  for (std::uint64_t a = 0; a < n; ++a) {
    for (std::uint64_t b = a + 1; b < n; ++b) {
      if (a == u && b == v) return rank;
      ++rank;
    }
  }
  return ~0ULL;
}

struct Fixture {
  SketchConfig cfg;
  SketchHasher hasher;
  explicit Fixture(std::uint64_t universe, std::uint64_t seed = 7, std::uint32_t columns = 7)
      : cfg(SketchConfig::for_universe(universe, columns, seed)), hasher(cfg) {}

  Sketch of(const std::vector<std::uint64_t>& xs) const {
    Sketch s(cfg);
    for (auto x : xs) s.update(hasher, EdgeIndex{x});
    return s;
  }
};

}  // namespace

TEST(EdgeIndex, FirstAndLastPairForFourVertices) {
  EXPECT_EQ(encode_edge(0, 1, 4).value, 0u);
  EXPECT_EQ(encode_edge(3, 2, 4).value, 5u);
}

TEST(EdgeIndex, MatchesEnumeration) {
  EXPECT_EQ(encode_edge(5, 17, 32).value, enumerated_rank(5, 17, 32));
  EXPECT_EQ(decode_edge(encode_edge(5, 17, 32), 32), (std::pair<Vertex, Vertex>{5, 17}));
  for (std::uint64_t n = 2; n <= 40; ++n) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t u = 0; u < n; ++u) {
      for (std::uint64_t v = 0; v < n; ++v) {
        if (u == v) continue;
        const auto e = encode_edge(u, v, n);
        ASSERT_EQ(e.value, enumerated_rank(u, v, n));
        ASSERT_EQ(e, encode_edge(v, u, n));
        const auto [a, b] = decode_edge(e, n);
        ASSERT_EQ(a, std::min(u, v));
        ASSERT_EQ(b, std::max(u, v));
        seen.insert(e.value);
      }
    }
    ASSERT_EQ(seen.size(), pair_count(n));
    ASSERT_EQ(*seen.rbegin(), pair_count(n) - 1);
  }
}

TEST(EdgeIndex, DecodeLargeVertexCounts) {
  Rng rng(3);
  for (std::uint64_t n : {1ULL << 16, 1ULL << 20, 1ULL << 31}) {
    for (int t = 0; t < 2000; ++t) {
      const std::uint64_t u = uniform_below(rng, n);
      std::uint64_t v = uniform_below(rng, n);
      if (u == v) v = (v + 1) % n;
      const auto [a, b] = decode_edge(encode_edge(u, v, n), n);
      ASSERT_EQ(a, std::min(u, v));
      ASSERT_EQ(b, std::max(u, v));
    }
    const auto [a, b] = decode_edge(EdgeIndex{pair_count(n) - 1}, n);
    EXPECT_EQ(a, n - 2);
    EXPECT_EQ(b, n - 1);
  }
}

TEST(EdgeIndex, Errors) {
  try {
    encode_edge(2, 2, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidEdge);
  }
  EXPECT_THROW(encode_edge(0, 4, 4), Error);
  try {
    decode_edge(EdgeIndex{6}, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidIndex);
  }
}

TEST(SketchConfig, Validation) {
  const auto cfg = SketchConfig::for_vertices(64, 7, 1);
  EXPECT_EQ(cfg.universe_size, 2016u);
  EXPECT_EQ(cfg.buckets_per_column, 12u);  // ceil(log2 2016) + 1
  EXPECT_THROW((SketchConfig{2016, 0, 12, 1}.validate()), Error);
  EXPECT_THROW((SketchConfig{2016, 7, 11, 1}.validate()), Error);
  EXPECT_NO_THROW((SketchConfig{2016, 7, 12, 1}.validate()));
}

TEST(Sketch, ZeroSketchHasZeroBucketsAndFails) {
  Fixture f(1000);
  Sketch s(f.cfg);
  EXPECT_TRUE(s.is_zero());
  EXPECT_FALSE(s.query(f.hasher).has_value());
  EXPECT_FALSE(Sketch().query(f.hasher).has_value());
}

TEST(Sketch, UpdateIsSelfInverse) {
  Fixture f(1000);
  Sketch s = f.of({1, 2, 3});
  const Sketch before = s;
  s.update(f.hasher, EdgeIndex{7});
  EXPECT_FALSE(s == before);
  s.update(f.hasher, EdgeIndex{7});
  EXPECT_TRUE(s == before);
}

TEST(Sketch, SingletonIsRecovered) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Fixture f(5000, seed);
    for (std::uint64_t i : {std::uint64_t{0}, std::uint64_t{3}, std::uint64_t{4999}, seed * 97}) {
      const auto got = f.of({i}).query(f.hasher);
      ASSERT_TRUE(got.has_value());
      EXPECT_EQ(got->value, i);
    }
  }
}

TEST(Sketch, OutOfRangeIndex) {
  Fixture f(100);
  Sketch s(f.cfg);
  try {
    s.update(f.hasher, EdgeIndex{100});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidIndex);
  }
}

TEST(Sketch, OneBucketPerColumnChanges) {
  Fixture f(1 << 20);
  Sketch s(f.cfg);
  s.update(f.hasher, EdgeIndex{12345});
  std::size_t nonzero_buckets = 0;
  for (std::uint32_t c = 0; c < f.cfg.num_columns; ++c) {
    for (std::uint32_t d = 0; d < f.cfg.buckets_per_column; ++d) {
      const auto off = f.cfg.offset(c, d);
      if (s.words()[off] || s.words()[off + 1]) {
        ++nonzero_buckets;
        EXPECT_EQ(s.words()[off], 12345u);
        EXPECT_EQ(d, f.hasher.depth(12345, c));
      }
    }
  }
  EXPECT_EQ(nonzero_buckets, f.cfg.num_columns);
}

TEST(Sketch, DepthDistributionIsGeometric) {
  Fixture f(1ULL << 40, 11, 1);
  const int n = 1000000;
  std::vector<int> at_least(12, 0);
  for (int i = 0; i < n; ++i) {
    const auto d = f.hasher.depth(static_cast<std::uint64_t>(i) * 2654435761ULL, 0);
    for (std::uint32_t j = 0; j <= std::min<std::uint32_t>(d, 11); ++j) ++at_least[j];
  }
  for (int j = 1; j < 12; ++j) {
    const double p = std::ldexp(1.0, -j);
    const double sigma = std::sqrt(n * p * (1 - p));
    EXPECT_NEAR(at_least[j], n * p, 3 * sigma) << "depth " << j;
  }
}

TEST(Sketch, AddIsLinear) {
  Fixture f(4096);
  EXPECT_TRUE(sketch_add(f.of({5, 9}), f.of({5, 9})).is_zero());
  EXPECT_TRUE(sketch_add(f.of({5, 9}), Sketch(f.cfg)) == f.of({5, 9}));
  const Sketch sum = sketch_add(f.of({1, 2}), f.of({2, 3}));
  EXPECT_TRUE(sum == f.of({1, 3}));
  const auto q = sum.query(f.hasher);
  ASSERT_TRUE(q.has_value());
  EXPECT_TRUE(q->value == 1 || q->value == 3);

  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::uint64_t> xs;
    std::vector<std::uint64_t> ys;
    for (int i = 0; i < 40; ++i) xs.push_back(uniform_below(rng, 4096));
    for (int i = 0; i < 40; ++i) ys.push_back(uniform_below(rng, 4096));
    std::vector<std::uint64_t> both = xs;
    both.insert(both.end(), ys.begin(), ys.end());
    const Sketch combined = sketch_add(f.of(xs), f.of(ys));
    const Sketch direct = f.of(both);
    ASSERT_TRUE(std::equal(combined.words().begin(), combined.words().end(), direct.words().begin()));
  }
}

TEST(Sketch, AddRejectsMismatchedConfig) {
  Fixture a(4096, 1);
  Fixture b(4096, 2);
  try {
    sketch_add(a.of({1}), b.of({1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigMismatch);
  }
}

TEST(Sketch, DeterministicAndFixedSize) {
  Fixture f(1 << 16, 99);
  Fixture g(1 << 16, 99);
  std::vector<std::uint64_t> xs;
  for (std::uint64_t i = 0; i < 500; ++i) xs.push_back(i * 131 % (1 << 16));
  EXPECT_EQ(f.of(xs).serialize(), g.of(xs).serialize());
  EXPECT_EQ(f.of(xs).byte_size(), Sketch(f.cfg).byte_size());
  EXPECT_EQ(f.of(xs).serialize().size(), Sketch(f.cfg).serialize().size());
}

TEST(Sketch, SerializationIsColumnMajorLittleEndian) {
  Fixture f(1000, 3, 2);
  Sketch s(f.cfg);
  s.update(f.hasher, EdgeIndex{0x0102});
  const auto bytes = s.serialize();
  ASSERT_EQ(bytes.size(), 8 * (4 + f.cfg.word_count()));
  EXPECT_EQ(bytes[0], 1000 & 0xff);
  EXPECT_EQ(bytes[1], 1000 >> 8);
  for (std::uint32_t c = 0; c < 2; ++c) {
    const auto d = f.hasher.depth(0x0102, c);
    const std::size_t pos = 8 * (4 + 2 * (c * f.cfg.buckets_per_column + d));
    EXPECT_EQ(bytes[pos], 0x02);
    EXPECT_EQ(bytes[pos + 1], 0x01);
  }
}

TEST(Sketch, SoundAndUsuallySuccessful) {
  const std::uint64_t universe = 1 << 20;
  Rng rng(17);
  int successes = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    Fixture f(universe, rng());
    const auto k = 2 + uniform_below(rng, 63);
    std::set<std::uint64_t> truth;
    while (truth.size() < k) truth.insert(uniform_below(rng, universe));
    const Sketch s = f.of(std::vector<std::uint64_t>(truth.begin(), truth.end()));
    const auto q = s.query(f.hasher);
    if (q) {
      ASSERT_TRUE(truth.count(q->value)) << "unsound answer";
      ++successes;
    }
  }
  EXPECT_GE(successes, 0.9 * trials);
}
