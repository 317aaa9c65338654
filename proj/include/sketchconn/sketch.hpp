#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sketchconn/error.hpp"
#include "sketchconn/memory.hpp"
#include "sketchconn/random.hpp"

namespace sketchconn {

using Vertex = std::uint32_t;

/// Rank of an unordered vertex pair among all pairs (a, b), a < b, in
/// lexicographic order.
struct EdgeIndex {
  std::uint64_t value = 0;
  friend constexpr auto operator<=>(EdgeIndex, EdgeIndex) = default;
};

inline std::uint64_t pair_count(std::uint64_t vertex_count) {
  return vertex_count < 2 ? 0 : vertex_count * (vertex_count - 1) / 2;
}

inline EdgeIndex encode_edge(std::uint64_t u, std::uint64_t v, std::uint64_t vertex_count) {
  if (u == v || u >= vertex_count || v >= vertex_count) {
    throw Error(ErrorCode::kInvalidEdge,
                "(" + std::to_string(u) + "," + std::to_string(v) + ") with V=" +
                    std::to_string(vertex_count));
  }
  if (u > v) std::swap(u, v);
  // pairs whose first element is < u, then offset within row u
  const std::uint64_t row_start = u * vertex_count - u * (u + 1) / 2;
  return EdgeIndex{row_start + (v - u - 1)};
}

inline std::pair<Vertex, Vertex> decode_edge(EdgeIndex index, std::uint64_t vertex_count) {
  if (index.value >= pair_count(vertex_count)) {
    throw Error(ErrorCode::kInvalidIndex, "edge index " + std::to_string(index.value));
  }
  const auto row_start = [vertex_count](std::uint64_t u) {
    return u * vertex_count - u * (u + 1) / 2;
  };
  // invert the row-start quadratic, then correct for rounding
  const double n = static_cast<double>(vertex_count);
  const double x = static_cast<double>(index.value);
  const double disc = (2 * n - 1) * (2 * n - 1) - 8 * x;
  auto u = static_cast<std::uint64_t>(std::max(0.0, std::floor(((2 * n - 1) - std::sqrt(std::max(0.0, disc))) / 2)));
  while (u > 0 && row_start(u) > index.value) --u;
  while (u + 1 < vertex_count && row_start(u + 1) <= index.value) ++u;
  const std::uint64_t v = index.value - row_start(u) + u + 1;
  return {static_cast<Vertex>(u), static_cast<Vertex>(v)};
}

struct SketchConfig {
  std::uint64_t universe_size = 0;
  std::uint32_t num_columns = 7;
  std::uint32_t buckets_per_column = 1;
  std::uint64_t seed = 0;

  static constexpr std::uint32_t kMaxColumns = 32;

  static std::uint32_t min_buckets(std::uint64_t universe) {
    if (universe <= 1) return 1;
    // ceil(log2(universe)) + 1
    return static_cast<std::uint32_t>(std::bit_width(universe - 1)) + 1;
  }

  static SketchConfig for_universe(std::uint64_t universe, std::uint32_t columns, std::uint64_t seed) {
    SketchConfig cfg{universe, columns, min_buckets(universe), seed};
    cfg.validate();
    return cfg;
  }

  static SketchConfig for_vertices(std::uint64_t vertex_count, std::uint32_t columns, std::uint64_t seed) {
    return for_universe(pair_count(vertex_count), columns, seed);
  }

  void validate() const {
    if (num_columns < 1 || num_columns > kMaxColumns) {
      throw Error(ErrorCode::kInvalidConfig, "num_columns must be in [1, 32]");
    }
    if (buckets_per_column < min_buckets(universe_size) || buckets_per_column > 64) {
      throw Error(ErrorCode::kInvalidConfig, "buckets_per_column below ceil(log2 universe)+1");
    }
  }

  std::size_t word_count() const { return std::size_t{2} * num_columns * buckets_per_column; }

  // Words are stored depth-major: all columns of depth 0, then depth 1, ...
  // Low depths take most updates, so they share cache lines.
  std::size_t offset(std::uint32_t column, std::uint32_t depth) const {
    return (std::size_t{depth} * num_columns + column) * 2;
  }

  friend bool operator==(const SketchConfig&, const SketchConfig&) = default;
};

/// Seeded hash family shared by all sketches with one config.
class SketchHasher {
 public:
  SketchHasher() = default;
  explicit SketchHasher(const SketchConfig& cfg) : cfg_(cfg) {
    for (std::uint32_t c = 0; c < cfg.num_columns; ++c) {
      depth_seed_[c] = hash_combine(cfg.seed, 2 * c + 1);
      check_seed_[c] = hash_combine(cfg.seed ^ 0x5bd1e9955bd1e995ULL, 2 * c + 2);
    }
  }

  const SketchConfig& config() const { return cfg_; }

  std::uint32_t depth(std::uint64_t index, std::uint32_t column) const {
    const std::uint64_t h = mix64(mix64(index + depth_seed_[column]) ^ depth_seed_[column]);
    const auto d = static_cast<std::uint32_t>(std::countr_zero(h | (std::uint64_t{1} << 63)));
    return std::min(d, cfg_.buckets_per_column - 1);
  }

  std::uint64_t checksum(std::uint64_t index, std::uint32_t column) const {
    return mix64(mix64(index ^ check_seed_[column]) + check_seed_[column]);
  }

  std::size_t offset(std::uint32_t column, std::uint32_t depth) const { return cfg_.offset(column, depth); }

 private:
  SketchConfig cfg_{};
  std::array<std::uint64_t, SketchConfig::kMaxColumns> depth_seed_{};
  std::array<std::uint64_t, SketchConfig::kMaxColumns> check_seed_{};
};

/// The bucket writes of one sketch_update, precomputed so the same toggle can
/// be applied to every aggregate on a skip-list path.
struct SketchDelta {
  struct Write {
    std::uint32_t offset;
    std::uint64_t index;
    std::uint64_t checksum;
  };
  std::array<Write, SketchConfig::kMaxColumns> writes{};
  std::uint32_t count = 0;

  static SketchDelta make(const SketchHasher& hasher, EdgeIndex index) {
    const auto& cfg = hasher.config();
    if (index.value >= cfg.universe_size) {
      throw Error(ErrorCode::kInvalidIndex, "index " + std::to_string(index.value) +
                                                " outside universe " + std::to_string(cfg.universe_size));
    }
    SketchDelta d;
    d.count = cfg.num_columns;
    for (std::uint32_t c = 0; c < cfg.num_columns; ++c) {
      d.writes[c] = {static_cast<std::uint32_t>(hasher.offset(c, hasher.depth(index.value, c))), index.value,
                     hasher.checksum(index.value, c)};
    }
    return d;
  }

  void apply(std::uint64_t* words) const {
    for (std::uint32_t c = 0; c < count; ++c) {
      words[writes[c].offset] ^= writes[c].index;
      words[writes[c].offset + 1] ^= writes[c].checksum;
    }
  }
};

/// l0-sampler over F2 vectors indexed by EdgeIndex. A default-constructed
/// Sketch is ABSENT (no storage) and behaves as the zero sketch when read.
class Sketch {
 public:
  using Words = std::vector<std::uint64_t, TrackedAllocator<std::uint64_t>>;

  Sketch() = default;
  explicit Sketch(const SketchConfig& cfg) : cfg_(cfg), words_(cfg.word_count(), 0) {}

  bool absent() const noexcept { return words_.empty(); }
  const SketchConfig& config() const noexcept { return cfg_; }
  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::uint64_t* data() noexcept { return words_.data(); }
  const std::uint64_t* data() const noexcept { return words_.data(); }
  std::size_t byte_size() const noexcept { return words_.size() * sizeof(std::uint64_t); }

  void clear() noexcept { std::fill(words_.begin(), words_.end(), 0); }

  bool is_zero() const noexcept {
    for (auto w : words_) {
      if (w) return false;
    }
    return true;
  }

  void update(const SketchHasher& hasher, EdgeIndex index) {
    require_present();
    SketchDelta::make(hasher, index).apply(words_.data());
  }

  void apply(const SketchDelta& delta) {
    require_present();
    delta.apply(words_.data());
  }

  Sketch& operator^=(const Sketch& other) {
    if (other.absent()) return *this;
    if (absent()) {
      *this = other;
      return *this;
    }
    if (!(cfg_ == other.cfg_)) throw Error(ErrorCode::kConfigMismatch, "sketch_add across configs");
    xor_words(words_.data(), other.words_.data(), words_.size());
    return *this;
  }

  /// dst ^= src over n words. No config check; callers guarantee a match.
  static void xor_words(std::uint64_t* __restrict dst, const std::uint64_t* __restrict src, std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) dst[i] ^= src[i];
  }

  std::optional<EdgeIndex> query(const SketchHasher& hasher) const {
    if (absent()) return std::nullopt;
    // empty cuts are the common case at high levels
    std::uint64_t any = 0;
    for (auto w : words_) any |= w;
    if (!any) return std::nullopt;
    for (std::uint32_t c = 0; c < cfg_.num_columns; ++c) {
      for (std::uint32_t d = cfg_.buckets_per_column; d-- > 0;) {
        const std::size_t off = hasher.offset(c, d);
        const std::uint64_t index = words_[off];
        const std::uint64_t check = words_[off + 1];
        if ((index | check) == 0) continue;
        if (index < cfg_.universe_size && hasher.checksum(index, c) == check && hasher.depth(index, c) == d) {
          return EdgeIndex{index};
        }
      }
    }
    return std::nullopt;
  }

  /// Config fields, then bucket words column-major (index_xor, checksum_xor
  /// per bucket), all little-endian u64.
  void serialize_to(std::vector<std::uint8_t>& out) const {
    put_u64(out, cfg_.universe_size);
    put_u64(out, cfg_.num_columns);
    put_u64(out, cfg_.buckets_per_column);
    put_u64(out, cfg_.seed);
    for (std::uint32_t c = 0; c < cfg_.num_columns; ++c) {
      for (std::uint32_t d = 0; d < cfg_.buckets_per_column; ++d) {
        const std::size_t off = cfg_.offset(c, d);
        put_u64(out, absent() ? 0 : words_[off]);
        put_u64(out, absent() ? 0 : words_[off + 1]);
      }
    }
  }

  std::vector<std::uint8_t> serialize() const {
    std::vector<std::uint8_t> out;
    serialize_to(out);
    return out;
  }

  static void put_u64(std::vector<std::uint8_t>& out, std::uint64_t x) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
  }

  friend bool operator==(const Sketch& a, const Sketch& b) {
    if (a.absent() && b.absent()) return true;
    if (a.absent()) return b.is_zero();
    if (b.absent()) return a.is_zero();
    return a.cfg_ == b.cfg_ && std::equal(a.words_.begin(), a.words_.end(), b.words_.begin());
  }

 private:
  void require_present() const {
    if (absent()) throw Error(ErrorCode::kUnsupported, "update on an absent sketch");
  }

  SketchConfig cfg_{};
  Words words_;
};

inline Sketch sketch_add(const Sketch& a, const Sketch& b) {
  if (!a.absent() && !b.absent() && !(a.config() == b.config())) {
    throw Error(ErrorCode::kConfigMismatch, "sketch_add across configs");
  }
  Sketch out = a;
  out ^= b;
  return out;
}

}  // namespace sketchconn
