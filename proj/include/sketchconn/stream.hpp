#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sketchconn/error.hpp"
#include "sketchconn/random.hpp"
#include "sketchconn/sketch.hpp"

namespace sketchconn {

enum class OpKind : std::uint8_t { kInsert = 0, kDelete = 1, kQuery = 2 };

struct StreamOp {
  OpKind kind = OpKind::kInsert;
  Vertex u = 0;
  Vertex v = 0;
  friend bool operator==(const StreamOp&, const StreamOp&) = default;
};

using Edge = std::pair<Vertex, Vertex>;

struct StreamHeader {
  static constexpr char kMagic[4] = {'C', 'P', 'K', 'S'};
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::size_t kBytes = 22;
  static constexpr std::size_t kRecordBytes = 9;

  std::uint16_t version = kVersion;
  std::uint64_t vertex_count = 0;
  std::uint64_t op_count = 0;
};

namespace detail {

template <class T>
void put_le(std::string& out, T x) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

template <class T>
T get_le(const unsigned char* p) {
  T x = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) x |= static_cast<T>(static_cast<T>(p[i]) << (8 * i));
  return x;
}

}  // namespace detail

inline std::string encode_stream(std::uint64_t vertex_count, const std::vector<StreamOp>& ops) {
  std::string out(StreamHeader::kMagic, 4);
  detail::put_le<std::uint16_t>(out, StreamHeader::kVersion);
  detail::put_le<std::uint64_t>(out, vertex_count);
  detail::put_le<std::uint64_t>(out, ops.size());
  out.reserve(out.size() + ops.size() * StreamHeader::kRecordBytes);
  for (const auto& op : ops) {
    out.push_back(static_cast<char>(op.kind));
    detail::put_le<std::uint32_t>(out, op.u);
    detail::put_le<std::uint32_t>(out, op.v);
  }
  return out;
}

inline StreamHeader decode_header(const unsigned char* p) {
  if (std::memcmp(p, StreamHeader::kMagic, 4) != 0) throw Error(ErrorCode::kFormat, "bad magic");
  StreamHeader h;
  h.version = detail::get_le<std::uint16_t>(p + 4);
  if (h.version != StreamHeader::kVersion) {
    throw Error(ErrorCode::kFormat, "unsupported version " + std::to_string(h.version));
  }
  h.vertex_count = detail::get_le<std::uint64_t>(p + 6);
  h.op_count = detail::get_le<std::uint64_t>(p + 14);
  return h;
}

inline StreamOp decode_record(const unsigned char* p) {
  if (p[0] > 2) throw Error(ErrorCode::kFormat, "bad op kind " + std::to_string(p[0]));
  return {static_cast<OpKind>(p[0]), detail::get_le<std::uint32_t>(p + 1), detail::get_le<std::uint32_t>(p + 5)};
}

inline std::pair<StreamHeader, std::vector<StreamOp>> decode_stream(const std::string& bytes) {
  if (bytes.size() < StreamHeader::kBytes) throw Error(ErrorCode::kFormat, "truncated header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const StreamHeader h = decode_header(p);
  if ((bytes.size() - StreamHeader::kBytes) != h.op_count * StreamHeader::kRecordBytes) {
    throw Error(ErrorCode::kFormat, "record count does not match header");
  }
  std::vector<StreamOp> ops;
  ops.reserve(h.op_count);
  for (std::uint64_t i = 0; i < h.op_count; ++i) {
    ops.push_back(decode_record(p + StreamHeader::kBytes + i * StreamHeader::kRecordBytes));
  }
  return {h, std::move(ops)};
}

inline void write_stream(const std::string& path, std::uint64_t vertex_count, const std::vector<StreamOp>& ops) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path);
  const auto bytes = encode_stream(vertex_count, ops);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

/// Sequential reader over a stream file.
class StreamReader {
 public:
  explicit StreamReader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::kIo, "cannot open " + path);
    unsigned char buf[StreamHeader::kBytes];
    if (!in_.read(reinterpret_cast<char*>(buf), sizeof buf)) throw Error(ErrorCode::kFormat, "truncated header");
    header_ = decode_header(buf);
  }

  const StreamHeader& header() const noexcept { return header_; }

  std::optional<StreamOp> next() {
    if (read_ == header_.op_count) {
      if (in_.peek() != std::char_traits<char>::eof()) throw Error(ErrorCode::kFormat, "trailing bytes");
      return std::nullopt;
    }
    unsigned char buf[StreamHeader::kRecordBytes];
    if (!in_.read(reinterpret_cast<char*>(buf), sizeof buf)) {
      throw Error(ErrorCode::kFormat, "truncated at record " + std::to_string(read_));
    }
    ++read_;
    return decode_record(buf);
  }

 private:
  std::ifstream in_;
  StreamHeader header_;
  std::uint64_t read_ = 0;
};

inline std::pair<StreamHeader, std::vector<StreamOp>> read_stream(const std::string& path) {
  StreamReader reader(path);
  std::vector<StreamOp> ops;
  ops.reserve(reader.header().op_count);
  while (auto op = reader.next()) ops.push_back(*op);
  return {reader.header(), std::move(ops)};
}

struct StreamViolation {
  std::uint64_t index = 0;
  std::string reason;
};

/// First illegal op of the stream, if any.
inline std::optional<StreamViolation> check_legal(const std::vector<StreamOp>& ops, std::uint64_t vertex_count) {
  std::unordered_set<std::uint64_t> present;
  for (std::uint64_t i = 0; i < ops.size(); ++i) {
    const auto& op = ops[i];
    if (op.u >= vertex_count || op.v >= vertex_count) return StreamViolation{i, "vertex out of range"};
    if (op.u == op.v) return StreamViolation{i, "self loop"};
    if (op.kind == OpKind::kQuery) continue;
    const auto key = encode_edge(op.u, op.v, vertex_count).value;
    if (op.kind == OpKind::kInsert && !present.insert(key).second) return StreamViolation{i, "insert of a present edge"};
    if (op.kind == OpKind::kDelete && present.erase(key) == 0) return StreamViolation{i, "delete of an absent edge"};
  }
  return std::nullopt;
}

/// Throws unless edges form a simple graph on vertex_count vertices.
inline void require_simple(const std::vector<Edge>& edges, std::uint64_t vertex_count) {
  std::unordered_set<std::uint64_t> seen;
  for (auto [u, v] : edges) {
    if (u >= vertex_count || v >= vertex_count) throw Error(ErrorCode::kInvalidEdge, "vertex out of range");
    if (u == v) throw Error(ErrorCode::kInvalidEdge, "self loop " + std::to_string(u));
    if (!seen.insert(encode_edge(u, v, vertex_count).value).second) {
      throw Error(ErrorCode::kInvalidEdge, "duplicate edge " + std::to_string(u) + " " + std::to_string(v));
    }
  }
}

namespace detail {

inline void append_shuffled(std::vector<StreamOp>& out, std::vector<Edge> edges, OpKind kind, Rng& rng) {
  shuffle(edges, rng);
  for (auto [u, v] : edges) out.push_back({kind, u, v});
}

}  // namespace detail

/// Every edge inserted, then every edge deleted, each pass in a seeded order.
inline std::vector<StreamOp> gen_standard_stream(const std::vector<Edge>& edges, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<StreamOp> ops;
  ops.reserve(2 * edges.size());
  detail::append_shuffled(ops, edges, OpKind::kInsert, rng);
  detail::append_shuffled(ops, edges, OpKind::kDelete, rng);
  return ops;
}

/// BFS spanning forest, rooted at the lowest id of each component.
inline std::vector<Edge> spanning_forest(const std::vector<Edge>& edges, std::uint64_t vertex_count) {
  std::vector<std::vector<Vertex>> adj(vertex_count);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<char> seen(vertex_count, 0);
  std::vector<Edge> forest;
  for (std::uint64_t s = 0; s < vertex_count; ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    std::queue<Vertex> q;
    q.push(static_cast<Vertex>(s));
    while (!q.empty()) {
      const Vertex x = q.front();
      q.pop();
      for (Vertex y : adj[x]) {
        if (seen[y]) continue;
        seen[y] = 1;
        forest.emplace_back(x, y);
        q.push(y);
      }
    }
  }
  return forest;
}

/// Spanning forest inserted once and kept; the other edges are inserted and
/// then deleted `repeats` times, each pass freshly shuffled.
inline std::vector<StreamOp> gen_fixed_forest_stream(const std::vector<Edge>& edges, std::uint64_t vertex_count,
                                                     std::uint32_t repeats, std::uint64_t seed) {
  const auto forest = spanning_forest(edges, vertex_count);
  std::unordered_set<std::uint64_t> in_forest;
  for (auto [u, v] : forest) in_forest.insert(encode_edge(u, v, vertex_count).value);
  std::vector<Edge> rest;
  for (auto [u, v] : edges) {
    if (!in_forest.count(encode_edge(u, v, vertex_count).value)) rest.emplace_back(u, v);
  }
  Rng rng(seed);
  std::vector<StreamOp> ops;
  ops.reserve(forest.size() + 2 * rest.size() * repeats);
  detail::append_shuffled(ops, forest, OpKind::kInsert, rng);
  for (std::uint32_t r = 0; r < repeats; ++r) {
    detail::append_shuffled(ops, rest, OpKind::kInsert, rng);
    detail::append_shuffled(ops, rest, OpKind::kDelete, rng);
  }
  return ops;
}

inline Edge random_pair(Rng& rng, std::uint64_t vertex_count) {
  const auto u = static_cast<Vertex>(uniform_below(rng, vertex_count));
  auto v = static_cast<Vertex>(uniform_below(rng, vertex_count - 1));
  if (v >= u) ++v;
  return {u, v};
}

inline std::size_t query_burst_size(std::size_t rho) { return rho / 9; }

/// After every run of rho ~ U{1000..2000} updates, floor(rho / 9) queries with
/// uniform distinct endpoints. A short tail gets a burst sized by its length.
inline std::vector<StreamOp> interleave_queries(const std::vector<StreamOp>& updates, std::uint64_t vertex_count,
                                                std::uint64_t seed) {
  Rng rng(seed);
  std::vector<StreamOp> out;
  out.reserve(updates.size() + updates.size() / 8);
  std::size_t i = 0;
  while (i < updates.size()) {
    const std::size_t rho = 1000 + static_cast<std::size_t>(uniform_below(rng, 1001));
    const std::size_t run = std::min(rho, updates.size() - i);
    out.insert(out.end(), updates.begin() + static_cast<std::ptrdiff_t>(i),
               updates.begin() + static_cast<std::ptrdiff_t>(i + run));
    i += run;
    if (vertex_count < 2) continue;
    for (std::size_t q = 0; q < query_burst_size(run); ++q) {
      const auto [u, v] = random_pair(rng, vertex_count);
      out.push_back({OpKind::kQuery, u, v});
    }
  }
  return out;
}

/// Uniform G(n, m) without self loops or duplicates.
inline std::vector<Edge> random_graph(std::uint64_t vertex_count, std::uint64_t edge_count, std::uint64_t seed) {
  const std::uint64_t pairs = pair_count(vertex_count);
  if (edge_count > pairs) throw Error(ErrorCode::kInvalidConfig, "more edges than vertex pairs");
  Rng rng(seed);
  std::unordered_set<std::uint64_t> chosen;
  std::vector<Edge> edges;
  edges.reserve(edge_count);
  while (edges.size() < edge_count) {
    const auto idx = uniform_below(rng, pairs);
    if (chosen.insert(idx).second) edges.push_back(decode_edge(EdgeIndex{idx}, vertex_count));
  }
  return edges;
}

/// Legal random stream of `ops` operations whose edge count drifts around
/// `target_edges`; each op is a query with probability `query_fraction`.
inline std::vector<StreamOp> gen_random_stream(std::uint64_t vertex_count, std::size_t ops, std::size_t target_edges,
                                               double query_fraction, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> present;
  std::unordered_set<std::uint64_t> keys;
  std::vector<StreamOp> out;
  out.reserve(ops);
  const std::uint64_t pairs = pair_count(vertex_count);
  while (out.size() < ops) {
    if (vertex_count < 2) break;
    if (uniform_unit(rng) < query_fraction) {
      const auto [u, v] = random_pair(rng, vertex_count);
      out.push_back({OpKind::kQuery, u, v});
      continue;
    }
    const double fill = target_edges ? static_cast<double>(present.size()) / static_cast<double>(target_edges) : 1.0;
    const bool insert = present.empty() || (keys.size() < pairs && uniform_unit(rng) < 1.0 - 0.5 * fill);
    if (insert) {
      for (;;) {
        const auto [u, v] = random_pair(rng, vertex_count);
        if (!keys.insert(encode_edge(u, v, vertex_count).value).second) continue;
        present.emplace_back(u, v);
        out.push_back({OpKind::kInsert, u, v});
        break;
      }
    } else {
      const auto at = static_cast<std::size_t>(uniform_below(rng, present.size()));
      const auto [u, v] = present[at];
      present[at] = present.back();
      present.pop_back();
      keys.erase(encode_edge(u, v, vertex_count).value);
      out.push_back({OpKind::kDelete, u, v});
    }
  }
  return out;
}

/// Plain text edge list: one "u v" pair per line; '#' starts a comment.
/// Returns the edges and max vertex id + 1.
inline std::pair<std::vector<Edge>, std::uint64_t> parse_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::uint64_t vertex_count = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::uint64_t u, v;
    if (!(ls >> u)) continue;
    std::string extra;
    if (!(ls >> v) || (ls >> extra)) throw Error(ErrorCode::kFormat, "line " + std::to_string(lineno) + ": expected 'u v'");
    if (u > 0xffffffffULL || v > 0xffffffffULL) throw Error(ErrorCode::kFormat, "line " + std::to_string(lineno) + ": vertex id too large");
    edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
    vertex_count = std::max({vertex_count, u + 1, v + 1});
  }
  return {edges, vertex_count};
}

inline std::pair<std::vector<Edge>, std::uint64_t> read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return parse_edge_list(in);
}

}  // namespace sketchconn
