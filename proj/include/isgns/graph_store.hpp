#pragma once

// Weighted undirected graph snapshots, snapshot diffs, and the edge-list text format.
//
// Vertices carry an external string label. Inside a snapshot they are addressed by a
// dense VertexId in 0..|V|-1, assigned in natural label order (integer labels compare
// numerically, other labels lexicographically after them), so the id order and
// everything derived from it is independent of input line order.

#include <compare>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace isgns {

using VertexId = std::uint32_t;

/// Strict weak order on labels used everywhere a canonical order is needed.
bool natural_less(std::string_view a, std::string_view b) noexcept;

struct NaturalLess {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const noexcept { return natural_less(a, b); }
};

struct Neighbor {
  VertexId id;
  double weight;
};

/// Edge by internal id, canonical u < v.
struct Edge {
  VertexId u;
  VertexId v;
  double weight;
};

/// Edge by external label, canonical natural_less(u, v).
struct LabeledEdge {
  std::string u;
  std::string v;
  double weight = 1.0;

  bool operator==(const LabeledEdge&) const = default;
};

/// Immutable snapshot. Copies share storage; safe to read from many threads.
class Snapshot {
 public:
  Snapshot();

  std::size_t num_vertices() const noexcept;
  std::size_t num_edges() const noexcept;
  bool empty() const noexcept { return num_vertices() == 0; }

  const std::string& label(VertexId v) const;
  std::optional<VertexId> find(std::string_view label) const;
  /// Throws UnknownVertexError.
  VertexId id(std::string_view label) const;
  bool contains(std::string_view label) const { return find(label).has_value(); }

  /// Stable 64-bit key of the vertex label; identical across snapshots.
  std::uint64_t key(VertexId v) const noexcept;

  /// Neighbors in ascending id order.
  std::span<const Neighbor> adjacent(VertexId v) const noexcept;
  std::size_t degree(VertexId v) const noexcept { return adjacent(v).size(); }
  /// True when all edges at v carry the same weight.
  bool uniform_weights(VertexId v) const noexcept;

  std::optional<double> edge_weight(VertexId u, VertexId v) const noexcept;
  bool has_edge(VertexId u, VertexId v) const noexcept { return edge_weight(u, v).has_value(); }

  /// All edges, sorted by (u, v).
  std::span<const Edge> edges() const noexcept;
  std::span<const std::string> labels() const noexcept;

  std::optional<std::int64_t> timestamp() const noexcept;

  /// Same labels, edges and weights. Timestamps are ignored.
  bool operator==(const Snapshot& other) const;

 private:
  struct Data;
  explicit Snapshot(std::shared_ptr<const Data> data);
  std::shared_ptr<const Data> data_;

  friend class SnapshotBuilder;
};

/// Mutable staging area for a Snapshot.
class SnapshotBuilder {
 public:
  SnapshotBuilder() = default;
  explicit SnapshotBuilder(const Snapshot& base);

  void add_vertex(std::string_view label);
  /// Inserts or overwrites (last write wins). Throws std::invalid_argument for a
  /// self-loop or a non-positive or non-finite weight.
  void add_edge(std::string_view u, std::string_view v, double weight = 1.0);
  /// Returns false when the edge was absent.
  bool remove_edge(std::string_view u, std::string_view v);
  /// Returns false when the vertex was absent. Throws InconsistentDiffError when
  /// edges are still incident to the vertex.
  bool remove_vertex(std::string_view label);

  bool has_vertex(std::string_view label) const;
  std::optional<double> edge_weight(std::string_view u, std::string_view v) const;
  void set_timestamp(std::optional<std::int64_t> ts) { timestamp_ = ts; }

  Snapshot build() const;

 private:
  std::uint32_t intern(std::string_view label);
  std::optional<std::uint32_t> lookup(std::string_view label) const;
  static std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) noexcept;

  std::vector<std::string> labels_;
  std::vector<bool> alive_;
  std::vector<std::uint32_t> incident_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::unordered_map<std::uint64_t, double> edges_;
  std::optional<std::int64_t> timestamp_;
};

/// Delta between two snapshots. Weight changes appear as a removal (old weight)
/// plus an addition (new weight). All lists are in canonical order.
struct GraphDiff {
  std::vector<std::string> added_vertices;
  std::vector<std::string> removed_vertices;
  std::vector<LabeledEdge> added_edges;
  std::vector<LabeledEdge> removed_edges;

  bool empty() const noexcept {
    return added_vertices.empty() && removed_vertices.empty() && added_edges.empty() &&
           removed_edges.empty();
  }
  bool operator==(const GraphDiff&) const = default;
};

struct EdgeListFormat {
  /// Keep only lines whose timestamp lies in [time_begin, time_end). Lines without
  /// a timestamp are always kept.
  std::optional<std::int64_t> time_begin;
  std::optional<std::int64_t> time_end;
};

/// Parses `u v [weight] [timestamp]` lines. A single-token line declares an
/// isolated vertex. `#` starts a comment line. Throws ParseError.
Snapshot load_edge_list(std::istream& in, const EdgeListFormat& format = {});
Snapshot load_edge_list_file(const std::string& path, const EdgeListFormat& format = {});

/// Canonical, byte-stable serialization readable by load_edge_list.
void write_edge_list(const Snapshot& s, std::ostream& out);
void write_edge_list_file(const Snapshot& s, const std::string& path);

GraphDiff diff_snapshots(const Snapshot& old_snapshot, const Snapshot& new_snapshot);

/// Throws InconsistentDiffError when the diff does not fit `old_snapshot`.
Snapshot apply_diff(const Snapshot& old_snapshot, const GraphDiff& diff);

/// Ascending neighbor id order. Throws UnknownVertexError.
std::vector<std::pair<VertexId, double>> neighbors(const Snapshot& s, VertexId u);
std::vector<std::pair<std::string, double>> neighbors(const Snapshot& s, std::string_view label);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

}  // namespace isgns
