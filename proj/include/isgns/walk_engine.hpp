#pragma once

// Random-walk corpora over snapshots: uniform (DeepWalk) and second-order biased
// (node2vec) walks, affected-region detection, and incremental corpus regeneration.
//
// Every walk owns a random stream derived from (seed, root label, walk index). At each
// step the next vertex is decided by an exponential race: every neighbor x draws
// E_x ~ Exp(1) from a hash of (stream, step, label of x) and the smallest E_x / w_x
// wins, which selects x with probability w_x / sum(w). Because the draw for x depends
// only on labels, the same walk simulated on two snapshots makes identical choices
// until it reaches a vertex whose neighborhood differs. That coupling is what lets
// generate_incremental_corpora return exactly the walks that changed.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isgns/graph_store.hpp"

namespace isgns {

struct Node2vecBias {
  double p = 1.0;  ///< return parameter: weight 1/p for stepping back to the previous vertex
  double q = 1.0;  ///< in-out parameter: weight 1/q for moving away from the previous vertex
};

struct WalkConfig {
  std::uint32_t length = 80;            ///< L, vertices per walk
  std::uint32_t walks_per_vertex = 10;  ///< T
  std::uint32_t window = 5;             ///< c, contexts j in [-c, c] \ {0}
  std::optional<Node2vecBias> bias;     ///< unset: uniform (weight-proportional) walks
  std::uint64_t seed = 1;
  unsigned threads = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Walks stored back to back. Vertex ids refer to `source()`.
class WalkCorpus {
 public:
  WalkCorpus() = default;
  WalkCorpus(Snapshot source, std::uint32_t window);

  /// `shared_prefix` is the number of leading vertices this walk has in common with
  /// its counterpart on the other snapshot (0 for ordinary corpora).
  void add_walk(std::span<const VertexId> walk, std::uint32_t shared_prefix = 0);
  void append(const WalkCorpus& other);

  std::size_t size() const noexcept { return offsets_.size() - 1; }
  bool empty() const noexcept { return size() == 0; }
  std::span<const VertexId> walk(std::size_t i) const noexcept {
    return {tokens_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::uint32_t shared_prefix(std::size_t i) const noexcept { return prefix_[i]; }

  std::uint64_t token_count() const noexcept { return tokens_.size(); }
  std::uint64_t pair_count() const noexcept { return pair_count_; }
  std::uint32_t window() const noexcept { return window_; }
  const Snapshot& source() const noexcept { return source_; }
  std::span<const VertexId> tokens() const noexcept { return tokens_; }

 private:
  Snapshot source_;
  std::uint32_t window_ = 1;
  std::vector<VertexId> tokens_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> prefix_;
  std::uint64_t pair_count_ = 0;
};

/// Number of (target, context) pairs in a walk of `length` vertices.
std::uint64_t pairs_in_walk(std::uint64_t length, std::uint32_t window) noexcept;

/// Ordered pairs (w_i, w_{i+j}) for 0 < |j| <= window, by position i then j.
std::vector<std::pair<VertexId, VertexId>> extract_pairs(std::span<const VertexId> walk,
                                                          std::uint32_t window);

/// Unnormalized transition weights over `s.adjacent(cur)` (same order). With a bias
/// and a previous vertex this is the node2vec rule; otherwise the edge weights.
std::vector<double> transition_weights(const Snapshot& s, std::optional<VertexId> prev,
                                       VertexId cur, const std::optional<Node2vecBias>& bias);

/// Stream seed of walk `index` rooted at `root`.
std::uint64_t walk_stream(std::uint64_t seed, const Snapshot& s, VertexId root, std::uint32_t index);

/// Simulates one walk into `out` (cleared first).
void simulate_walk(const Snapshot& s, VertexId root, std::uint64_t stream, const WalkConfig& cfg,
                   std::vector<VertexId>& out);

/// T walks per vertex, roots in id order. Throws std::invalid_argument on an empty
/// snapshot or an invalid config. Output is independent of cfg.threads.
WalkCorpus generate_corpus(const Snapshot& s, const WalkConfig& cfg);

struct AffectedSet {
  std::vector<std::string> vertices;  ///< natural label order

  bool contains(std::string_view label) const;
  std::size_t size() const noexcept { return vertices.size(); }
};

/// Changed vertices and endpoints of changed edges, expanded by up to `hops`
/// breadth-first layers: through the old snapshot from removed elements and through
/// the new one from added elements and from surviving endpoints of removed edges.
AffectedSet affected_vertices(const GraphDiff& diff, const Snapshot& new_snapshot,
                              const Snapshot& old_snapshot, std::uint32_t hops);

struct IncrementalCorpora {
  WalkCorpus vanished;  ///< over the old snapshot
  WalkCorpus added;     ///< over the new snapshot
  std::uint64_t walks_examined = 0;
  std::uint64_t walks_resimulated = 0;
};

/// Walks of the old corpus that are not walks of the new corpus (vanished) and the
/// replacements (added), pairing walks by (root label, walk index). For corpora built
/// by generate_corpus with the same cfg, old - vanished + added == new as multisets.
IncrementalCorpora generate_incremental_corpora(const Snapshot& old_snapshot,
                                                const Snapshot& new_snapshot,
                                                const GraphDiff& diff, const WalkConfig& cfg);

/// One walk per line, space-separated vertex labels.
void write_corpus(const WalkCorpus& corpus, std::ostream& out);
WalkCorpus read_corpus(std::istream& in, const Snapshot& source, std::uint32_t window);

}  // namespace isgns
