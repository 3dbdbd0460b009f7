#include "isgns/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "isgns/random.hpp"

namespace isgns {

namespace {

std::uint64_t pair_key(std::size_t a, std::size_t b) noexcept {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

class EdgeSet {
 public:
  explicit EdgeSet(std::size_t n) {
    for (std::size_t v = 0; v < n; ++v) b_.add_vertex(std::to_string(v));
  }
  bool add(std::size_t a, std::size_t b) {
    if (a == b || !seen_.insert(pair_key(a, b)).second) return false;
    b_.add_edge(std::to_string(a), std::to_string(b));
    return true;
  }
  std::size_t size() const noexcept { return seen_.size(); }
  Snapshot build() const { return b_.build(); }

 private:
  SnapshotBuilder b_;
  std::unordered_set<std::uint64_t> seen_;
};

}  // namespace

Snapshot erdos_renyi(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 2 && m > 0) throw std::invalid_argument("need two vertices for an edge");
  if (m > n * (n - 1) / 2) throw std::invalid_argument("too many edges for G(n, m)");
  EdgeSet g(n);
  SplitMix64 rng(seed);
  while (g.size() < m) g.add(rng.below(n), rng.below(n));
  return g.build();
}

Snapshot barabasi_albert(std::size_t n, std::size_t attach, std::uint64_t seed) {
  if (attach < 1 || n <= attach) throw std::invalid_argument("need n > attach >= 1");
  EdgeSet g(n);
  SplitMix64 rng(seed);
  std::vector<std::size_t> ends;  // each vertex once per incident edge
  for (std::size_t a = 0; a <= attach; ++a) {
    for (std::size_t b = a + 1; b <= attach; ++b) {
      g.add(a, b);
      ends.push_back(a);
      ends.push_back(b);
    }
  }
  std::vector<std::size_t> picks;
  for (std::size_t v = attach + 1; v < n; ++v) {
    picks.clear();
    while (picks.size() < attach) {
      const auto u = ends[rng.below(ends.size())];
      if (std::find(picks.begin(), picks.end(), u) == picks.end()) picks.push_back(u);
    }
    for (auto u : picks) {
      g.add(u, v);
      ends.push_back(u);
      ends.push_back(v);
    }
  }
  return g.build();
}

Snapshot two_cliques(std::size_t size) {
  if (size < 2) throw std::invalid_argument("cliques need two vertices");
  EdgeSet g(2 * size);
  for (std::size_t base : {std::size_t{0}, size}) {
    for (std::size_t a = 0; a < size; ++a) {
      for (std::size_t b = a + 1; b < size; ++b) g.add(base + a, base + b);
    }
  }
  g.add(size - 1, size);
  return g.build();
}

std::size_t two_block_of(std::size_t vertex, std::size_t block) noexcept { return vertex < block ? 0 : 1; }

Snapshot two_block_ring(std::size_t block, std::size_t reach, std::size_t chords, std::size_t bridges,
                        std::uint64_t seed) {
  if (block < 2 * reach + 2) throw std::invalid_argument("block too small for the ring reach");
  EdgeSet g(2 * block);
  SplitMix64 rng(seed);
  for (std::size_t base : {std::size_t{0}, block}) {
    for (std::size_t a = 0; a < block; ++a) {
      for (std::size_t d = 1; d <= reach; ++d) g.add(base + a, base + (a + d) % block);
    }
    for (std::size_t added = 0; added < chords;) {
      added += g.add(base + rng.below(block), base + rng.below(block));
    }
  }
  for (std::size_t added = 0; added < bridges;) added += g.add(rng.below(block), block + rng.below(block));
  return g.build();
}

GraphDiff synthesize_churn(const Snapshot& s, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("churn rate must lie in [0, 1)");
  const std::size_t m = s.num_edges();
  const auto changes = static_cast<std::size_t>(std::llround(rate * static_cast<double>(m)));
  const std::size_t removals = changes / 2;
  const std::size_t additions = changes - removals;
  const std::size_t n = s.num_vertices();
  if (additions > 0 && (n < 2 || m + additions > n * (n - 1) / 2)) {
    throw std::invalid_argument("graph too dense to add edges");
  }

  GraphDiff diff;
  // A partial Fisher-Yates shuffle: its first r positions do not depend on how far it runs.
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  SplitMix64 remove_rng(hash_combine(seed, 1));
  const auto edges = s.edges();
  for (std::size_t i = 0; i < removals; ++i) {
    std::swap(order[i], order[i + remove_rng.below(m - i)]);
    const auto& e = edges[order[i]];
    diff.removed_edges.push_back({s.label(e.u), s.label(e.v), e.weight});
  }

  SplitMix64 add_rng(hash_combine(seed, 2));
  std::unordered_set<std::uint64_t> fresh;
  while (fresh.size() < additions) {
    const auto a = static_cast<VertexId>(add_rng.below(n));
    const auto b = static_cast<VertexId>(add_rng.below(n));
    if (a == b || s.has_edge(a, b) || !fresh.insert(pair_key(a, b)).second) continue;
    diff.added_edges.push_back({s.label(std::min(a, b)), s.label(std::max(a, b)), 1.0});
  }

  auto canonical = [](const LabeledEdge& x, const LabeledEdge& y) {
    if (x.u != y.u) return natural_less(x.u, y.u);
    return natural_less(x.v, y.v);
  };
  std::sort(diff.removed_edges.begin(), diff.removed_edges.end(), canonical);
  std::sort(diff.added_edges.begin(), diff.added_edges.end(), canonical);
  return diff;
}

}  // namespace isgns
