#include "isgns/walk_engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

#include "isgns/errors.hpp"
#include "isgns/random.hpp"
#include "parallel.hpp"

namespace isgns {

void WalkConfig::validate() const {
  if (length < 2) throw std::invalid_argument("walk length must be at least 2");
  if (walks_per_vertex < 1) throw std::invalid_argument("walks per vertex must be positive");
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  if (bias && !(bias->p > 0.0 && bias->q > 0.0 && std::isfinite(bias->p) && std::isfinite(bias->q))) {
    throw std::invalid_argument("node2vec p and q must be positive");
  }
}

// ---------------------------------------------------------------------------
// WalkCorpus

WalkCorpus::WalkCorpus(Snapshot source, std::uint32_t window)
    : source_(std::move(source)), window_(window) {
  if (window_ < 1) throw std::invalid_argument("window must be at least 1");
}

void WalkCorpus::add_walk(std::span<const VertexId> walk, std::uint32_t shared_prefix) {
  tokens_.insert(tokens_.end(), walk.begin(), walk.end());
  offsets_.push_back(tokens_.size());
  prefix_.push_back(shared_prefix);
  pair_count_ += pairs_in_walk(walk.size(), window_);
}

void WalkCorpus::append(const WalkCorpus& other) {
  for (std::size_t i = 0; i < other.size(); ++i) add_walk(other.walk(i), other.shared_prefix(i));
}

std::uint64_t pairs_in_walk(std::uint64_t length, std::uint32_t window) noexcept {
  if (length < 2) return 0;
  const std::uint64_t c = window;
  const std::uint64_t last = length - 1;
  // Each side contributes sum_{i=0}^{M-1} min(c, i).
  const std::uint64_t one_side = last <= c ? last * (last + 1) / 2 : c * (c + 1) / 2 + c * (last - c);
  return 2 * one_side;
}

std::vector<std::pair<VertexId, VertexId>> extract_pairs(std::span<const VertexId> walk,
                                                          std::uint32_t window) {
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  std::vector<std::pair<VertexId, VertexId>> out;
  out.reserve(pairs_in_walk(walk.size(), window));
  const auto n = static_cast<std::ptrdiff_t>(walk.size());
  const auto c = static_cast<std::ptrdiff_t>(window);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - c); j <= std::min(n - 1, i + c); ++j) {
      if (j != i) out.emplace_back(walk[i], walk[j]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Walk simulation

namespace {

bool is_biased(const std::optional<Node2vecBias>& bias) {
  return bias && (bias->p != 1.0 || bias->q != 1.0);
}

/// node2vec multiplier for each neighbor of cur given prev.
template <typename Sink>
void for_each_bias(const Snapshot& s, VertexId prev, VertexId cur, const Node2vecBias& bias,
                   Sink&& sink) {
  auto prev_adj = s.adjacent(prev);
  auto it = prev_adj.begin();
  for (const auto& n : s.adjacent(cur)) {
    double alpha;
    if (n.id == prev) {
      alpha = 1.0 / bias.p;
    } else {
      while (it != prev_adj.end() && it->id < n.id) ++it;
      alpha = (it != prev_adj.end() && it->id == n.id) ? 1.0 : 1.0 / bias.q;
    }
    sink(n, alpha);
  }
}

}  // namespace

std::vector<double> transition_weights(const Snapshot& s, std::optional<VertexId> prev,
                                       VertexId cur, const std::optional<Node2vecBias>& bias) {
  std::vector<double> out;
  if (prev && bias) {
    for_each_bias(s, *prev, cur, *bias,
                  [&](const Neighbor& n, double alpha) { out.push_back(alpha * n.weight); });
  } else {
    for (const auto& n : s.adjacent(cur)) out.push_back(n.weight);
  }
  return out;
}

std::uint64_t walk_stream(std::uint64_t seed, const Snapshot& s, VertexId root, std::uint32_t index) {
  return hash_combine(seed, s.key(root), index);
}

void simulate_walk(const Snapshot& s, VertexId root, std::uint64_t stream, const WalkConfig& cfg,
                   std::vector<VertexId>& out) {
  out.clear();
  out.push_back(root);
  const bool biased = is_biased(cfg.bias);
  std::optional<VertexId> prev;
  VertexId cur = root;
  for (std::uint32_t step = 1; step < cfg.length; ++step) {
    auto adj = s.adjacent(cur);
    if (adj.empty()) break;
    const std::uint64_t step_seed = hash_combine(stream, step);
    std::size_t best = 0;
    if (!(biased && prev) && s.uniform_weights(cur)) {
      // Equal weights: the smallest Exp(1) draw belongs to the largest uniform.
      std::uint64_t top = 0;
      for (std::size_t i = 0; i < adj.size(); ++i) {
        const std::uint64_t u = hash_combine(step_seed, s.key(adj[i].id)) >> 11;
        if (i == 0 || u > top) {
          top = u;
          best = i;
        }
      }
    } else {
      double top = 0.0;
      std::size_t i = 0;
      auto race = [&](const Neighbor& n, double alpha) {
        const double e = -std::log(to_open_unit(hash_combine(step_seed, s.key(n.id))));
        const double score = e / (alpha * n.weight);
        if (i == 0 || score < top) {
          top = score;
          best = i;
        }
        ++i;
      };
      if (biased && prev) {
        for_each_bias(s, *prev, cur, *cfg.bias, race);
      } else {
        for (const auto& n : adj) race(n, 1.0);
      }
    }
    prev = cur;
    cur = adj[best].id;
    out.push_back(cur);
  }
}

WalkCorpus generate_corpus(const Snapshot& s, const WalkConfig& cfg) {
  cfg.validate();
  if (s.empty()) throw std::invalid_argument("cannot generate walks on an empty snapshot");
  const std::size_t n = s.num_vertices();
  const std::size_t chunks = std::min<std::size_t>(n, 64 * std::max(1u, cfg.threads));
  std::vector<WalkCorpus> parts(chunks, WalkCorpus(s, cfg.window));
  detail::parallel_chunks(n, chunks, cfg.threads, [&](std::size_t c, std::size_t b, std::size_t e) {
    std::vector<VertexId> walk;
    walk.reserve(cfg.length);
    for (std::size_t v = b; v < e; ++v) {
      for (std::uint32_t t = 0; t < cfg.walks_per_vertex; ++t) {
        const auto root = static_cast<VertexId>(v);
        simulate_walk(s, root, walk_stream(cfg.seed, s, root, t), cfg, walk);
        parts[c].add_walk(walk);
      }
    }
  });
  WalkCorpus corpus(s, cfg.window);
  for (const auto& p : parts) corpus.append(p);
  return corpus;
}

// ---------------------------------------------------------------------------
// Affected region

bool AffectedSet::contains(std::string_view label) const {
  return std::binary_search(vertices.begin(), vertices.end(), label, NaturalLess{});
}

namespace {

void expand(const Snapshot& s, std::vector<VertexId> frontier, std::uint32_t hops,
            std::set<std::string, NaturalLess>& out) {
  std::vector<char> seen(s.num_vertices(), 0);
  for (auto v : frontier) seen[v] = 1;
  for (std::uint32_t h = 0; h < hops && !frontier.empty(); ++h) {
    std::vector<VertexId> next;
    for (auto v : frontier) {
      for (const auto& n : s.adjacent(v)) {
        if (!seen[n.id]) {
          seen[n.id] = 1;
          next.push_back(n.id);
        }
      }
    }
    frontier = std::move(next);
  }
  for (VertexId v = 0; v < s.num_vertices(); ++v) {
    if (seen[v]) out.insert(s.label(v));
  }
}

}  // namespace

AffectedSet affected_vertices(const GraphDiff& diff, const Snapshot& new_snapshot,
                              const Snapshot& old_snapshot, std::uint32_t hops) {
  std::vector<VertexId> old_seeds;
  std::vector<VertexId> new_seeds;
  auto seed_old = [&](const std::string& l) {
    if (auto v = old_snapshot.find(l)) old_seeds.push_back(*v);
  };
  auto seed_new = [&](const std::string& l) {
    if (auto v = new_snapshot.find(l)) new_seeds.push_back(*v);
  };
  for (const auto& v : diff.removed_vertices) seed_old(v);
  for (const auto& e : diff.removed_edges) {
    seed_old(e.u);
    seed_old(e.v);
    seed_new(e.u);
    seed_new(e.v);
  }
  for (const auto& v : diff.added_vertices) seed_new(v);
  for (const auto& e : diff.added_edges) {
    seed_new(e.u);
    seed_new(e.v);
  }
  std::set<std::string, NaturalLess> out;
  expand(old_snapshot, std::move(old_seeds), hops, out);
  expand(new_snapshot, std::move(new_seeds), hops, out);
  return AffectedSet{{out.begin(), out.end()}};
}

// ---------------------------------------------------------------------------
// Incremental corpora

namespace {

struct RootPair {
  std::optional<VertexId> in_old;
  std::optional<VertexId> in_new;
};

std::vector<RootPair> merge_roots(const Snapshot& a, const Snapshot& b) {
  std::vector<RootPair> out;
  out.reserve(std::max(a.num_vertices(), b.num_vertices()));
  VertexId i = 0, j = 0;
  const auto na = static_cast<VertexId>(a.num_vertices());
  const auto nb = static_cast<VertexId>(b.num_vertices());
  while (i < na || j < nb) {
    if (j == nb || (i < na && natural_less(a.label(i), b.label(j)))) {
      out.push_back({i++, std::nullopt});
    } else if (i == na || natural_less(b.label(j), a.label(i))) {
      out.push_back({std::nullopt, j++});
    } else {
      out.push_back({i++, j++});
    }
  }
  return out;
}

}  // namespace

IncrementalCorpora generate_incremental_corpora(const Snapshot& old_snapshot,
                                                const Snapshot& new_snapshot,
                                                const GraphDiff& diff, const WalkConfig& cfg) {
  cfg.validate();
  IncrementalCorpora result{WalkCorpus(old_snapshot, cfg.window), WalkCorpus(new_snapshot, cfg.window)};
  if (diff.empty()) return result;

  // Vertices whose outgoing transition law may differ between the snapshots.
  std::vector<char> dirty(old_snapshot.num_vertices(), 0);
  auto mark = [&](const std::string& l) {
    if (auto v = old_snapshot.find(l)) dirty[*v] = 1;
  };
  for (const auto& v : diff.removed_vertices) mark(v);
  for (const auto& e : diff.removed_edges) {
    mark(e.u);
    mark(e.v);
  }
  for (const auto& e : diff.added_edges) {
    mark(e.u);
    mark(e.v);
  }

  const auto roots = merge_roots(old_snapshot, new_snapshot);
  const std::size_t chunks = std::min<std::size_t>(roots.size(), 64 * std::max(1u, cfg.threads));
  struct Part {
    WalkCorpus vanished, added;
    std::uint64_t examined = 0, resimulated = 0;
  };
  std::vector<Part> parts(chunks, Part{WalkCorpus(old_snapshot, cfg.window),
                                       WalkCorpus(new_snapshot, cfg.window)});

  detail::parallel_chunks(roots.size(), chunks, cfg.threads,
                          [&](std::size_t c, std::size_t b, std::size_t e) {
    auto& part = parts[c];
    std::vector<VertexId> wo, wn;
    for (std::size_t r = b; r < e; ++r) {
      const auto& root = roots[r];
      for (std::uint32_t t = 0; t < cfg.walks_per_vertex; ++t) {
        ++part.examined;
        if (!root.in_old) {
          simulate_walk(new_snapshot, *root.in_new, walk_stream(cfg.seed, new_snapshot, *root.in_new, t),
                        cfg, wn);
          part.added.add_walk(wn);
          continue;
        }
        simulate_walk(old_snapshot, *root.in_old, walk_stream(cfg.seed, old_snapshot, *root.in_old, t),
                      cfg, wo);
        if (!root.in_new) {
          part.vanished.add_walk(wo);
          continue;
        }
        // Only positions where the walk chose how to continue (or stopped at a dead
        // end) can be affected by a neighborhood change.
        const std::size_t decisions = wo.size() < cfg.length ? wo.size() : wo.size() - 1;
        bool touched = false;
        for (std::size_t i = 0; i < decisions && !touched; ++i) touched = dirty[wo[i]] != 0;
        if (!touched) continue;

        ++part.resimulated;
        simulate_walk(new_snapshot, *root.in_new, walk_stream(cfg.seed, new_snapshot, *root.in_new, t),
                      cfg, wn);
        std::size_t common = 0;
        while (common < wo.size() && common < wn.size() &&
               old_snapshot.key(wo[common]) == new_snapshot.key(wn[common]) &&
               old_snapshot.label(wo[common]) == new_snapshot.label(wn[common])) {
          ++common;
        }
        if (common == wo.size() && common == wn.size()) continue;
        part.vanished.add_walk(wo, static_cast<std::uint32_t>(common));
        part.added.add_walk(wn, static_cast<std::uint32_t>(common));
      }
    }
  });

  for (const auto& p : parts) {
    result.vanished.append(p.vanished);
    result.added.append(p.added);
    result.walks_examined += p.examined;
    result.walks_resimulated += p.resimulated;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Persistence

void write_corpus(const WalkCorpus& corpus, std::ostream& out) {
  const auto& s = corpus.source();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto w = corpus.walk(i);
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (k) out << ' ';
      out << s.label(w[k]);
    }
    out << '\n';
  }
}

WalkCorpus read_corpus(std::istream& in, const Snapshot& source, std::uint32_t window) {
  WalkCorpus corpus(source, window);
  std::string line, tok;
  std::size_t lineno = 0;
  std::vector<VertexId> walk;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    walk.clear();
    while (ls >> tok) {
      auto v = source.find(tok);
      if (!v) throw ParseError(lineno, "unknown vertex '" + tok + "'");
      walk.push_back(*v);
    }
    if (!walk.empty()) corpus.add_walk(walk);
  }
  return corpus;
}

}  // namespace isgns
