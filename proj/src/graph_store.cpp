#include "isgns/graph_store.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "isgns/errors.hpp"
#include "isgns/random.hpp"

namespace isgns {

namespace {

bool all_digits(std::string_view s) noexcept {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string_view strip_zeros(std::string_view s) noexcept {
  auto pos = s.find_first_not_of('0');
  return pos == std::string_view::npos ? s.substr(s.size() - 1) : s.substr(pos);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

bool natural_less(std::string_view a, std::string_view b) noexcept {
  const bool na = all_digits(a);
  const bool nb = all_digits(b);
  if (na != nb) return na;
  if (na) {
    auto sa = strip_zeros(a);
    auto sb = strip_zeros(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
  }
  return a < b;
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Snapshot

struct Snapshot::Data {
  std::vector<std::string> labels;
  std::vector<std::uint64_t> keys;
  std::unordered_map<std::string, VertexId> index;
  std::vector<std::size_t> offsets{0};
  std::vector<Neighbor> adjacency;
  std::vector<char> uniform;
  std::vector<Edge> edges;
  std::optional<std::int64_t> timestamp;
};

Snapshot::Snapshot() : data_(std::make_shared<const Data>()) {}
Snapshot::Snapshot(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

std::size_t Snapshot::num_vertices() const noexcept { return data_->labels.size(); }
std::size_t Snapshot::num_edges() const noexcept { return data_->edges.size(); }

const std::string& Snapshot::label(VertexId v) const {
  if (v >= data_->labels.size()) throw std::out_of_range("vertex id out of range");
  return data_->labels[v];
}

std::optional<VertexId> Snapshot::find(std::string_view label) const {
  auto it = data_->index.find(std::string(label));
  if (it == data_->index.end()) return std::nullopt;
  return it->second;
}

VertexId Snapshot::id(std::string_view label) const {
  auto v = find(label);
  if (!v) throw UnknownVertexError(std::string(label));
  return *v;
}

std::uint64_t Snapshot::key(VertexId v) const noexcept { return data_->keys[v]; }

std::span<const Neighbor> Snapshot::adjacent(VertexId v) const noexcept {
  const auto& d = *data_;
  return {d.adjacency.data() + d.offsets[v], d.offsets[v + 1] - d.offsets[v]};
}

bool Snapshot::uniform_weights(VertexId v) const noexcept { return data_->uniform[v] != 0; }

std::optional<double> Snapshot::edge_weight(VertexId u, VertexId v) const noexcept {
  if (u >= num_vertices() || v >= num_vertices()) return std::nullopt;
  auto adj = adjacent(u);
  auto it = std::lower_bound(adj.begin(), adj.end(), v,
                             [](const Neighbor& n, VertexId id) { return n.id < id; });
  if (it == adj.end() || it->id != v) return std::nullopt;
  return it->weight;
}

std::span<const Edge> Snapshot::edges() const noexcept { return data_->edges; }
std::span<const std::string> Snapshot::labels() const noexcept { return data_->labels; }
std::optional<std::int64_t> Snapshot::timestamp() const noexcept { return data_->timestamp; }

bool Snapshot::operator==(const Snapshot& other) const {
  if (data_ == other.data_) return true;
  if (data_->labels != other.data_->labels) return false;
  const auto& a = data_->edges;
  const auto& b = other.data_->edges;
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].u != b[i].u || a[i].v != b[i].v || a[i].weight != b[i].weight) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// SnapshotBuilder

SnapshotBuilder::SnapshotBuilder(const Snapshot& base) {
  for (const auto& l : base.labels()) intern(l);
  for (const auto& e : base.edges()) {
    edges_[edge_key(e.u, e.v)] = e.weight;
    ++incident_[e.u];
    ++incident_[e.v];
  }
  timestamp_ = base.timestamp();
}

std::uint64_t SnapshotBuilder::edge_key(std::uint32_t a, std::uint32_t b) noexcept {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::optional<std::uint32_t> SnapshotBuilder::lookup(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t SnapshotBuilder::intern(std::string_view label) {
  if (auto id = lookup(label)) return *id;
  auto id = static_cast<std::uint32_t>(labels_.size());
  labels_.emplace_back(label);
  alive_.push_back(true);
  incident_.push_back(0);
  index_.emplace(std::string(label), id);
  return id;
}

void SnapshotBuilder::add_vertex(std::string_view label) {
  if (label.empty()) throw std::invalid_argument("empty vertex label");
  intern(label);
}

void SnapshotBuilder::add_edge(std::string_view u, std::string_view v, double weight) {
  if (u == v) throw std::invalid_argument("self-loop on vertex '" + std::string(u) + "'");
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw std::invalid_argument("edge weight must be positive and finite");
  }
  add_vertex(u);
  add_vertex(v);
  auto a = *lookup(u);
  auto b = *lookup(v);
  auto [it, inserted] = edges_.try_emplace(edge_key(a, b), weight);
  if (inserted) {
    ++incident_[a];
    ++incident_[b];
  } else {
    it->second = weight;
  }
}

bool SnapshotBuilder::remove_edge(std::string_view u, std::string_view v) {
  auto a = lookup(u);
  auto b = lookup(v);
  if (!a || !b) return false;
  if (edges_.erase(edge_key(*a, *b)) == 0) return false;
  --incident_[*a];
  --incident_[*b];
  return true;
}

bool SnapshotBuilder::remove_vertex(std::string_view label) {
  auto id = lookup(label);
  if (!id) return false;
  if (incident_[*id] != 0) {
    throw InconsistentDiffError("vertex '" + std::string(label) + "' still has " +
                                std::to_string(incident_[*id]) + " incident edge(s)");
  }
  alive_[*id] = false;
  index_.erase(std::string(label));
  return true;
}

bool SnapshotBuilder::has_vertex(std::string_view label) const { return lookup(label).has_value(); }

std::optional<double> SnapshotBuilder::edge_weight(std::string_view u, std::string_view v) const {
  auto a = lookup(u);
  auto b = lookup(v);
  if (!a || !b) return std::nullopt;
  auto it = edges_.find(edge_key(*a, *b));
  if (it == edges_.end()) return std::nullopt;
  return it->second;
}

Snapshot SnapshotBuilder::build() const {
  auto data = std::make_shared<Snapshot::Data>();
  std::vector<std::uint32_t> order;
  for (std::uint32_t i = 0; i < labels_.size(); ++i) {
    if (alive_[i]) order.push_back(i);
  }
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return natural_less(labels_[a], labels_[b]); });

  const std::size_t n = order.size();
  std::vector<VertexId> remap(labels_.size(), 0);
  data->labels.reserve(n);
  data->keys.reserve(n);
  for (VertexId v = 0; v < n; ++v) {
    remap[order[v]] = v;
    data->labels.push_back(labels_[order[v]]);
    data->keys.push_back(label_hash(data->labels.back()));
    data->index.emplace(data->labels.back(), v);
  }

  data->edges.reserve(edges_.size());
  std::vector<std::size_t> degree(n, 0);
  for (const auto& [key, w] : edges_) {
    VertexId a = remap[static_cast<std::uint32_t>(key >> 32)];
    VertexId b = remap[static_cast<std::uint32_t>(key & 0xFFFFFFFFu)];
    if (a > b) std::swap(a, b);
    data->edges.push_back({a, b, w});
    ++degree[a];
    ++degree[b];
  }
  std::sort(data->edges.begin(), data->edges.end(),
            [](const Edge& x, const Edge& y) { return x.u != y.u ? x.u < y.u : x.v < y.v; });

  data->offsets.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) data->offsets[v + 1] = data->offsets[v] + degree[v];
  data->adjacency.resize(data->offsets[n]);
  std::vector<std::size_t> fill(data->offsets.begin(), data->offsets.end() - 1);
  // Edges are sorted by (u, v): pushing both directions in this order leaves every
  // adjacency list sorted without a second pass.
  for (const auto& e : data->edges) data->adjacency[fill[e.v]++] = {e.u, e.weight};
  for (const auto& e : data->edges) data->adjacency[fill[e.u]++] = {e.v, e.weight};

  data->uniform.assign(n, 1);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t i = data->offsets[v] + 1; i < data->offsets[v + 1]; ++i) {
      if (data->adjacency[i].weight != data->adjacency[data->offsets[v]].weight) {
        data->uniform[v] = 0;
        break;
      }
    }
  }
  data->timestamp = timestamp_;
  return Snapshot(std::move(data));
}

// ---------------------------------------------------------------------------
// Edge-list text format

Snapshot load_edge_list(std::istream& in, const EdgeListFormat& format) {
  SnapshotBuilder builder;
  std::optional<std::int64_t> latest;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto tokens = split_ws(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;
    if (tokens.size() > 4) throw ParseError(lineno, "expected `u v [weight] [timestamp]`");
    if (tokens.size() == 1) {
      builder.add_vertex(tokens[0]);
      continue;
    }

    double weight = 1.0;
    if (tokens.size() >= 3) {
      auto tok = tokens[2];
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), weight);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        throw ParseError(lineno, "malformed weight '" + std::string(tok) + "'");
      }
      if (!(weight > 0.0) || !std::isfinite(weight)) {
        throw ParseError(lineno, "weight must be positive, got '" + std::string(tok) + "'");
      }
    }
    std::optional<std::int64_t> ts;
    if (tokens.size() == 4) {
      std::int64_t t = 0;
      auto tok = tokens[3];
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), t);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        throw ParseError(lineno, "malformed timestamp '" + std::string(tok) + "'");
      }
      ts = t;
    }
    if (ts) {
      if (format.time_begin && *ts < *format.time_begin) continue;
      if (format.time_end && *ts >= *format.time_end) continue;
      latest = latest ? std::max(*latest, *ts) : *ts;
    }
    if (tokens[0] == tokens[1]) {
      throw ParseError(lineno, "self-loop on vertex '" + std::string(tokens[0]) + "'");
    }
    builder.add_edge(tokens[0], tokens[1], weight);
  }
  builder.set_timestamp(latest);
  return builder.build();
}

Snapshot load_edge_list_file(const std::string& path, const EdgeListFormat& format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file '" + path + "'");
  return load_edge_list(in, format);
}

void write_edge_list(const Snapshot& s, std::ostream& out) {
  for (VertexId v = 0; v < s.num_vertices(); ++v) {
    if (s.degree(v) == 0) out << s.label(v) << '\n';
  }
  for (const auto& e : s.edges()) {
    out << s.label(e.u) << ' ' << s.label(e.v) << ' ' << format_double(e.weight) << '\n';
  }
}

void write_edge_list_file(const Snapshot& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_edge_list(s, out);
}

// ---------------------------------------------------------------------------
// Diffs

GraphDiff diff_snapshots(const Snapshot& old_snapshot, const Snapshot& new_snapshot) {
  GraphDiff diff;
  for (const auto& l : old_snapshot.labels()) {
    if (!new_snapshot.contains(l)) diff.removed_vertices.push_back(l);
  }
  for (const auto& l : new_snapshot.labels()) {
    if (!old_snapshot.contains(l)) diff.added_vertices.push_back(l);
  }

  auto lookup_in = [](const Snapshot& s, const std::string& a,
                      const std::string& b) -> std::optional<double> {
    auto u = s.find(a);
    auto v = s.find(b);
    if (!u || !v) return std::nullopt;
    return s.edge_weight(*u, *v);
  };
  for (const auto& e : old_snapshot.edges()) {
    const auto& a = old_snapshot.label(e.u);
    const auto& b = old_snapshot.label(e.v);
    auto w = lookup_in(new_snapshot, a, b);
    if (!w || *w != e.weight) diff.removed_edges.push_back({a, b, e.weight});
  }
  for (const auto& e : new_snapshot.edges()) {
    const auto& a = new_snapshot.label(e.u);
    const auto& b = new_snapshot.label(e.v);
    auto w = lookup_in(old_snapshot, a, b);
    if (!w || *w != e.weight) diff.added_edges.push_back({a, b, e.weight});
  }
  return diff;
}

Snapshot apply_diff(const Snapshot& old_snapshot, const GraphDiff& diff) {
  SnapshotBuilder b(old_snapshot);
  for (const auto& e : diff.removed_edges) {
    if (!b.remove_edge(e.u, e.v)) {
      throw InconsistentDiffError("cannot remove absent edge (" + e.u + ", " + e.v + ")");
    }
  }
  for (const auto& v : diff.removed_vertices) {
    if (!b.remove_vertex(v)) throw InconsistentDiffError("cannot remove absent vertex '" + v + "'");
  }
  for (const auto& v : diff.added_vertices) {
    if (b.has_vertex(v)) throw InconsistentDiffError("vertex '" + v + "' is already present");
    b.add_vertex(v);
  }
  for (const auto& e : diff.added_edges) {
    if (!b.has_vertex(e.u) || !b.has_vertex(e.v)) {
      throw InconsistentDiffError("edge (" + e.u + ", " + e.v + ") has an endpoint outside the graph");
    }
    if (b.edge_weight(e.u, e.v)) {
      throw InconsistentDiffError("edge (" + e.u + ", " + e.v + ") is already present");
    }
    try {
      b.add_edge(e.u, e.v, e.weight);
    } catch (const std::invalid_argument& ex) {
      throw InconsistentDiffError(ex.what());
    }
  }
  return b.build();
}

std::vector<std::pair<VertexId, double>> neighbors(const Snapshot& s, VertexId u) {
  if (u >= s.num_vertices()) throw UnknownVertexError("#" + std::to_string(u));
  std::vector<std::pair<VertexId, double>> out;
  for (const auto& n : s.adjacent(u)) out.emplace_back(n.id, n.weight);
  return out;
}

std::vector<std::pair<std::string, double>> neighbors(const Snapshot& s, std::string_view label) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& n : s.adjacent(s.id(label))) out.emplace_back(s.label(n.id), n.weight);
  return out;
}

}  // namespace isgns
