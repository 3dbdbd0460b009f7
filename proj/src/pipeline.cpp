#include "isgns/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace isgns {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

}  // namespace

FullResult train_full(const Snapshot& s, const EmbeddingConfig& cfg) {
  const auto start = Clock::now();
  FullResult r;
  const auto corpus = generate_corpus(s, cfg.walk);
  r.walks = corpus.size();
  r.walk_time = seconds_since(start);
  r.checkpoint.frequencies = count_frequencies(corpus);
  const auto dist = build_distribution(r.checkpoint.frequencies, cfg.noise_exponent);
  const std::vector<std::string> labels(s.labels().begin(), s.labels().end());
  r.checkpoint.model = init_model(labels, cfg.dim, cfg.train.seed);
  r.train = train_batch(r.checkpoint.model, corpus, dist, cfg.train);
  r.total_time = seconds_since(start);
  return r;
}

UpdateResult update_embeddings(const Checkpoint& previous, const Snapshot& old_snapshot,
                               const Snapshot& new_snapshot, const EmbeddingConfig& cfg) {
  const auto start = Clock::now();
  for (const auto& label : old_snapshot.labels()) {
    if (!previous.model.contains(label)) {
      throw CheckpointMismatch("checkpoint has no vector for vertex '" + label + "' of the old graph");
    }
  }
  if (previous.model.dim() != cfg.dim) throw CheckpointMismatch("checkpoint dimension differs from --dim");

  UpdateResult r;
  auto& st = r.stats;
  const auto diff = diff_snapshots(old_snapshot, new_snapshot);
  st.added_vertices = diff.added_vertices.size();
  st.removed_vertices = diff.removed_vertices.size();
  st.added_edges = diff.added_edges.size();
  st.removed_edges = diff.removed_edges.size();
  if (diff.empty()) {
    r.checkpoint = previous;
    st.total_time = seconds_since(start);
    return r;
  }

  st.affected_vertices = affected_vertices(diff, new_snapshot, old_snapshot, cfg.walk.window).size();
  if (!new_snapshot.empty()) {
    st.affected_fraction = static_cast<double>(st.affected_vertices) / static_cast<double>(new_snapshot.num_vertices());
  }
  const auto inc = generate_incremental_corpora(old_snapshot, new_snapshot, diff, cfg.walk);
  st.walks_examined = inc.walks_examined;
  st.walks_resimulated = inc.walks_resimulated;
  st.vanished_walks = inc.vanished.size();
  st.added_walks = inc.added.size();
  st.walk_time = seconds_since(start);

  const auto q_old = build_distribution(previous.frequencies, cfg.noise_exponent);
  r.checkpoint.frequencies = update_frequencies(previous.frequencies, inc.added, inc.vanished);
  r.checkpoint.frequencies.prune();
  const auto q_new = build_distribution(r.checkpoint.frequencies, cfg.noise_exponent);

  const std::vector<std::string> labels(new_snapshot.labels().begin(), new_snapshot.labels().end());
  auto model = inherit_model(previous.model, labels, cfg.train.seed);
  st.train = train_incremental(model, inc.vanished, inc.added, q_old, q_new, cfg.train);
  r.checkpoint.model = release_vanished(model, diff.removed_vertices);
  st.total_time = seconds_since(start);
  return r;
}

void save_checkpoint(const Checkpoint& c, const std::string& dir) {
  const std::filesystem::path base(dir);
  std::filesystem::create_directories(base);
  auto emb = open_out(base / "embeddings.txt");
  save_embeddings(c.model, emb);
  auto ctx = open_out(base / "context.txt");
  save_context(c.model, ctx);
  auto freq = open_out(base / "frequencies.txt");
  write_frequencies(c.frequencies, freq);
}

Checkpoint load_checkpoint(const std::string& dir) {
  const std::filesystem::path base(dir);
  auto emb = open_in(base / "embeddings.txt");
  auto ctx = open_in(base / "context.txt");
  auto freq = open_in(base / "frequencies.txt");
  return {load_model(emb, ctx), read_frequencies(freq)};
}

}  // namespace isgns
