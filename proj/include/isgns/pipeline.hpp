#pragma once

// End-to-end training and incremental update over snapshots, and checkpoints.

#include <cstdint>
#include <stdexcept>
#include <string>

#include "isgns/graph_store.hpp"
#include "isgns/noise_model.hpp"
#include "isgns/sgns_core.hpp"
#include "isgns/walk_engine.hpp"

namespace isgns {

struct EmbeddingConfig {
  WalkConfig walk;
  TrainConfig train;
  std::size_t dim = 128;
  double noise_exponent = 0.75;
};

/// What an update needs from the previous run.
struct Checkpoint {
  EmbeddingModel model;
  FrequencyTable frequencies;
};

struct FullResult {
  Checkpoint checkpoint;
  TrainStats train;
  std::uint64_t walks = 0;
  double walk_time = 0.0;   ///< seconds
  double total_time = 0.0;  ///< seconds
};

/// Walks, frequency count, fresh model, batch training.
FullResult train_full(const Snapshot& s, const EmbeddingConfig& cfg);

struct UpdateStats {
  std::size_t added_vertices = 0;
  std::size_t removed_vertices = 0;
  std::size_t added_edges = 0;
  std::size_t removed_edges = 0;
  std::size_t affected_vertices = 0;  ///< within `window` hops of a change
  double affected_fraction = 0.0;     ///< of the new vertex count
  std::uint64_t walks_examined = 0;
  std::uint64_t walks_resimulated = 0;
  std::uint64_t vanished_walks = 0;
  std::uint64_t added_walks = 0;
  TrainStats train;
  double walk_time = 0.0;
  double total_time = 0.0;
};

struct UpdateResult {
  Checkpoint checkpoint;
  UpdateStats stats;
};

/// Thrown when a checkpoint does not cover the vertices of the old snapshot.
class CheckpointMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Diff, incremental corpora, frequency update, inheritance, descent and ascent,
/// release of removed vertices. Throws CheckpointMismatch.
UpdateResult update_embeddings(const Checkpoint& previous, const Snapshot& old_snapshot,
                               const Snapshot& new_snapshot, const EmbeddingConfig& cfg);

/// Files written into `dir`: embeddings.txt, context.txt, frequencies.txt.
void save_checkpoint(const Checkpoint& c, const std::string& dir);
/// Throws std::runtime_error for missing files, ParseError for malformed ones.
Checkpoint load_checkpoint(const std::string& dir);

}  // namespace isgns
