#pragma once

// Skip-gram with negative sampling over walk corpora: batch training and the
// incremental descend-on-vanished / ascend-on-added update.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "isgns/noise_model.hpp"
#include "isgns/walk_engine.hpp"

namespace isgns {

/// Target vectors t_w and context vectors c_w, one row per vertex label.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  explicit EmbeddingModel(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }

  const std::string& label(std::size_t row) const { return labels_.at(row); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<std::size_t> find(std::string_view label) const;
  /// Throws UnknownVertexError.
  std::size_t row(std::string_view label) const;
  bool contains(std::string_view label) const { return find(label).has_value(); }

  std::span<double> target(std::size_t row) noexcept { return {target_.data() + row * dim_, dim_}; }
  std::span<const double> target(std::size_t row) const noexcept { return {target_.data() + row * dim_, dim_}; }
  std::span<double> context(std::size_t row) noexcept { return {context_.data() + row * dim_, dim_}; }
  std::span<const double> context(std::size_t row) const noexcept { return {context_.data() + row * dim_, dim_}; }

  /// Throws std::invalid_argument for a duplicate label or a wrong vector size.
  std::size_t add_row(std::string_view label, std::span<const double> target, std::span<const double> context);

  /// Bytes held by the row storage.
  std::size_t memory_bytes() const noexcept;
  bool all_finite() const noexcept;

  /// Same labels in the same order and bit-identical vectors.
  bool operator==(const EmbeddingModel& other) const;

 private:
  friend EmbeddingModel release_vanished(const EmbeddingModel&, std::span<const std::string>);

  std::size_t dim_ = 0;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> target_;
  std::vector<double> context_;
};

struct TrainConfig {
  std::uint32_t k = 5;  ///< negatives per pair
  double alpha0 = 0.025;
  double alpha_min = 1e-4;
  std::uint32_t epochs = 1;
  unsigned threads = 1;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct TrainStats {
  std::uint64_t pairs_processed = 0;
  std::uint64_t pairs_descended = 0;
  std::uint64_t pairs_ascended = 0;
  double wall_time = 0.0;  ///< seconds
  double mean_pair_objective = 0.0;
};

/// Row order follows `vertices`. Target components are U[-0.5/dim, 0.5/dim] drawn
/// from a stream keyed by (seed, label); contexts start at zero. Throws
/// std::invalid_argument for dim 0, an empty or duplicated vertex list.
EmbeddingModel init_model(std::span<const std::string> vertices, std::size_t dim, std::uint64_t seed);

/// Rows of `old` are kept verbatim (including vertices missing from new_vertices);
/// unseen labels are appended in the given order and initialized as in init_model.
EmbeddingModel inherit_model(const EmbeddingModel& old, std::span<const std::string> new_vertices,
                             std::uint64_t seed);

/// Drops the rows of the given labels; unknown labels are ignored.
EmbeddingModel release_vanished(const EmbeddingModel& m, std::span<const std::string> removed_vertices);

/// log sigma(x) without overflow.
double log_sigmoid(double x) noexcept;

/// psi+(w, ctx) + sum_neg psi-(w, neg), by row.
double pair_objective(const EmbeddingModel& m, std::size_t w, std::size_t ctx,
                      std::span<const std::size_t> negatives);

/// Analytic gradient of pair_objective with respect to t_w, c_ctx and each c_neg.
/// `grad_context` holds one vector per entry of {ctx, negatives...}; repeated rows
/// appear once per occurrence.
struct PairGradient {
  std::vector<double> grad_target;
  std::vector<std::vector<double>> grad_context;
};
PairGradient pair_gradient(const EmbeddingModel& m, std::size_t w, std::size_t ctx,
                           std::span<const std::size_t> negatives);

/// theta += sign * lr * gradient, all scores taken at the pre-step state. Returns the
/// pre-step pair objective. sign is +1 (ascent) or -1 (descent). Throws
/// std::out_of_range for a bad row, std::invalid_argument for lr <= 0 or bad sign.
double sgns_pair_step(EmbeddingModel& m, std::size_t w, std::size_t ctx,
                      std::span<const std::size_t> negatives, double lr, int sign);

/// Ascent over every pair of the corpus, negatives from dist. The learning rate
/// decays linearly from alpha0 to alpha_min over all pairs of all epochs. Throws
/// UnknownVertexError when a corpus or support vertex has no row.
TrainStats train_batch(EmbeddingModel& m, const WalkCorpus& corpus, const NoiseDistribution& dist,
                       const TrainConfig& cfg);

/// Descent over the vanished corpus, then ascent over the added corpus, negatives
/// from q_new in both phases. Pairs that lie entirely inside a walk's shared prefix
/// are skipped: they occur identically in both corpora and their updates cancel.
/// The learning rate restarts at alpha0 and decays over the pairs of both phases.
/// q_old is only consulted when `descend_with_old_noise` is set.
/// When `negative_log` is given (single-threaded only) every drawn negative row is
/// appended to it.
TrainStats train_incremental(EmbeddingModel& m, const WalkCorpus& vanished, const WalkCorpus& added,
                             const NoiseDistribution& q_old, const NoiseDistribution& q_new,
                             const TrainConfig& cfg, bool descend_with_old_noise = false,
                             std::vector<std::size_t>* negative_log = nullptr);

/// Number of pairs train_incremental visits in one walk.
std::uint64_t trained_pairs(std::uint64_t length, std::uint32_t window, std::uint32_t shared_prefix) noexcept;

// Text format: header `|V| dim`, then `label f_1 ... f_dim` per row.

void save_embeddings(const EmbeddingModel& m, std::ostream& out);
void save_context(const EmbeddingModel& m, std::ostream& out);
/// Targets only; contexts are zero. Throws ParseError.
EmbeddingModel load_embeddings(std::istream& in);
/// Targets plus the context sidecar. Throws ParseError when the two disagree.
EmbeddingModel load_model(std::istream& target_in, std::istream& context_in);

}  // namespace isgns
