#pragma once

// Exact evaluation of the batch and incremental SGNS objectives, their difference,
// and Monte-Carlo estimates of its moments under random graph churn.
//
// Throughout, n is the number of positions (vertex occurrences) in a corpus and the
// window sum at position i runs over the J(i) = {j : 0 < |j| <= c, i + j inside the walk}.
// Noise expectations are evaluated exactly as sums over the support.

#include <cstdint>
#include <map>
#include <vector>

#include "isgns/noise_model.hpp"
#include "isgns/sgns_core.hpp"
#include "isgns/walk_engine.hpp"

namespace isgns {

/// -(1/n) sum_i sum_{j in J(i)} [psi+(w_i, w_{i+j}) + k sum_v q(v) psi-(w_i, v)].
/// Throws std::invalid_argument for an empty corpus, UnknownVertexError for a corpus
/// or support vertex missing from the model.
double objective_sgns(const EmbeddingModel& m, const WalkCorpus& corpus, const NoiseDistribution& q,
                      std::uint32_t k);

/// Old-corpus term with q_old, plus the added corpus term averaged over its positions
/// minus the vanished corpus term averaged over its positions, both with q_new. An
/// empty added or vanished corpus contributes nothing.
double objective_isgns(const EmbeddingModel& m, const WalkCorpus& old_corpus, const WalkCorpus& added,
                       const WalkCorpus& vanished, const NoiseDistribution& q_old,
                       const NoiseDistribution& q_new, std::uint32_t k);

struct ObjectiveReport {
  double L_sgns = 0.0;   ///< objective_sgns on the old corpus with q_new
  double L_isgns = 0.0;  ///< old-corpus term of objective_isgns (q_old)
  double delta = 0.0;    ///< closed form
  double delta_check = 0.0;  ///< L_sgns - L_isgns
  double bound = 0.0;    ///< (2ck/n) * psi_max
  double psi_max = 0.0;  ///< max |psi-(w, v)| over all model rows
  std::uint64_t n = 0;
};

/// Closed form of the objective difference:
///   -(2ck/n) sum_i sum_{w,v} [w_i = w] (|J(i)| / 2c) (q_new(v) - q_old(v)) psi-(w, v).
/// Rows with bit-identical target vectors are evaluated once.
double delta_closed_form(const EmbeddingModel& m, const WalkCorpus& old_corpus, const NoiseDistribution& q_old,
                         const NoiseDistribution& q_new, std::uint32_t k);

/// max |psi-(w, v)| over all pairs of model rows.
double psi_max(const EmbeddingModel& m);

/// Throws std::logic_error when the closed form and the direct difference disagree
/// beyond 1e-9 (relative to the objective magnitude).
ObjectiveReport objective_difference(const EmbeddingModel& m, const WalkCorpus& old_corpus,
                                     const NoiseDistribution& q_old, const NoiseDistribution& q_new,
                                     std::uint32_t k);

/// sum_{w,v} 24 c^2 k^2 / (L^2 T^2) * psi-(w, v)^2 over all pairs of model rows.
double second_moment_bound(const EmbeddingModel& m, const WalkConfig& walk, std::uint32_t k);

/// The objective difference for one walk realization: old corpus on `old_snapshot`,
/// new frequencies from the incremental corpora of the diff.
double realized_delta(const EmbeddingModel& m, const Snapshot& old_snapshot, const Snapshot& new_snapshot,
                      const WalkConfig& walk, std::uint32_t k);

enum class GraphModel { ErdosRenyi, BarabasiAlbert };

struct MomentConfig {
  GraphModel generator = GraphModel::ErdosRenyi;
  double average_degree = 10.0;
  std::vector<std::size_t> sizes{100, 200, 400, 800, 1600};  ///< vertex counts
  std::vector<double> churn_rates{0.01, 0.05, 0.10, 0.15};
  WalkConfig walk{80, 100, 5, std::nullopt, 1, 1};
  std::uint32_t k = 5;
  std::uint32_t trials = 30;
  std::size_t dim = 16;
  /// Target vectors are drawn from this many shared prototypes; contexts are i.i.d.
  std::size_t prototypes = 32;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct MomentRow {
  std::size_t vertices = 0;
  double positions = 0.0;  ///< mean n over trials
  double churn_rate = 0.0;
  double first_moment = 0.0;   ///< E[delta]
  double second_moment = 0.0;  ///< E[delta^2]
  double first_stderr = 0.0;
  double second_moment_bound = 0.0;
  double mean_first_bound = 0.0;  ///< mean of (2ck/n) psi_max
  std::uint32_t bound_violations = 0;  ///< trials with |delta| above (2ck/n) psi_max
  std::uint32_t trials = 0;
};

struct MomentReport {
  std::vector<MomentRow> rows;           ///< size-major, rates in config order
  std::map<double, double> slopes;       ///< churn rate -> log-log slope of |E[delta]| vs n
};

/// Parameters are fixed per size: prototype targets and random contexts with unit-
/// variance scores. Each trial draws a fresh graph and nested churn for all rates.
MomentReport estimate_moments(const MomentConfig& cfg);

/// Least-squares slope of log y against log x. Throws std::invalid_argument for
/// fewer than two points or non-positive values.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_moment_report(const MomentReport& r, std::ostream& out);
/// Whitespace-separated columns for plotting: n vertices, rate, E[delta], E[delta^2], bound.
void write_moment_data(const MomentReport& r, std::ostream& out);

}  // namespace isgns
