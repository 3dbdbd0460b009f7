#pragma once

// Embedding quality: link prediction from edge features and multi-label vertex
// classification with one-vs-rest logistic regression.

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "isgns/graph_store.hpp"
#include "isgns/sgns_core.hpp"

namespace isgns {

enum class EdgeOperator { Average, Hadamard, WeightedL1, WeightedL2 };

inline constexpr EdgeOperator kEdgeOperators[] = {EdgeOperator::Average, EdgeOperator::Hadamard,
                                                  EdgeOperator::WeightedL1, EdgeOperator::WeightedL2};

std::string_view to_string(EdgeOperator op) noexcept;
/// Accepts average, hadamard, weighted-l1, weighted-l2. Throws std::invalid_argument.
EdgeOperator parse_edge_operator(std::string_view name);

/// Throws std::invalid_argument on a dimension mismatch.
std::vector<double> edge_features(std::span<const double> a, std::span<const double> b, EdgeOperator op);

/// Mann-Whitney statistic P(pos > neg) + P(tie) / 2. Throws std::invalid_argument
/// when either list is empty.
double auc(std::span<const double> pos_scores, std::span<const double> neg_scores);

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  std::span<double> row(std::size_t i) noexcept { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data.data() + i * cols, cols}; }
};

/// Binary L2-regularized logistic regression; the bias is not regularized.
struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::uint32_t iterations = 0;

  double decision(std::span<const double> x) const noexcept;
  double probability(std::span<const double> x) const noexcept;
};

/// sum_i logloss(y_i, sigma(w.x_i + b)) + lambda/2 |w|^2, and its gradient
/// (weights first, bias last).
double logistic_objective(const LogisticModel& m, const Matrix& x, std::span<const int> y, double lambda,
                          std::vector<double>* gradient = nullptr);

/// Full-batch gradient descent, scaled by a diagonal Hessian bound, with backtracking
/// line search until the gradient norm
/// drops below `tolerance` or `max_iterations` is reached. Labels are 0 or 1.
LogisticModel train_logistic(const Matrix& x, std::span<const int> y, double lambda = 1.0,
                             double tolerance = 1e-6, std::uint32_t max_iterations = 1000);

struct OvrClassifier {
  std::vector<int> labels;
  std::vector<LogisticModel> models;

  /// One decision value per entry of `labels`.
  std::vector<double> scores(std::span<const double> x) const;
};

/// One model per label seen in training; labels that only occur at test time are
/// never predicted. Throws std::invalid_argument when rows and label sets disagree.
OvrClassifier train_logreg_ovr(const Matrix& x, const std::vector<std::vector<int>>& labels, double lambda = 1.0);

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
};

/// Each row is assigned its |truth| highest-scoring labels. Macro averages over the
/// labels present in the truth or the predictions. Throws std::invalid_argument for
/// an empty test set.
F1Scores multilabel_f1(const std::vector<std::vector<int>>& predicted, const std::vector<std::vector<int>>& truth);
F1Scores multilabel_f1(const OvrClassifier& c, const Matrix& x, const std::vector<std::vector<int>>& truth);

/// Top |truth_i| labels per row.
std::vector<std::vector<int>> predict_top_k(const OvrClassifier& c, const Matrix& x,
                                            const std::vector<std::vector<int>>& truth);

/// Disjoint folds covering 0..n-1, sizes differing by at most one.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, std::size_t folds, std::uint64_t seed);

/// Seeded permutation of 0..n-1.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

/// `vertex_label label_id` lines. Throws ParseError.
std::map<std::string, std::vector<int>, NaturalLess> read_labels(std::istream& in);

struct LabelRow {
  std::string setting;  ///< "10%" ... "90%" or "10-fold"
  F1Scores f1;
};

/// Train on a `fraction` of the labeled vertices that have embeddings, test on the rest.
LabelRow label_classification(const EmbeddingModel& m, const std::map<std::string, std::vector<int>, NaturalLess>& labels,
                              double fraction, double lambda, std::uint64_t seed);
std::vector<LabelRow> label_fraction_sweep(const EmbeddingModel& m,
                                           const std::map<std::string, std::vector<int>, NaturalLess>& labels,
                                           double lambda, std::uint64_t seed);
/// Mean of per-fold scores.
LabelRow label_kfold(const EmbeddingModel& m, const std::map<std::string, std::vector<int>, NaturalLess>& labels,
                     std::size_t folds, double lambda, std::uint64_t seed);

struct LinkSplit {
  Snapshot residual;                                      ///< all vertices, held-out edges removed
  std::vector<std::pair<std::string, std::string>> positives;  ///< held-out edges
  std::vector<std::pair<std::string, std::string>> negatives;  ///< non-edges of the original graph
};

/// Holds out round(fraction * |E|) uniformly chosen edges and samples as many vertex
/// pairs that are not edges of `s`. Throws std::invalid_argument when fewer than two
/// edges would be held out or not enough non-edges exist.
LinkSplit split_edges(const Snapshot& s, double fraction, std::uint64_t seed);

/// Labeled pairs are split evenly into classifier training and test halves; the AUC
/// of the classifier on the test half is returned.
double link_prediction_auc(const EmbeddingModel& m, const LinkSplit& split, EdgeOperator op, double lambda,
                           std::uint64_t seed);

using TrainFn = std::function<EmbeddingModel(const Snapshot&)>;

double link_prediction_experiment(const Snapshot& s, const TrainFn& train, EdgeOperator op, std::uint64_t seed,
                                  double lambda = 1.0);

}  // namespace isgns
