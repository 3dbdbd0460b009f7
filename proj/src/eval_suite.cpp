#include "isgns/eval_suite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "isgns/errors.hpp"
#include "isgns/random.hpp"

namespace isgns {

std::string_view to_string(EdgeOperator op) noexcept {
  switch (op) {
    case EdgeOperator::Average: return "average";
    case EdgeOperator::Hadamard: return "hadamard";
    case EdgeOperator::WeightedL1: return "weighted-l1";
    case EdgeOperator::WeightedL2: return "weighted-l2";
  }
  return "?";
}

EdgeOperator parse_edge_operator(std::string_view name) {
  for (auto op : kEdgeOperators) {
    if (to_string(op) == name) return op;
  }
  throw std::invalid_argument("unknown edge operator '" + std::string(name) + "'");
}

std::vector<double> edge_features(std::span<const double> a, std::span<const double> b, EdgeOperator op) {
  if (a.size() != b.size()) throw std::invalid_argument("edge feature vectors differ in dimension");
  std::vector<double> out(a.size());
  for (std::size_t d = 0; d < a.size(); ++d) {
    switch (op) {
      case EdgeOperator::Average: out[d] = (a[d] + b[d]) / 2.0; break;
      case EdgeOperator::Hadamard: out[d] = a[d] * b[d]; break;
      case EdgeOperator::WeightedL1: out[d] = std::abs(a[d] - b[d]); break;
      case EdgeOperator::WeightedL2: out[d] = (a[d] - b[d]) * (a[d] - b[d]); break;
    }
  }
  return out;
}

double auc(std::span<const double> pos_scores, std::span<const double> neg_scores) {
  if (pos_scores.empty() || neg_scores.empty()) throw std::invalid_argument("AUC needs positive and negative scores");
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  items.reserve(pos_scores.size() + neg_scores.size());
  for (double s : pos_scores) items.push_back({s, true});
  for (double s : neg_scores) items.push_back({s, false});
  if (std::any_of(items.begin(), items.end(), [](const Item& i) { return std::isnan(i.score); })) {
    throw std::invalid_argument("AUC scores must not be NaN");
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.score < b.score; });

  // Twice the rank sum of the positives, with tied blocks sharing their mid-rank.
  unsigned __int128 doubled = 0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0;
    while (j < items.size() && items[j].score == items[i].score) pos += items[j++].positive;
    doubled += static_cast<unsigned __int128>(pos) * (i + 1 + j);  // 2 * (i+1 + j) / 2
    i = j;
  }
  const unsigned __int128 p = pos_scores.size(), n = neg_scores.size();
  const unsigned __int128 twice_u = doubled - p * (p + 1);
  return static_cast<double>(twice_u) / static_cast<double>(2 * p * n);
}

// ---------------------------------------------------------------------------
// Logistic regression

namespace {

double softplus(double z) noexcept { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) noexcept { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

}  // namespace

double LogisticModel::decision(std::span<const double> x) const noexcept {
  double z = bias;
  for (std::size_t d = 0; d < x.size() && d < weights.size(); ++d) z += weights[d] * x[d];
  return z;
}

double LogisticModel::probability(std::span<const double> x) const noexcept { return sigmoid(decision(x)); }

double logistic_objective(const LogisticModel& m, const Matrix& x, std::span<const int> y, double lambda,
                          std::vector<double>* gradient) {
  double j = 0.0;
  for (double w : m.weights) j += 0.5 * lambda * w * w;
  if (gradient) {
    gradient->assign(x.cols + 1, 0.0);
    for (std::size_t d = 0; d < x.cols; ++d) (*gradient)[d] = lambda * m.weights[d];
  }
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto row = x.row(i);
    const double z = m.decision(row);
    j += softplus(z) - y[i] * z;
    if (gradient) {
      const double r = sigmoid(z) - y[i];
      for (std::size_t d = 0; d < x.cols; ++d) (*gradient)[d] += r * row[d];
      (*gradient)[x.cols] += r;
    }
  }
  return j;
}

LogisticModel train_logistic(const Matrix& x, std::span<const int> y, double lambda, double tolerance,
                             std::uint32_t max_iterations) {
  if (y.size() != x.rows) throw std::invalid_argument("label count differs from row count");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  // Diagonal bound on the Hessian; dividing the gradient by it keeps a strongly
  // regularized weight vector and the free bias on the same step scale.
  std::vector<double> scale(x.cols + 1, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto row = x.row(i);
    for (std::size_t d = 0; d < x.cols; ++d) scale[d] += 0.25 * row[d] * row[d];
  }
  for (std::size_t d = 0; d < x.cols; ++d) scale[d] = std::max(scale[d] + lambda, 1e-12);
  scale[x.cols] = std::max(0.25 * static_cast<double>(x.rows), 1e-12);

  LogisticModel m;
  m.weights.assign(x.cols, 0.0);
  std::vector<double> g;
  double j = logistic_objective(m, x, y, lambda, &g);
  double step = 1.0;
  LogisticModel trial;
  for (; m.iterations < max_iterations; ++m.iterations) {
    double gg = 0.0, gp = 0.0;
    for (std::size_t d = 0; d < g.size(); ++d) {
      gg += g[d] * g[d];
      gp += g[d] * g[d] / scale[d];
    }
    if (std::sqrt(gg) < tolerance) break;
    // Armijo backtracking, starting from twice the last accepted step.
    step = std::min(step * 2.0, 1e6);
    double jt = 0.0;
    for (;;) {
      trial.weights.resize(x.cols);
      for (std::size_t d = 0; d < x.cols; ++d) trial.weights[d] = m.weights[d] - step * g[d] / scale[d];
      trial.bias = m.bias - step * g[x.cols] / scale[x.cols];
      jt = logistic_objective(trial, x, y, lambda);
      if (jt <= j - 0.5 * step * gp || step < 1e-20) break;
      step *= 0.5;
    }
    if (step < 1e-20) break;
    m.weights.swap(trial.weights);
    m.bias = trial.bias;
    j = logistic_objective(m, x, y, lambda, &g);
  }
  return m;
}

std::vector<double> OvrClassifier::scores(std::span<const double> x) const {
  std::vector<double> out(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) out[i] = models[i].decision(x);
  return out;
}

OvrClassifier train_logreg_ovr(const Matrix& x, const std::vector<std::vector<int>>& labels, double lambda) {
  if (labels.size() != x.rows) throw std::invalid_argument("label sets differ from row count");
  std::vector<int> all;
  for (const auto& ls : labels) all.insert(all.end(), ls.begin(), ls.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  OvrClassifier c;
  std::vector<int> y(x.rows);
  for (int label : all) {
    for (std::size_t i = 0; i < x.rows; ++i) {
      y[i] = std::find(labels[i].begin(), labels[i].end(), label) != labels[i].end();
    }
    c.labels.push_back(label);
    c.models.push_back(train_logistic(x, y, lambda));
  }
  return c;
}

std::vector<std::vector<int>> predict_top_k(const OvrClassifier& c, const Matrix& x,
                                            const std::vector<std::vector<int>>& truth) {
  std::vector<std::vector<int>> out(x.rows);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto s = c.scores(x.row(i));
    order.resize(s.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    const std::size_t k = std::min(truth[i].size(), order.size());
    for (std::size_t r = 0; r < k; ++r) out[i].push_back(c.labels[order[r]]);
  }
  return out;
}

F1Scores multilabel_f1(const std::vector<std::vector<int>>& predicted, const std::vector<std::vector<int>>& truth) {
  if (truth.empty()) throw std::invalid_argument("F1 needs a non-empty test set");
  if (predicted.size() != truth.size()) throw std::invalid_argument("prediction and truth sizes differ");
  struct Counts {
    std::uint64_t tp = 0, fp = 0, fn = 0;
  };
  std::map<int, Counts> per_label;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (int l : predicted[i]) {
      const bool hit = std::find(truth[i].begin(), truth[i].end(), l) != truth[i].end();
      (hit ? per_label[l].tp : per_label[l].fp)++;
    }
    for (int l : truth[i]) {
      if (std::find(predicted[i].begin(), predicted[i].end(), l) == predicted[i].end()) per_label[l].fn++;
    }
  }
  Counts all;
  double macro = 0.0;
  for (const auto& [label, c] : per_label) {
    all.tp += c.tp;
    all.fp += c.fp;
    all.fn += c.fn;
    const auto den = 2 * c.tp + c.fp + c.fn;
    macro += den ? 2.0 * static_cast<double>(c.tp) / static_cast<double>(den) : 0.0;
  }
  F1Scores f;
  const auto den = 2 * all.tp + all.fp + all.fn;
  f.micro = den ? 2.0 * static_cast<double>(all.tp) / static_cast<double>(den) : 0.0;
  f.macro = per_label.empty() ? 0.0 : macro / static_cast<double>(per_label.size());
  return f;
}

F1Scores multilabel_f1(const OvrClassifier& c, const Matrix& x, const std::vector<std::vector<int>>& truth) {
  return multilabel_f1(predict_top_k(c, x, truth), truth);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2 || folds > n) throw std::invalid_argument("need 2 <= folds <= items");
  const auto order = shuffled_indices(n, seed);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t i = 0; i < n; ++i) out[i % folds].push_back(order[i]);
  return out;
}

std::map<std::string, std::vector<int>, NaturalLess> read_labels(std::istream& in) {
  std::map<std::string, std::vector<int>, NaturalLess> out;
  std::string line, vertex, label, extra;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    if (!(ls >> vertex) || vertex[0] == '#') continue;
    if (!(ls >> label) || (ls >> extra)) throw ParseError(lineno, "expected 'vertex label'");
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(label, &used);
      if (used != label.size()) throw std::invalid_argument(label);
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad label id '" + label + "'");
    }
    auto& ids = out[vertex];
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Label classification

namespace {

struct LabeledData {
  Matrix x;
  std::vector<std::vector<int>> y;
};

LabeledData gather(const EmbeddingModel& m, const std::map<std::string, std::vector<int>, NaturalLess>& labels,
                   std::span<const std::string> vertices) {
  LabeledData d{Matrix(vertices.size(), m.dim()), {}};
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto t = m.target(m.row(vertices[i]));
    std::copy(t.begin(), t.end(), d.x.row(i).begin());
    d.y.push_back(labels.at(vertices[i]));
  }
  return d;
}

std::vector<std::string> usable(const EmbeddingModel& m, const std::map<std::string, std::vector<int>, NaturalLess>& labels) {
  std::vector<std::string> out;
  for (const auto& [v, ls] : labels) {
    if (!ls.empty() && m.contains(v)) out.push_back(v);
  }
  if (out.size() < 2) throw std::invalid_argument("need at least two labeled vertices with embeddings");
  return out;
}

F1Scores evaluate(const EmbeddingModel& m, const std::map<std::string, std::vector<int>, NaturalLess>& labels,
                  std::span<const std::string> train, std::span<const std::string> test, double lambda) {
  const auto tr = gather(m, labels, train);
  const auto te = gather(m, labels, test);
  return multilabel_f1(train_logreg_ovr(tr.x, tr.y, lambda), te.x, te.y);
}

}  // namespace

LabelRow label_classification(const EmbeddingModel& m, const std::map<std::string, std::vector<int>, NaturalLess>& labels,
                              double fraction, double lambda, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("training fraction must lie in (0, 1)");
  const auto vertices = usable(m, labels);
  const auto order = shuffled_indices(vertices.size(), seed);
  auto cut = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(vertices.size())));
  cut = std::clamp<std::size_t>(cut, 1, vertices.size() - 1);
  std::vector<std::string> train, test;
  for (std::size_t i = 0; i < order.size(); ++i) (i < cut ? train : test).push_back(vertices[order[i]]);
  std::ostringstream name;
  name << std::llround(fraction * 100) << '%';
  return {name.str(), evaluate(m, labels, train, test, lambda)};
}

std::vector<LabelRow> label_fraction_sweep(const EmbeddingModel& m,
                                           const std::map<std::string, std::vector<int>, NaturalLess>& labels,
                                           double lambda, std::uint64_t seed) {
  std::vector<LabelRow> rows;
  for (int pct = 10; pct <= 90; pct += 10) rows.push_back(label_classification(m, labels, pct / 100.0, lambda, seed));
  return rows;
}

LabelRow label_kfold(const EmbeddingModel& m, const std::map<std::string, std::vector<int>, NaturalLess>& labels,
                     std::size_t folds, double lambda, std::uint64_t seed) {
  const auto vertices = usable(m, labels);
  const auto parts = kfold_indices(vertices.size(), folds, seed);
  F1Scores sum;
  for (std::size_t f = 0; f < parts.size(); ++f) {
    std::vector<std::string> train, test;
    for (std::size_t g = 0; g < parts.size(); ++g) {
      for (auto i : parts[g]) (g == f ? test : train).push_back(vertices[i]);
    }
    const auto s = evaluate(m, labels, train, test, lambda);
    sum.micro += s.micro;
    sum.macro += s.macro;
  }
  sum.micro /= static_cast<double>(folds);
  sum.macro /= static_cast<double>(folds);
  return {std::to_string(folds) + "-fold", sum};
}

// ---------------------------------------------------------------------------
// Link prediction

LinkSplit split_edges(const Snapshot& s, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("held-out fraction must lie in (0, 1)");
  const auto edges = s.edges();
  const auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(edges.size())));
  if (held < 2) throw std::invalid_argument("graph too small to hold out edges");
  const std::size_t n = s.num_vertices();
  if (n * (n - 1) / 2 < edges.size() + held) throw std::invalid_argument("not enough non-edges to sample");

  LinkSplit split;
  SnapshotBuilder b(s);
  const auto order = shuffled_indices(edges.size(), hash_combine(seed, 1));
  for (std::size_t i = 0; i < held; ++i) {
    const auto& e = edges[order[i]];
    split.positives.emplace_back(s.label(e.u), s.label(e.v));
    b.remove_edge(s.label(e.u), s.label(e.v));
  }
  split.residual = b.build();

  SplitMix64 rng(hash_combine(seed, 2));
  std::unordered_set<std::uint64_t> seen;
  while (split.negatives.size() < held) {
    auto a = static_cast<VertexId>(rng.below(n));
    auto c = static_cast<VertexId>(rng.below(n));
    if (a == c || s.has_edge(a, c)) continue;
    if (a > c) std::swap(a, c);
    if (!seen.insert((static_cast<std::uint64_t>(a) << 32) | c).second) continue;
    split.negatives.emplace_back(s.label(a), s.label(c));
  }
  return split;
}

double link_prediction_auc(const EmbeddingModel& m, const LinkSplit& split, EdgeOperator op, double lambda,
                           std::uint64_t seed) {
  struct Sample {
    const std::pair<std::string, std::string>* pair;
    int label;
  };
  std::vector<Sample> samples;
  for (const auto& p : split.positives) samples.push_back({&p, 1});
  for (const auto& p : split.negatives) samples.push_back({&p, 0});
  const auto order = shuffled_indices(samples.size(), seed);
  const std::size_t train_n = samples.size() / 2;

  auto features = [&](std::size_t begin, std::size_t end, Matrix& x, std::vector<int>& y) {
    x = Matrix(end - begin, m.dim());
    y.clear();
    for (std::size_t i = begin; i < end; ++i) {
      const auto& s = samples[order[i]];
      const auto f = edge_features(m.target(m.row(s.pair->first)), m.target(m.row(s.pair->second)), op);
      std::copy(f.begin(), f.end(), x.row(i - begin).begin());
      y.push_back(s.label);
    }
  };
  Matrix x_train, x_test;
  std::vector<int> y_train, y_test;
  features(0, train_n, x_train, y_train);
  features(train_n, samples.size(), x_test, y_test);
  const auto clf = train_logistic(x_train, y_train, lambda);
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < x_test.rows; ++i) (y_test[i] ? pos : neg).push_back(clf.decision(x_test.row(i)));
  return auc(pos, neg);
}

double link_prediction_experiment(const Snapshot& s, const TrainFn& train, EdgeOperator op, std::uint64_t seed,
                                  double lambda) {
  const auto split = split_edges(s, 0.5, seed);
  const auto model = train(split.residual);
  return link_prediction_auc(model, split, op, lambda, hash_combine(seed, 3));
}

}  // namespace isgns
