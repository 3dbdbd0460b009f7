#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "isgns/errors.hpp"
#include "isgns/eval_suite.hpp"
#include "isgns/pipeline.hpp"
#include "isgns/random.hpp"
#include "isgns/synthetic.hpp"

using namespace isgns;

namespace {

double pairwise_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  std::uint64_t twice = 0;
  for (double p : pos) {
    for (double n : neg) twice += p > n ? 2 : (p == n ? 1 : 0);
  }
  return static_cast<double>(twice) / static_cast<double>(2 * pos.size() * neg.size());
}

EmbeddingModel trained(const Snapshot& s, std::uint64_t seed) {
  EmbeddingConfig cfg;
  cfg.dim = 16;
  cfg.walk.length = 40;
  cfg.walk.walks_per_vertex = 10;
  cfg.walk.seed = seed;
  cfg.train.seed = seed;
  cfg.train.epochs = 2;
  return train_full(s, cfg).checkpoint.model;
}

}  // namespace

TEST_CASE("edge operators") {
  const std::vector<double> a{2.0, 0.0}, b{0.0, 2.0};
  CHECK(edge_features(a, b, EdgeOperator::Average) == std::vector<double>{1.0, 1.0});
  CHECK(edge_features(a, b, EdgeOperator::Hadamard) == std::vector<double>{0.0, 0.0});
  CHECK(edge_features(a, b, EdgeOperator::WeightedL1) == std::vector<double>{2.0, 2.0});
  CHECK(edge_features(a, b, EdgeOperator::WeightedL2) == std::vector<double>{4.0, 4.0});
  CHECK(edge_features(a, a, EdgeOperator::WeightedL1) == std::vector<double>{0.0, 0.0});
  CHECK(edge_features(a, a, EdgeOperator::WeightedL2) == std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(edge_features(a, std::vector<double>{1.0}, EdgeOperator::Average), std::invalid_argument);

  SplitMix64 rng(1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(7), y(7);
    for (auto& v : x) v = rng.uniform() * 4.0 - 2.0;
    for (auto& v : y) v = rng.uniform() * 4.0 - 2.0;
    for (auto op : kEdgeOperators) CHECK(edge_features(x, y, op) == edge_features(y, x, op));
  }
  for (auto op : kEdgeOperators) CHECK(parse_edge_operator(to_string(op)) == op);
  CHECK_THROWS_AS(parse_edge_operator("cosine"), std::invalid_argument);
}

TEST_CASE("auc") {
  CHECK(auc(std::vector<double>{3, 4, 5}, std::vector<double>{0, 1, 2}) == 1.0);
  CHECK(auc(std::vector<double>{0, 1}, std::vector<double>{3, 4, 5}) == 0.0);
  CHECK(auc(std::vector<double>{1, 1, 1}, std::vector<double>{1, 1}) == 0.5);
  CHECK_THROWS_AS(auc(std::vector<double>{}, std::vector<double>{1}), std::invalid_argument);
  CHECK_THROWS_AS(auc(std::vector<double>{1}, std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(auc(std::vector<double>{NAN}, std::vector<double>{1}), std::invalid_argument);

  SplitMix64 rng(5);
  for (int set = 0; set < 50; ++set) {
    std::vector<double> pos(1 + rng.below(60)), neg(1 + rng.below(60));
    const auto levels = 2 + rng.below(set % 2 ? 6 : 1000);
    for (auto& v : pos) v = static_cast<double>(rng.below(levels)) + 0.5;
    for (auto& v : neg) v = static_cast<double>(rng.below(levels));
    CHECK(auc(pos, neg) == pairwise_auc(pos, neg));
  }
}

TEST_CASE("logistic objective gradient") {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x(30, 4);
    std::vector<int> y(30);
    for (auto& v : x.data) v = rng.uniform() * 2.0 - 1.0;
    for (auto& v : y) v = static_cast<int>(rng.below(2));
    LogisticModel m;
    m.weights = {rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5};
    m.bias = rng.uniform() - 0.5;
    std::vector<double> g;
    logistic_objective(m, x, y, 0.7, &g);
    REQUIRE(g.size() == 5);
    const double h = 1e-5;
    double diff2 = 0.0, norm2 = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      auto up = m, down = m;
      (i < 4 ? up.weights[i] : up.bias) += h;
      (i < 4 ? down.weights[i] : down.bias) -= h;
      const double numeric = (logistic_objective(up, x, y, 0.7) - logistic_objective(down, x, y, 0.7)) / (2 * h);
      diff2 += (numeric - g[i]) * (numeric - g[i]);
      norm2 += g[i] * g[i];
    }
    CHECK(std::sqrt(diff2 / norm2) < 1e-5);
  }
}

TEST_CASE("logistic regression") {
  Matrix x(40, 2);
  std::vector<int> y(40);
  SplitMix64 rng(8);
  for (std::size_t i = 0; i < 40; ++i) {
    y[i] = i % 2;
    x.row(i)[0] = (y[i] ? 2.0 : -2.0) + rng.uniform() - 0.5;
    x.row(i)[1] = rng.uniform() - 0.5;
  }
  auto m = train_logistic(x, y, 1.0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < 40; ++i) correct += (m.probability(x.row(i)) > 0.5) == (y[i] == 1);
  CHECK(correct == 40);

  std::vector<int> skewed(40, 0);
  for (std::size_t i = 0; i < 10; ++i) skewed[i] = 1;
  auto flat = train_logistic(x, skewed, 1e9);
  for (double w : flat.weights) CHECK(std::abs(w) < 1e-6);
  CHECK(flat.probability(x.row(0)) == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("one-vs-rest classification") {
  Matrix x(60, 3);
  std::vector<std::vector<int>> labels(60);
  SplitMix64 rng(4);
  for (std::size_t i = 0; i < 60; ++i) {
    const int c = static_cast<int>(i % 3);
    for (std::size_t d = 0; d < 3; ++d) x.row(i)[d] = (static_cast<int>(d) == c ? 3.0 : 0.0) + rng.uniform() - 0.5;
    labels[i] = {c};
  }
  auto clf = train_logreg_ovr(x, labels, 1.0);
  CHECK(clf.labels == std::vector<int>{0, 1, 2});
  auto f1 = multilabel_f1(clf, x, labels);
  CHECK(f1.micro == 1.0);
  CHECK(f1.macro == 1.0);

  std::vector<std::vector<int>> random_predictions(60);
  for (auto& p : random_predictions) p = {static_cast<int>(rng.below(3))};
  CHECK(multilabel_f1(random_predictions, labels).micro <= f1.micro);
  CHECK_THROWS_AS(train_logreg_ovr(x, std::vector<std::vector<int>>(3), 1.0), std::invalid_argument);
}

TEST_CASE("f1 on a hand-computed fixture") {
  const std::vector<std::vector<int>> truth{{0}, {1}, {0, 2}, {2}, {1, 2}};
  const std::vector<std::vector<int>> predicted{{0}, {2}, {0, 1}, {2}, {1, 0}};
  auto f = multilabel_f1(predicted, truth);
  CHECK(f.micro == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
  CHECK(f.macro == doctest::Approx((0.8 + 0.5 + 0.4) / 3.0).epsilon(1e-14));

  auto perfect = multilabel_f1(truth, truth);
  CHECK(perfect.micro == 1.0);
  CHECK(perfect.macro == 1.0);

  const std::vector<std::vector<int>> one{{0}, {0}, {0}};
  auto single = multilabel_f1(one, one);
  CHECK(single.micro == single.macro);
  CHECK_THROWS_AS(multilabel_f1(std::vector<std::vector<int>>{}, std::vector<std::vector<int>>{}),
                  std::invalid_argument);
}

TEST_CASE("folds partition the data") {
  for (std::size_t n : {10u, 37u, 100u}) {
    auto folds = kfold_indices(n, 10, 3);
    REQUIRE(folds.size() == 10);
    std::multiset<std::size_t> all;
    std::size_t lo = n, hi = 0;
    for (const auto& f : folds) {
      all.insert(f.begin(), f.end());
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
    }
    CHECK(all.size() == n);
    CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == n);
    CHECK(*all.rbegin() == n - 1);
    CHECK(hi - lo <= 1);
  }
  CHECK(shuffled_indices(50, 1) == shuffled_indices(50, 1));
  CHECK(shuffled_indices(50, 1) != shuffled_indices(50, 2));
}

TEST_CASE("label files") {
  std::istringstream in("# vertex label\n1 0\n2 1\n1 2\n10 1\n");
  auto labels = read_labels(in);
  CHECK(labels.size() == 3);
  CHECK(labels.at("1") == std::vector<int>{0, 2});
  CHECK(labels.begin()->first == "1");
  std::istringstream bad("1 x\n");
  CHECK_THROWS_AS(read_labels(bad), ParseError);
}

TEST_CASE("label classification on two blocks") {
  auto s = two_block_ring(60, 3, 20, 4, 2);
  auto m = trained(s, 1);
  std::map<std::string, std::vector<int>, NaturalLess> labels;
  for (std::size_t v = 0; v < 120; ++v) labels[std::to_string(v)] = {static_cast<int>(two_block_of(v, 60))};
  auto sweep = label_fraction_sweep(m, labels, 1.0, 3);
  REQUIRE(sweep.size() == 9);
  CHECK(sweep.front().setting == "10%");
  CHECK(sweep.back().setting == "90%");
  for (const auto& row : sweep) {
    CHECK(row.f1.micro >= 0.0);
    CHECK(row.f1.micro <= 1.0);
    CHECK(row.f1.macro >= 0.0);
    CHECK(row.f1.macro <= 1.0);
  }
  auto folds = label_kfold(m, labels, 10, 1.0, 3);
  CHECK(folds.setting == "10-fold");
  CHECK(folds.f1.micro > 0.9);
}

TEST_CASE("edge splits") {
  auto s = erdos_renyi(100, 400, 3);
  auto split = split_edges(s, 0.5, 7);
  CHECK(split.positives.size() == 200);
  CHECK(split.negatives.size() == 200);
  CHECK(split.residual.num_edges() == 200);
  CHECK(split.residual.num_vertices() == 100);
  std::set<std::pair<std::string, std::string>> negatives;
  for (const auto& [u, v] : split.negatives) {
    CHECK(u != v);
    CHECK_FALSE(s.has_edge(s.id(u), s.id(v)));
    negatives.emplace(std::min(u, v), std::max(u, v));
  }
  CHECK(negatives.size() == 200);
  for (const auto& [u, v] : split.positives) {
    CHECK(s.has_edge(s.id(u), s.id(v)));
    CHECK_FALSE(split.residual.has_edge(split.residual.id(u), split.residual.id(v)));
  }
  SnapshotBuilder one;
  one.add_edge("a", "b");
  CHECK_THROWS_AS(split_edges(one.build(), 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_edges(s, 1.0, 1), std::invalid_argument);
}

TEST_CASE("link prediction") {
  auto cliques = two_cliques(20);
  const double structured =
      link_prediction_experiment(cliques, [](const Snapshot& g) { return trained(g, 5); }, EdgeOperator::Hadamard, 9);
  CHECK(structured > 0.9);

  auto s = erdos_renyi(1000, 5000, 4);
  auto random_model = [](const Snapshot& g) {
    const std::vector<std::string> labels(g.labels().begin(), g.labels().end());
    return init_model(labels, 16, 77);
  };
  const double baseline = link_prediction_experiment(s, random_model, EdgeOperator::Hadamard, 9);
  CHECK(baseline >= 0.45);
  CHECK(baseline <= 0.55);
}
