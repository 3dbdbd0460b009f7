#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "isgns/errors.hpp"
#include "isgns/noise_model.hpp"
#include "isgns/synthetic.hpp"

using namespace isgns;

namespace {

Snapshot parse(const std::string& text) {
  std::istringstream in(text);
  return load_edge_list(in);
}

WalkCorpus corpus_of(const Snapshot& s, const std::vector<std::vector<std::string>>& walks) {
  WalkCorpus c(s, 2);
  for (const auto& w : walks) {
    std::vector<VertexId> ids;
    for (const auto& l : w) ids.push_back(s.id(l));
    c.add_walk(ids);
  }
  return c;
}

FrequencyTable table(const std::map<std::string, std::uint64_t>& counts) {
  FrequencyTable t;
  for (const auto& [l, n] : counts) t.add(l, n);
  return t;
}

}  // namespace

TEST_CASE("counting") {
  auto s = parse("1 2\n2 3\n");
  auto t = count_frequencies(corpus_of(s, {{"1", "2"}, {"2", "3"}}));
  CHECK(t.count("1") == 1);
  CHECK(t.count("2") == 2);
  CHECK(t.count("3") == 1);
  CHECK(t.count("4") == 0);
  CHECK(t.total() == 4);

  auto empty = count_frequencies(WalkCorpus(s, 2));
  CHECK(empty.empty());
  CHECK(empty.total() == 0);

  auto g = erdos_renyi(100, 400, 2);
  WalkConfig cfg;
  cfg.length = 80;
  cfg.walks_per_vertex = 10;
  auto c = generate_corpus(g, cfg);
  auto f = count_frequencies(c);
  std::map<std::string, std::uint64_t> oracle;
  std::uint64_t lengths = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    lengths += c.walk(i).size();
    for (auto v : c.walk(i)) ++oracle[g.label(v)];
  }
  CHECK(f.total() == lengths);
  for (const auto& [l, n] : oracle) CHECK(f.count(l) == n);
  std::uint64_t sum = 0;
  for (const auto& [l, n] : f.entries()) sum += n;
  CHECK(sum == f.total());
}

TEST_CASE("add and subtract") {
  auto s = parse("a b\n");
  auto base = table({{"a", 3}});
  CHECK(update_frequencies(base, WalkCorpus(s, 2), WalkCorpus(s, 2)) == base);

  auto added = corpus_of(s, {{"b", "b"}});
  auto vanished = corpus_of(s, {{"a", "a", "a"}});
  auto t = update_frequencies(base, added, vanished);
  CHECK(t.count("a") == 0);
  CHECK(t.count("b") == 2);
  CHECK(t.total() == 2);
  CHECK(t == table({{"b", 2}}));
  CHECK(t.size() == 2);
  t.prune();
  CHECK(t.size() == 1);

  CHECK_THROWS_AS(update_frequencies(base, WalkCorpus(s, 2), corpus_of(s, {{"a", "a", "a", "a"}})),
                  std::underflow_error);
  FrequencyTable u;
  CHECK_THROWS_AS(u.subtract("x", 1), std::underflow_error);
}

TEST_CASE("incremental counts equal a recount") {
  auto s = erdos_renyi(100, 300, 6);
  WalkConfig cfg;
  cfg.length = 30;
  cfg.walks_per_vertex = 5;
  cfg.window = 3;
  auto current = s;
  auto counts = count_frequencies(generate_corpus(s, cfg));
  for (std::uint64_t step = 0; step < 4; ++step) {
    auto diff = synthesize_churn(current, 0.04, 100 + step);
    auto next = apply_diff(current, diff);
    auto inc = generate_incremental_corpora(current, next, diff, cfg);
    counts = update_frequencies(counts, inc.added, inc.vanished);
    CHECK(counts == count_frequencies(generate_corpus(next, cfg)));
    current = next;
  }
}

TEST_CASE("frequency text round trip") {
  auto t = table({{"10", 4}, {"2", 7}, {"x", 1}});
  std::ostringstream out;
  write_frequencies(t, out);
  CHECK(out.str() == "2 7\n10 4\nx 1\n");
  std::istringstream in(out.str());
  CHECK(read_frequencies(in) == t);
  std::istringstream bad("a 1\nb -2\n");
  CHECK_THROWS_AS(read_frequencies(bad), ParseError);
}

TEST_CASE("exact distributions") {
  auto d = build_distribution(table({{"a", 16}, {"b", 1}}));
  CHECK(d.prob("a") == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  CHECK(d.prob("b") == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(d.prob("c") == 0.0);
  CHECK(d.exponent() == 0.75);

  std::map<std::string, std::uint64_t> uniform;
  for (int i = 0; i < 37; ++i) uniform[std::to_string(i)] = 5;
  auto u = build_distribution(table(uniform));
  for (double p : u.probs()) CHECK(p == doctest::Approx(1.0 / 37.0).epsilon(1e-14));

  CHECK_THROWS_AS(build_distribution(FrequencyTable{}), std::invalid_argument);
  CHECK_THROWS_AS(build_distribution(table({{"a", 1}}), 0.0), std::invalid_argument);
}

TEST_CASE("zipf normalization against a long double reference") {
  std::map<std::string, std::uint64_t> counts;
  for (int r = 1; r <= 1000; ++r) counts[std::to_string(r)] = 1000000 / r;
  auto d = build_distribution(table(counts));
  long double z = 0.0L;
  for (const auto& [l, n] : counts) z += std::pow(static_cast<long double>(n), 0.75L);
  double sum = 0.0;
  for (const auto& [l, n] : counts) {
    const auto ref = static_cast<double>(std::pow(static_cast<long double>(n), 0.75L) / z);
    CHECK(std::abs(d.prob(l) - ref) < 1e-12);
    sum += d.prob(l);
  }
  CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("sampling") {
  SUBCASE("single vertex") {
    auto d = build_distribution(table({{"only", 3}}));
    SplitMix64 rng(1);
    for (auto i : sample_negative(d, rng, 1000)) CHECK(i == 0);
    CHECK_THROWS_AS(sample_negative(d, rng, 0), std::invalid_argument);
  }
  SUBCASE("binomial interval") {
    auto d = build_distribution(table({{"a", 16}, {"b", 1}}));
    SplitMix64 rng(2024);
    std::size_t hits = 0;
    const std::size_t n = 1000000;
    for (auto i : sample_negative(d, rng, n)) hits += d.label(i) == "a";
    const double f = static_cast<double>(hits) / n;
    CHECK(f >= 0.886);
    CHECK(f <= 0.892);
  }
  SUBCASE("chi-square goodness of fit and total variation") {
    std::map<std::string, std::uint64_t> counts;
    SplitMix64 gen(77);
    for (int i = 0; i < 100; ++i) counts[std::to_string(i)] = 1 + gen.below(500);
    auto d = build_distribution(table(counts));
    SplitMix64 rng(3);
    const std::size_t n = 1000000;
    std::vector<double> observed(d.size(), 0.0);
    for (auto i : sample_negative(d, rng, n)) observed[i] += 1.0;
    double chi2 = 0.0;
    double tv = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double expected = d.prob(i) * n;
      chi2 += (observed[i] - expected) * (observed[i] - expected) / expected;
      tv += std::abs(observed[i] / n - d.prob(i));
    }
    boost::math::chi_squared dist(static_cast<double>(d.size() - 1));
    const double p_value = boost::math::cdf(boost::math::complement(dist, chi2));
    CHECK(p_value > 0.001);
    CHECK(tv / 2.0 < 0.01);
  }
  SUBCASE("zero counts are never drawn") {
    auto t = table({{"a", 5}, {"b", 0}, {"c", 2}, {"d", 0}});
    auto d = build_distribution(t);
    CHECK(d.prob("b") == 0.0);
    CHECK(d.prob("d") == 0.0);
    SplitMix64 rng(9);
    for (auto i : sample_negative(d, rng, 200000)) {
      CHECK(d.label(i) != "b");
      CHECK(d.label(i) != "d");
    }
  }
}

TEST_CASE("alias sampler") {
  const std::vector<double> w{0.0, 3.0, 0.0, 1.0};
  AliasSampler a(w);
  SplitMix64 rng(4);
  std::vector<double> hist(4, 0.0);
  for (int i = 0; i < 400000; ++i) hist[a(rng)] += 1.0;
  CHECK(hist[0] == 0.0);
  CHECK(hist[2] == 0.0);
  CHECK(hist[1] / 400000.0 == doctest::Approx(0.75).epsilon(0.01));
}
