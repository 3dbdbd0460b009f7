#include "isgns/noise_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "isgns/errors.hpp"

namespace isgns {

AliasSampler::AliasSampler(std::span<const double> weights) {
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("alias weights must be finite and non-negative");
    if (w > 0.0) {
      index_.push_back(static_cast<std::uint32_t>(i));
      sum += w;
    }
  }
  if (index_.empty()) throw std::invalid_argument("alias table needs a positive weight");

  const std::size_t n = index_.size();
  prob_.resize(n);
  alias_.resize(n);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[index_[i]] * static_cast<double>(n) / sum;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are within rounding of 1.
  for (auto i : large) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
  for (auto i : small) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
}

// ---------------------------------------------------------------------------
// FrequencyTable

std::uint64_t FrequencyTable::count(std::string_view label) const {
  auto it = counts_.find(label);
  return it == counts_.end() ? 0 : it->second;
}

void FrequencyTable::add(std::string_view label, std::uint64_t n) {
  auto it = counts_.find(label);
  if (it == counts_.end()) it = counts_.emplace(std::string(label), 0).first;
  it->second += n;
  total_ += n;
}

void FrequencyTable::subtract(std::string_view label, std::uint64_t n) {
  if (n == 0) return;
  auto it = counts_.find(label);
  if (it == counts_.end() || it->second < n) {
    throw std::underflow_error("frequency of '" + std::string(label) + "' would become negative");
  }
  it->second -= n;
  total_ -= n;
}

void FrequencyTable::prune() {
  std::erase_if(counts_, [](const auto& kv) { return kv.second == 0; });
}

bool FrequencyTable::operator==(const FrequencyTable& other) const {
  if (total_ != other.total_) return false;
  for (const auto& [label, n] : counts_) {
    if (n != other.count(label)) return false;
  }
  for (const auto& [label, n] : other.counts_) {
    if (n != count(label)) return false;
  }
  return true;
}

namespace {

std::vector<std::uint64_t> count_ids(const WalkCorpus& corpus) {
  std::vector<std::uint64_t> counts(corpus.source().num_vertices(), 0);
  for (auto v : corpus.tokens()) ++counts[v];
  return counts;
}

}  // namespace

FrequencyTable count_frequencies(const WalkCorpus& corpus) {
  FrequencyTable t;
  const auto counts = count_ids(corpus);
  for (VertexId v = 0; v < counts.size(); ++v) {
    if (counts[v]) t.add(corpus.source().label(v), counts[v]);
  }
  return t;
}

FrequencyTable update_frequencies(const FrequencyTable& base, const WalkCorpus& added,
                                  const WalkCorpus& vanished) {
  FrequencyTable t = base;
  const auto plus = count_ids(added);
  for (VertexId v = 0; v < plus.size(); ++v) {
    if (plus[v]) t.add(added.source().label(v), plus[v]);
  }
  const auto minus = count_ids(vanished);
  for (VertexId v = 0; v < minus.size(); ++v) {
    t.subtract(vanished.source().label(v), minus[v]);
  }
  return t;
}

void write_frequencies(const FrequencyTable& t, std::ostream& out) {
  for (const auto& [label, n] : t.entries()) out << label << ' ' << n << '\n';
}

FrequencyTable read_frequencies(std::istream& in) {
  FrequencyTable t;
  std::string line, label, count, extra;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    if (!(ls >> label)) continue;
    if (!(ls >> count) || (ls >> extra)) throw ParseError(lineno, "expected 'label count'");
    std::uint64_t n = 0;
    auto [p, ec] = std::from_chars(count.data(), count.data() + count.size(), n);
    if (ec != std::errc() || p != count.data() + count.size()) {
      throw ParseError(lineno, "bad count '" + count + "'");
    }
    if (t.count(label) != 0) throw ParseError(lineno, "duplicate vertex '" + label + "'");
    t.add(label, n);
  }
  return t;
}

// ---------------------------------------------------------------------------
// NoiseDistribution

double NoiseDistribution::prob(std::string_view label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label, NaturalLess{});
  if (it == labels_.end() || *it != label) return 0.0;
  return probs_[static_cast<std::size_t>(it - labels_.begin())];
}

NoiseDistribution build_distribution(const FrequencyTable& t, double exponent) {
  if (t.total() == 0) throw std::invalid_argument("noise distribution needs a non-empty frequency table");
  if (!(exponent > 0.0) || !std::isfinite(exponent)) throw std::invalid_argument("noise exponent must be positive");
  NoiseDistribution d;
  d.exponent_ = exponent;
  d.labels_.reserve(t.size());
  d.probs_.reserve(t.size());
  for (const auto& [label, n] : t.entries()) {
    d.labels_.push_back(label);
    d.probs_.push_back(n ? std::pow(static_cast<double>(n), exponent) : 0.0);
  }
  // Compensated sum keeps the normalization well inside 1e-12 for large supports.
  double sum = 0.0, carry = 0.0;
  for (double w : d.probs_) {
    const double y = w - carry;
    const double s = sum + y;
    carry = (s - sum) - y;
    sum = s;
  }
  d.sampler_ = AliasSampler(d.probs_);
  for (double& p : d.probs_) p /= sum;
  return d;
}

std::vector<std::uint32_t> sample_negative(const NoiseDistribution& d, SplitMix64& rng, std::size_t k) {
  if (k < 1) throw std::invalid_argument("need at least one negative sample");
  std::vector<std::uint32_t> out(k);
  for (auto& x : out) x = d.sample(rng);
  return out;
}

void write_distribution(const NoiseDistribution& d, std::ostream& out) {
  for (std::size_t i = 0; i < d.size(); ++i) out << d.label(i) << ' ' << format_double(d.prob(i)) << '\n';
}

}  // namespace isgns
