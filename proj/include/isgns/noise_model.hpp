#pragma once

// Vertex frequencies over walk corpora and the power-law noise distribution that
// negative samples are drawn from.

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "isgns/alias_sampler.hpp"
#include "isgns/random.hpp"
#include "isgns/walk_engine.hpp"

namespace isgns {

/// Occurrence counts keyed by vertex label, so tables from different snapshots can
/// be combined. Entries may be zero; a missing entry and a zero entry are equal.
class FrequencyTable {
 public:
  using Map = std::map<std::string, std::uint64_t, NaturalLess>;

  std::uint64_t count(std::string_view label) const;
  std::uint64_t total() const noexcept { return total_; }
  std::size_t size() const noexcept { return counts_.size(); }
  bool empty() const noexcept { return total_ == 0; }
  const Map& entries() const noexcept { return counts_; }

  void add(std::string_view label, std::uint64_t n);
  /// Throws std::underflow_error when the count would go negative.
  void subtract(std::string_view label, std::uint64_t n);
  /// Drops zero entries.
  void prune();

  bool operator==(const FrequencyTable& other) const;

 private:
  Map counts_;
  std::uint64_t total_ = 0;
};

FrequencyTable count_frequencies(const WalkCorpus& corpus);

/// base + count(added) - count(vanished). Throws std::underflow_error when the
/// vanished corpus holds more occurrences of a vertex than base and added together.
FrequencyTable update_frequencies(const FrequencyTable& base, const WalkCorpus& added,
                                  const WalkCorpus& vanished);

/// `label count` lines in label order.
void write_frequencies(const FrequencyTable& t, std::ostream& out);
/// Throws ParseError.
FrequencyTable read_frequencies(std::istream& in);

/// q(v) = f(v)^e / sum f^e over the labels of a frequency table.
class NoiseDistribution {
 public:
  NoiseDistribution() = default;

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  double prob(std::size_t i) const { return probs_.at(i); }
  /// 0 for labels outside the table.
  double prob(std::string_view label) const;
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  double exponent() const noexcept { return exponent_; }

  /// Index into labels().
  std::uint32_t sample(SplitMix64& rng) const noexcept { return sampler_(rng); }

 private:
  friend NoiseDistribution build_distribution(const FrequencyTable&, double);

  std::vector<std::string> labels_;
  std::vector<double> probs_;
  AliasSampler sampler_;
  double exponent_ = 0.75;
};

/// Throws std::invalid_argument for an empty table or a non-positive exponent.
NoiseDistribution build_distribution(const FrequencyTable& t, double exponent = 0.75);

/// k i.i.d. draws, as indices into d.labels(). Throws std::invalid_argument for k < 1.
std::vector<std::uint32_t> sample_negative(const NoiseDistribution& d, SplitMix64& rng, std::size_t k);

/// `label prob` lines.
void write_distribution(const NoiseDistribution& d, std::ostream& out);

}  // namespace isgns
