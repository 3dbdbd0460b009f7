#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "isgns/random.hpp"

namespace isgns {

/// Walker/Vose alias table over indices 0..n-1. Construction O(n), draws O(1).
class AliasSampler {
 public:
  AliasSampler() = default;
  /// Weights need not be normalized. Zero weights are never drawn. Throws
  /// std::invalid_argument when no weight is positive or any is negative or non-finite.
  explicit AliasSampler(std::span<const double> weights);

  std::size_t size() const noexcept { return index_.size(); }

  std::uint32_t operator()(SplitMix64& rng) const noexcept {
    const auto column = rng.below(prob_.size());
    const std::uint32_t pick = rng.uniform() < prob_[column] ? column : alias_[column];
    return index_[pick];
  }

 private:
  std::vector<double> prob_;          // acceptance threshold per column
  std::vector<std::uint32_t> alias_;  // fallback column
  std::vector<std::uint32_t> index_;  // column -> original index (positive weights only)
};

}  // namespace isgns
