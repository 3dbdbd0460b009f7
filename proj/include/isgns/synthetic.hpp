#pragma once

// Seeded synthetic graphs and edge churn for experiments and tests.

#include <cstdint>
#include <vector>

#include "isgns/graph_store.hpp"

namespace isgns {

/// G(n, m): m distinct uniform edges over vertices "0".."n-1".
Snapshot erdos_renyi(std::size_t n, std::size_t m, std::uint64_t seed);

/// Preferential attachment: each new vertex links to `attach` distinct earlier ones.
Snapshot barabasi_albert(std::size_t n, std::size_t attach, std::uint64_t seed);

/// Two cliques of `size` vertices joined by a single edge.
Snapshot two_cliques(std::size_t size);

/// Two blocks of `block` vertices. Inside a block vertices sit on a ring and link to
/// every vertex within ring distance `reach`, plus `chords` random edges per block;
/// `bridges` random edges join the blocks.
Snapshot two_block_ring(std::size_t block, std::size_t reach, std::size_t chords, std::size_t bridges,
                        std::uint64_t seed);

/// Block index (0 or 1) of a vertex of two_block_ring.
std::size_t two_block_of(std::size_t vertex, std::size_t block) noexcept;

/// Balanced edge churn: round(rate * |E|) changes, half removals of existing edges
/// and half insertions of absent ones, drawn uniformly. For a fixed seed the diffs of
/// increasing rates are nested. Throws std::invalid_argument for rate outside [0, 1).
GraphDiff synthesize_churn(const Snapshot& s, double rate, std::uint64_t seed);

}  // namespace isgns
