#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "critgw/offspring.hpp"

namespace critgw {

/// Population sizes beyond this abort a trial.
inline constexpr std::uint64_t kPopulationLimit = std::uint64_t{1} << 63;

struct Trajectory {
  /// Z(0..n); entries after absorption are zero.
  std::vector<std::uint64_t> z;
  std::optional<std::size_t> absorbed_at;
  /// Set when some Z(k) reached 2^63; the trajectory is truncated there.
  bool overflow = false;
};

/// Reduced process Z(m, n): generation-m individuals with descendants alive at n.
struct ReducedCounts {
  std::vector<std::size_t> checkpoints;
  /// Z(m, n) at each checkpoint.
  std::vector<std::uint64_t> counts;
  /// Z(m, n) for every m = 0..n.
  std::vector<std::uint64_t> levels;
  /// d(n) = n - max{m < n : Z(m, n) = 1}; empty when Z(n) = 0.
  std::optional<std::size_t> mrca_distance;
};

/// Generation-by-generation forward simulation; Z(k+1) is the sum of Z(k)
/// independent offspring draws.
Trajectory simulate_trajectory(const OffspringLaw& law, std::size_t n, Rng& rng);

/// Depth-first realization of the family tree to depth n. Every node draws its
/// offspring count once; a node at depth m counts towards Z(m, n) iff its
/// subtree reaches depth n.
std::pair<Trajectory, ReducedCounts> simulate_reduced(const OffspringLaw& law, std::size_t n,
                                                      std::span<const std::size_t> checkpoints, Rng& rng);

/// d(n) from the full reduced levels Z(0..n, n).
std::optional<std::size_t> mrca_distance(std::span<const std::uint64_t> levels);

}  // namespace critgw
