#include "critgw/simulator.hpp"

#include <stdexcept>
#include <string>

namespace critgw {

Trajectory simulate_trajectory(const OffspringLaw& law, std::size_t n, Rng& rng) {
  Trajectory traj;
  traj.z.assign(n + 1, 0);
  traj.z[0] = 1;
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t current = traj.z[k];
    if (current == 0) {
      traj.absorbed_at = k;
      return traj;
    }
    std::uint64_t next = 0;
    for (std::uint64_t i = 0; i < current; ++i) {
      next += law.sample(rng);
      if (next >= kPopulationLimit) {
        traj.overflow = true;
        return traj;
      }
    }
    traj.z[k + 1] = next;
  }
  if (traj.z[n] == 0) traj.absorbed_at = n;
  return traj;
}

std::optional<std::size_t> mrca_distance(std::span<const std::uint64_t> levels) {
  if (levels.empty()) throw std::invalid_argument("mrca_distance: empty levels");
  const std::size_t n = levels.size() - 1;
  if (levels[n] == 0 || n == 0) return std::nullopt;
  for (std::size_t m = n; m-- > 0;) {
    if (levels[m] == 1) return n - m;
  }
  return std::nullopt;
}

std::pair<Trajectory, ReducedCounts> simulate_reduced(const OffspringLaw& law, std::size_t n,
                                                      std::span<const std::size_t> checkpoints, Rng& rng) {
  for (std::size_t m : checkpoints) {
    if (m > n) throw std::invalid_argument("simulate_reduced: checkpoint " + std::to_string(m) + " exceeds n");
  }
  struct Frame {
    std::uint64_t remaining;
    bool reaches;
  };

  Trajectory traj;
  traj.z.assign(n + 1, 0);
  ReducedCounts reduced;
  reduced.levels.assign(n + 1, 0);

  std::vector<Frame> stack;
  stack.reserve(n + 1);
  traj.z[0] = 1;
  stack.push_back({n > 0 ? law.sample(rng) : 0, n == 0});

  while (!stack.empty()) {
    Frame& top = stack.back();
    const std::size_t depth = stack.size() - 1;
    if (top.remaining > 0) {
      --top.remaining;
      const std::size_t child = depth + 1;
      if (++traj.z[child] >= kPopulationLimit) {
        traj.overflow = true;
        break;
      }
      stack.push_back({child < n ? law.sample(rng) : 0, child == n});
      continue;
    }
    const bool reaches = top.reaches;
    stack.pop_back();
    if (reaches) {
      ++reduced.levels[depth];
      if (!stack.empty()) stack.back().reaches = true;
    }
  }

  for (std::size_t k = 0; k <= n; ++k) {
    if (traj.z[k] == 0) {
      traj.absorbed_at = k;
      break;
    }
  }
  reduced.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  for (std::size_t m : checkpoints) reduced.counts.push_back(reduced.levels[m]);
  if (!traj.overflow) reduced.mrca_distance = mrca_distance(reduced.levels);
  return {std::move(traj), std::move(reduced)};
}

}  // namespace critgw
