#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "critgw/rng.hpp"

namespace critgw {

/// Walker/Vose alias table over {0, ..., size-1}.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(const std::vector<double>& weights);

  std::size_t sample(Rng& rng) const;
  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

/// Offspring counts of a node whose line is conditioned to reach the horizon:
/// `survivors` children carry the line on, `doomed` children die out before it.
struct SurvivorSplit {
  std::uint64_t survivors = 0;
  std::uint64_t doomed = 0;
};

/// Per-generation constants for sample_split; depend only on child_survival.
struct SplitParams {
  double child_survival = 1.0;
  /// P(survivors >= 2).
  double multi = 0.0;
  /// P(survivors >= 2) + P(survivors = 1, doomed = 0).
  double multi_or_clean = 1.0;
};

class OffspringLaw;

/// Sums of offspring counts of lines that die out, for a fixed child death
/// probability q; law of one count p_k q^k / f(q).
class DoomedSampler {
 public:
  DoomedSampler(const OffspringLaw& law, double child_death);

  /// Total offspring of `count` independent doomed lines.
  std::uint64_t sample_sum(std::uint64_t count, Rng& rng) const;

 private:
  std::uint64_t sample_positive(Rng& rng) const;

  const OffspringLaw* law_;
  double q_;
  double zero_ = 1.0;
  /// Probability that a positive count exceeds the table cutoff.
  double beyond_ = 0.0;
  AliasTable positive_;
};

/// A critical offspring distribution.
///
/// Three families are supported:
///   stable(alpha, c)  pgf f(s) = s + c (1-s)^{1+alpha}, alpha in (0,1], c in (0, 1/(1+alpha)]
///   geometric         p_k = 2^{-(k+1)}, pgf 1/(2-s), variance 2
///   unit              p_1 = 1
///
/// Objects are immutable and cheap to copy; the sampling tables are shared.
class OffspringLaw {
 public:
  enum class Kind { stable, geometric, unit };

  static constexpr std::size_t kDefaultCutoff = 4096;

  static OffspringLaw stable(double alpha, double c, std::size_t table_cutoff = kDefaultCutoff);
  /// Stable family with the default constant c = 1/(1+alpha).
  static OffspringLaw stable(double alpha);
  static OffspringLaw geometric();
  static OffspringLaw unit();

  /// Parses `stable(alpha=<f>, c=<f>)`, `stable(alpha=<f>)`, `geometric` or `unit`.
  static OffspringLaw parse(std::string_view text);
  /// Canonical spec string; parse(to_string()) reproduces the law.
  std::string to_string() const;

  Kind kind() const { return kind_; }
  /// Tail index: alpha for the stable family, 1 for the finite-variance laws.
  double alpha() const { return alpha_; }
  /// Constant value of the slowly varying factor L; sigma^2/2 for geometric.
  double slowly_varying_constant() const;
  std::size_t table_cutoff() const { return cutoff_; }

  double pmf(std::uint64_t k) const;
  /// P(xi > k).
  double tail(std::uint64_t k) const;
  double pgf(double s) const;
  /// One step of the survival recursion in u = 1 - s space: returns 1 - f(1 - u).
  long double survival_step(long double u) const;

  std::uint64_t sample(Rng& rng) const;

  /// Offspring of a node whose line survives `h` more generations, given that
  /// each child independently survives its remaining h-1 generations with
  /// probability `child_survival`. Returns survivors >= 1.
  SurvivorSplit sample_split(double child_survival, Rng& rng) const;
  SplitParams split_params(double child_survival) const;
  SurvivorSplit sample_split(const SplitParams& params, Rng& rng) const;
  /// Reference implementation of sample_split by plain rejection. Exact but
  /// slow when child_survival is small; used to cross-check the fast path.
  SurvivorSplit sample_split_rejection(double child_survival, Rng& rng) const;

  /// Offspring count of a node whose descendants all die out, given that each
  /// child dies out within its remaining horizon with probability `child_death`.
  /// Law: p_k child_death^k / f(child_death).
  std::uint64_t sample_doomed(double child_death, Rng& rng) const;

 private:
  friend class DoomedSampler;
  struct StableTables;

  OffspringLaw(Kind kind, double alpha, double c, std::size_t cutoff);

  std::uint64_t sample_stable_at_least_two(Rng& rng) const;
  std::uint64_t sample_tilted_sibuya(double child_survival, Rng& rng) const;
  std::uint64_t stable_tail_walk(Rng& rng) const;

  Kind kind_;
  double alpha_;
  double c_;
  std::size_t cutoff_;
  std::shared_ptr<const StableTables> tables_;
};

/// Negative binomial number of failures with real shape `shape` >= 0 and
/// per-trial failure probability `fail_prob` in [0, 1).
std::uint64_t sample_negative_binomial(double shape, double fail_prob, Rng& rng);

}  // namespace critgw
