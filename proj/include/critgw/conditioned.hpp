#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "critgw/extinction.hpp"
#include "critgw/regime.hpp"
#include "critgw/simulator.hpp"

namespace critgw {

/// Small-deviation event H = {0 < Z(n) <= floor(w / u_phi)}.
struct EventSpec {
  std::size_t n = 0;
  std::size_t phi = 0;
  double w = 1.0;

  /// Integer threshold floor(w / u_phi); throws if phi >= n or n > n_max.
  std::uint64_t threshold(const ExtinctionTable& table) const;
};

/// Monte Carlo point estimate.
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::optional<double> lambda;
  bool converged = true;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::uint64_t min_hits = 20000;
  /// Cost ceiling; reaching it before min_hits marks the result non-converged.
  std::uint64_t max_trials = std::uint64_t{1} << 42;
  /// Worker threads; affects speed only.
  unsigned threads = 1;
  /// Trials per independently seeded block.
  std::uint64_t block_size = std::uint64_t{1} << 20;
};

/// Quantities recorded for each trial in the event.
struct Observables {
  std::vector<std::size_t> population_at;  // Z(m)
  std::vector<std::size_t> reduced_at;     // Z(m, n)
};

struct HitRecord {
  std::uint64_t trial = 0;
  std::uint64_t z_n = 0;
  std::size_t mrca_distance = 0;
  std::vector<std::uint64_t> population;
  std::vector<std::uint64_t> reduced;
};

struct ConditionalSample {
  std::uint64_t trials = 0;
  std::uint64_t survivors = 0;
  /// Trials with 0 < Z(n) <= cap, in trial order.
  std::vector<HitRecord> hits;
  bool converged = true;
};

/// Exact simulation of Galton-Watson trials restricted to those with
/// 0 < Z(n) <= cap.
///
/// Trial i survives to n with probability u_n; survivors are located by
/// geometric skips inside blocks of `block_size` trials. A surviving tree is
/// generated as its reduced process (lines alive at n) with the doomed side
/// branches attached: a line alive at generation k splits into S >= 1 lines
/// that survive and D lines that die out, and doomed lines reproduce with the
/// offspring law tilted by the probability of dying out in time. The reduced
/// count is nondecreasing, so a tree is rejected as soon as it exceeds the
/// cap. Doomed branches are only expanded for accepted trials and only up to
/// the largest requested population checkpoint.
///
/// Sampling stops at the trial that brings the number of hits with
/// Z(n) <= stop_threshold to min_hits. Results depend on (seed, block_size)
/// but not on the thread count.
ConditionalSample sample_conditioned(const ExtinctionTable& table, std::size_t n, std::uint64_t cap,
                                     std::uint64_t stop_threshold, const Observables& observables,
                                     const RunConfig& config);

/// Conditional Laplace transform estimates E[exp(-lambda u_scale Z(m)) | H]
/// for each lambda, plus the event probability.
struct LstEstimate {
  std::size_t m = 0;
  std::size_t scale_index = 0;
  std::vector<McEstimate> values;
  McEstimate event_prob;
};

LstEstimate estimate_conditional_lst(const ExtinctionTable& table, const EventSpec& event, std::size_t m,
                                     std::size_t scale_index, std::span<const double> lambdas,
                                     const RunConfig& config);

/// Regime wrapper: phi, m and the rescaling index come from the regime spec.
LstEstimate estimate_regime_lst(const ExtinctionTable& table, const RegimeSpec& regime, std::size_t n, double w,
                                std::span<const double> lambdas, const RunConfig& config);

/// P(H) from a fixed number of trials.
McEstimate estimate_event_prob(const ExtinctionTable& table, const EventSpec& event, std::uint64_t trials,
                               const RunConfig& config);

/// P(H) by plain forward simulation of every trial (per-trial streams).
McEstimate estimate_event_prob_forward(const ExtinctionTable& table, const EventSpec& event, std::uint64_t trials,
                                       std::uint64_t seed);

struct ReducedEstimate {
  std::size_t m = 0;
  /// P(Z(m, n) = j | H) for j = 1..j_max.
  std::vector<McEstimate> pmf;
  /// P(Z(m, n) > j_max | H).
  McEstimate tail;
  std::vector<double> y_grid;
  /// P(d(n) <= y phi | H) for each y in y_grid.
  std::vector<McEstimate> mrca_cdf;
  McEstimate event_prob;
};

/// Conditional law of Z(n - ceil(y phi), n) and of d(n) / phi.
ReducedEstimate estimate_reduced_pmf(const ExtinctionTable& table, const EventSpec& event, double y, int j_max,
                                     std::span<const double> y_grid, const RunConfig& config);

/// Bernoulli proportion estimate with std error sqrt(p(1-p)/count).
McEstimate proportion_estimate(std::uint64_t successes, std::uint64_t count, std::uint64_t seed);

// Estimators over an existing conditional sample, so that one sample can
// serve several observables. `column` indexes Observables::population_at
// (resp. reduced_at).

/// hits with Z(n) <= threshold over trials.
McEstimate event_estimate(const ConditionalSample& sample, std::uint64_t threshold, std::uint64_t seed);

/// E[exp(-lambda scale Z(m)) | Z(n) <= threshold] for each lambda.
std::vector<McEstimate> lst_estimates(const ConditionalSample& sample, std::uint64_t threshold, std::size_t column,
                                      double scale, std::span<const double> lambdas, std::uint64_t seed);

/// P(d(n) <= y phi | Z(n) <= threshold) for each y; the lambda field holds y.
std::vector<McEstimate> mrca_estimates(const ConditionalSample& sample, std::uint64_t threshold, std::size_t phi,
                                       std::span<const double> y_grid, std::uint64_t seed);

/// Reduced pmf and MRCA CDF given Z(n) <= threshold; d(n) is compared with y phi.
ReducedEstimate reduced_estimates(const ConditionalSample& sample, std::uint64_t threshold, std::size_t column,
                                  std::size_t m, int j_max, std::size_t phi, std::span<const double> y_grid,
                                  std::uint64_t seed);

}  // namespace critgw
