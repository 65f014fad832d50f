#include "critgw/conditioned.hpp"

#include <algorithm>
#include <limits>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace critgw {

namespace {

constexpr std::uint64_t kLaneSurvival = 0;
constexpr std::uint64_t kLaneSkeleton = 1;
constexpr std::uint64_t kLaneDoomed = 2;
constexpr std::uint64_t kLaneForward = 3;

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > kPopulationLimit - std::min(b, kPopulationLimit) ? kPopulationLimit : a + b;
}

// Reduced counts Z(k, n) and doomed births per generation for one surviving
// trial; returns false once the reduced count exceeds the cap.
// splits[k] holds the split constants for a line at generation k.
bool sample_skeleton(const OffspringLaw& law, std::span<const SplitParams> splits, std::uint64_t cap, Rng& rng,
                     std::vector<std::uint64_t>& reduced, std::vector<std::uint64_t>& doomed_births) {
  const std::size_t n = splits.size();
  reduced.assign(n + 1, 0);
  doomed_births.assign(n + 1, 0);
  reduced[0] = 1;
  if (reduced[0] > cap) return false;
  for (std::size_t k = 0; k < n; ++k) {
    std::uint64_t lines = 0;
    std::uint64_t doomed = 0;
    for (std::uint64_t i = 0; i < reduced[k]; ++i) {
      const SurvivorSplit split = law.sample_split(splits[k], rng);
      lines += split.survivors;
      doomed = saturating_add(doomed, split.doomed);
      if (lines > cap) return false;
    }
    reduced[k + 1] = lines;
    doomed_births[k + 1] = doomed;
  }
  return true;
}

// Z(k) for k = 0..k_max: reduced lines plus doomed lines. doomed[k] samples
// the offspring of a generation-k line that dies out.
std::vector<std::uint64_t> expand_population(std::span<const DoomedSampler> doomed_law, std::size_t k_max,
                                             const std::vector<std::uint64_t>& reduced,
                                             const std::vector<std::uint64_t>& doomed_births, Rng& rng) {
  std::vector<std::uint64_t> population(k_max + 1, 0);
  std::uint64_t doomed = 0;
  for (std::size_t k = 0; k <= k_max; ++k) {
    population[k] = saturating_add(reduced[k], doomed);
    if (k == k_max) break;
    const std::uint64_t offspring = doomed > 0 ? doomed_law[k].sample_sum(doomed, rng) : 0;
    doomed = saturating_add(doomed_births[k + 1], offspring);
  }
  return population;
}

struct BlockResult {
  std::vector<HitRecord> hits;
  // survivors_before[i]: survivors in the block up to and including hits[i].
  std::vector<std::uint64_t> survivors_through;
  std::uint64_t survivors = 0;
  bool stopped = false;
};

struct BlockJob {
  const ExtinctionTable* table;
  std::size_t n;
  std::uint64_t cap;
  std::uint64_t stop_threshold;
  const Observables* observables;
  const RunConfig* config;
  std::size_t population_max;
  bool need_population;
  std::vector<SplitParams> splits;
  std::vector<DoomedSampler> doomed;
};

BlockResult run_block(const BlockJob& job, std::uint64_t block, std::uint64_t first, std::uint64_t last) {
  BlockResult result;
  const double survival = job.table->survival(job.n);
  Rng skip = Rng::stream(job.config->seed, block, kLaneSurvival);
  const double log_fail = std::log1p(-survival);
  const auto gap = [&]() -> std::uint64_t {
    if (survival >= 1.0) return 0;
    const double g = std::floor(std::log(skip.uniform()) / log_fail);
    return g >= static_cast<double>(last - first) ? last - first : static_cast<std::uint64_t>(g);
  };

  std::vector<std::uint64_t> reduced;
  std::vector<std::uint64_t> births;
  std::uint64_t primary = 0;
  for (std::uint64_t trial = first + gap(); trial < last; trial += 1 + gap()) {
    ++result.survivors;
    Rng rng = Rng::stream(job.config->seed, trial, kLaneSkeleton);
    if (!sample_skeleton(job.table->law(), job.splits, job.cap, rng, reduced, births)) continue;

    HitRecord hit;
    hit.trial = trial;
    hit.z_n = reduced[job.n];
    hit.mrca_distance = *mrca_distance(reduced);
    for (std::size_t m : job.observables->reduced_at) hit.reduced.push_back(reduced[m]);
    if (job.need_population) {
      Rng doomed_rng = Rng::stream(job.config->seed, trial, kLaneDoomed);
      const auto population = expand_population(job.doomed, job.population_max, reduced, births, doomed_rng);
      for (std::size_t m : job.observables->population_at) hit.population.push_back(population[m]);
    }
    result.hits.push_back(std::move(hit));
    result.survivors_through.push_back(result.survivors);
    if (result.hits.back().z_n <= job.stop_threshold && ++primary >= job.config->min_hits) {
      result.stopped = true;
      break;
    }
  }
  return result;
}

}  // namespace

std::uint64_t EventSpec::threshold(const ExtinctionTable& table) const {
  if (!(phi < n)) throw std::invalid_argument("event: need phi < n");
  if (n > table.n_max()) throw std::out_of_range("event: n exceeds the extinction table");
  if (!(w > 0.0)) throw std::invalid_argument("event: w must be positive");
  return static_cast<std::uint64_t>(std::floor(w / table.survival(phi)));
}

ConditionalSample sample_conditioned(const ExtinctionTable& table, std::size_t n, std::uint64_t cap,
                                     std::uint64_t stop_threshold, const Observables& observables,
                                     const RunConfig& config) {
  if (n > table.n_max()) throw std::out_of_range("sample_conditioned: n exceeds the extinction table");
  if (stop_threshold > cap) throw std::invalid_argument("sample_conditioned: stop threshold above cap");
  if (config.block_size == 0) throw std::invalid_argument("sample_conditioned: block size must be positive");
  for (std::size_t m : observables.population_at) {
    if (m > n) throw std::invalid_argument("sample_conditioned: population checkpoint beyond n");
  }
  for (std::size_t m : observables.reduced_at) {
    if (m > n) throw std::invalid_argument("sample_conditioned: reduced checkpoint beyond n");
  }

  BlockJob job{&table, n, cap, stop_threshold, &observables, &config, 0, !observables.population_at.empty(), {}, {}};
  for (std::size_t k = 0; k < n; ++k) job.splits.push_back(table.law().split_params(table.survival(n - k - 1)));
  for (std::size_t m : observables.population_at) job.population_max = std::max(job.population_max, m);
  if (job.need_population && table.law().kind() != OffspringLaw::Kind::unit) {
    for (std::size_t k = 0; k < job.population_max; ++k) {
      job.doomed.emplace_back(table.law(), 1.0 - table.survival(n - k - 1));
    }
  }

  const std::uint64_t block_count = (config.max_trials + config.block_size - 1) / config.block_size;
  const unsigned threads = std::max(1u, config.threads);
  const std::uint64_t wave = std::max<std::uint64_t>(threads, 1);

  ConditionalSample sample;
  std::uint64_t primary = 0;
  for (std::uint64_t wave_start = 0; wave_start < block_count; wave_start += wave) {
    const std::uint64_t wave_end = std::min(block_count, wave_start + wave);
    std::vector<BlockResult> results(wave_end - wave_start);
    const auto work = [&](std::uint64_t b) {
      const std::uint64_t first = b * config.block_size;
      const std::uint64_t last = std::min(config.max_trials, first + config.block_size);
      results[b - wave_start] = run_block(job, b, first, last);
    };
    if (threads == 1) {
      for (std::uint64_t b = wave_start; b < wave_end; ++b) work(b);
    } else {
      std::atomic<std::uint64_t> next{wave_start};
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
          for (std::uint64_t b = next++; b < wave_end; b = next++) work(b);
        });
      }
    }

    for (std::uint64_t b = wave_start; b < wave_end; ++b) {
      BlockResult& r = results[b - wave_start];
      for (std::size_t i = 0; i < r.hits.size(); ++i) {
        HitRecord& hit = r.hits[i];
        const bool counts = hit.z_n <= stop_threshold;
        const std::uint64_t trial = hit.trial;
        const std::uint64_t through = r.survivors_through[i];
        sample.hits.push_back(std::move(hit));
        if (counts && ++primary >= config.min_hits) {
          sample.trials = trial + 1;
          sample.survivors += through;
          return sample;
        }
      }
      sample.survivors += r.survivors;
    }
  }
  sample.trials = config.max_trials;
  sample.converged = false;
  return sample;
}

McEstimate proportion_estimate(std::uint64_t successes, std::uint64_t count, std::uint64_t seed) {
  McEstimate est;
  est.seed = seed;
  est.hits = count;
  est.trials = count;
  if (count == 0) {
    est.converged = false;
    return est;
  }
  const double p = static_cast<double>(successes) / static_cast<double>(count);
  est.value = p;
  est.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(count));
  return est;
}

McEstimate event_estimate(const ConditionalSample& sample, std::uint64_t threshold, std::uint64_t seed) {
  std::uint64_t hits = 0;
  for (const auto& h : sample.hits) hits += h.z_n <= threshold ? 1 : 0;
  McEstimate est = proportion_estimate(hits, sample.trials, seed);
  est.hits = hits;
  est.converged = sample.converged;
  return est;
}

std::vector<McEstimate> lst_estimates(const ConditionalSample& sample, std::uint64_t threshold, std::size_t column,
                                      double scale, std::span<const double> lambdas, std::uint64_t seed) {
  std::vector<std::uint64_t> z;
  for (const auto& hit : sample.hits) {
    if (hit.z_n > threshold) continue;
    if (column >= hit.population.size()) throw std::out_of_range("lst_estimates: no such population column");
    z.push_back(hit.population[column]);
  }
  const auto count = static_cast<long double>(z.size());
  std::vector<McEstimate> out;
  for (double lambda : lambdas) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lst_estimates: lambda must be nonnegative");
    McEstimate est;
    est.lambda = lambda;
    est.seed = seed;
    est.hits = z.size();
    est.trials = sample.trials;
    est.converged = sample.converged && !z.empty();
    const auto term = [&](std::uint64_t v) {
      return std::exp(-static_cast<long double>(lambda) * scale * static_cast<long double>(v));
    };
    long double sum = 0.0L;
    for (std::uint64_t v : z) sum += term(v);
    if (!z.empty()) {
      const long double mean = sum / count;
      est.value = static_cast<double>(mean);
      if (z.size() > 1) {
        long double ss = 0.0L;
        for (std::uint64_t v : z) {
          const long double d = term(v) - mean;
          ss += d * d;
        }
        est.std_error = static_cast<double>(std::sqrt(ss / (count - 1.0L) / count));
      }
    }
    out.push_back(est);
  }
  return out;
}

ReducedEstimate reduced_estimates(const ConditionalSample& sample, std::uint64_t threshold, std::size_t column,
                                  std::size_t m, int j_max, std::size_t phi, std::span<const double> y_grid,
                                  std::uint64_t seed) {
  if (j_max < 1) throw std::invalid_argument("reduced_estimates: j_max must be at least 1");
  ReducedEstimate out;
  out.m = m;
  out.event_prob = event_estimate(sample, threshold, seed);
  std::vector<std::uint64_t> freq(static_cast<std::size_t>(j_max) + 2, 0);
  std::uint64_t count = 0;
  for (const auto& hit : sample.hits) {
    if (hit.z_n > threshold) continue;
    if (column >= hit.reduced.size()) throw std::out_of_range("reduced_estimates: no such reduced column");
    ++freq[std::min<std::uint64_t>(hit.reduced[column], static_cast<std::uint64_t>(j_max) + 1)];
    ++count;
  }
  const auto finish = [&](McEstimate est) {
    est.trials = sample.trials;
    est.converged = sample.converged && count > 0;
    return est;
  };
  for (int j = 1; j <= j_max; ++j) out.pmf.push_back(finish(proportion_estimate(freq[j], count, seed)));
  out.tail = finish(proportion_estimate(freq[j_max + 1], count, seed));
  out.y_grid.assign(y_grid.begin(), y_grid.end());
  out.mrca_cdf = mrca_estimates(sample, threshold, phi, y_grid, seed);
  return out;
}

std::vector<McEstimate> mrca_estimates(const ConditionalSample& sample, std::uint64_t threshold, std::size_t phi,
                                       std::span<const double> y_grid, std::uint64_t seed) {
  std::vector<std::size_t> distances;
  for (const auto& hit : sample.hits) {
    if (hit.z_n <= threshold) distances.push_back(hit.mrca_distance);
  }
  std::vector<McEstimate> out;
  for (double y : y_grid) {
    const double limit = y * static_cast<double>(phi);
    std::uint64_t below = 0;
    for (std::size_t d : distances) below += static_cast<double>(d) <= limit ? 1 : 0;
    McEstimate est = proportion_estimate(below, distances.size(), seed);
    est.trials = sample.trials;
    est.converged = sample.converged && !distances.empty();
    est.lambda = y;
    out.push_back(est);
  }
  return out;
}

LstEstimate estimate_conditional_lst(const ExtinctionTable& table, const EventSpec& event, std::size_t m,
                                     std::size_t scale_index, std::span<const double> lambdas,
                                     const RunConfig& config) {
  const std::uint64_t threshold = event.threshold(table);
  if (m > event.n) throw std::invalid_argument("estimate_conditional_lst: m exceeds n");
  Observables obs;
  obs.population_at = {m};
  const ConditionalSample sample = sample_conditioned(table, event.n, threshold, threshold, obs, config);
  LstEstimate out;
  out.m = m;
  out.scale_index = scale_index;
  out.event_prob = event_estimate(sample, threshold, config.seed);
  out.values = lst_estimates(sample, threshold, 0, table.survival(scale_index), lambdas, config.seed);
  return out;
}

LstEstimate estimate_regime_lst(const ExtinctionTable& table, const RegimeSpec& regime, std::size_t n, double w,
                                std::span<const double> lambdas, const RunConfig& config) {
  regime.validate();
  const EventSpec event{n, regime.phi(n), w};
  return estimate_conditional_lst(table, event, regime.m(n), regime.scaling_index(n), lambdas, config);
}

McEstimate estimate_event_prob(const ExtinctionTable& table, const EventSpec& event, std::uint64_t trials,
                               const RunConfig& config) {
  const std::uint64_t threshold = event.threshold(table);
  RunConfig fixed = config;
  fixed.min_hits = std::numeric_limits<std::uint64_t>::max();
  fixed.max_trials = trials;
  const ConditionalSample sample = sample_conditioned(table, event.n, threshold, threshold, Observables{}, fixed);
  McEstimate est = event_estimate(sample, threshold, config.seed);
  est.converged = true;
  return est;
}

McEstimate estimate_event_prob_forward(const ExtinctionTable& table, const EventSpec& event, std::uint64_t trials,
                                       std::uint64_t seed) {
  const std::uint64_t threshold = event.threshold(table);
  std::uint64_t hits = 0;
  std::uint64_t overflow = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    Rng rng = Rng::stream(seed, i, kLaneForward);
    const Trajectory traj = simulate_trajectory(table.law(), event.n, rng);
    if (traj.overflow) {
      ++overflow;
      continue;
    }
    const std::uint64_t z = traj.z[event.n];
    hits += (z > 0 && z <= threshold) ? 1 : 0;
  }
  McEstimate est = proportion_estimate(hits, trials, seed);
  est.hits = hits;
  est.converged = overflow == 0;
  return est;
}

ReducedEstimate estimate_reduced_pmf(const ExtinctionTable& table, const EventSpec& event, double y, int j_max,
                                     std::span<const double> y_grid, const RunConfig& config) {
  if (!(y > 0.0)) throw std::invalid_argument("estimate_reduced_pmf: y must be positive");
  const std::uint64_t threshold = event.threshold(table);
  const auto back = static_cast<std::size_t>(std::ceil(y * static_cast<double>(event.phi)));
  if (back > event.n) throw std::invalid_argument("estimate_reduced_pmf: n - ceil(y phi) is negative");
  Observables obs;
  obs.reduced_at = {event.n - back};
  const ConditionalSample sample = sample_conditioned(table, event.n, threshold, threshold, obs, config);
  return reduced_estimates(sample, threshold, 0, event.n - back, j_max, event.phi, y_grid, config.seed);
}

}  // namespace critgw
