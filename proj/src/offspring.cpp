#include "critgw/offspring.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>

namespace critgw {

namespace {

constexpr std::uint64_t kHuge = std::uint64_t{1} << 62;

std::uint64_t geometric_failures(double success_prob, Rng& rng) {
  if (success_prob >= 1.0) return 0;
  const double g = std::floor(std::log(rng.uniform()) / std::log1p(-success_prob));
  return g >= static_cast<double>(kHuge) ? kHuge : static_cast<std::uint64_t>(g);
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view s, std::string_view context) {
  s = trim(s);
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("malformed number '" + std::string(s) + "' in " + std::string(context));
  }
  return value;
}

}  // namespace

// ---------------------------------------------------------------------------
// AliasTable

AliasTable::AliasTable(const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  if (n == 0 || n > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("alias table size out of range");
  }
  long double total = 0.0L;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("alias table weight must be nonnegative");
    total += w;
  }
  if (!(total > 0.0L)) throw std::invalid_argument("alias table weights sum to zero");

  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<long double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<long double>(n) / total;
    (scaled[i] < 1.0L ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    prob_[s] = static_cast<double>(scaled[s]);
    alias_[s] = l;
    scaled[l] -= 1.0L - scaled[s];
    if (scaled[l] < 1.0L) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) prob_[i] = 1.0, alias_[i] = i;
  for (auto i : small) prob_[i] = 1.0, alias_[i] = i;
}

std::size_t AliasTable::sample(Rng& rng) const {
  // One 53-bit draw picks the column; its fractional part decides alias vs column.
  const double x = static_cast<double>(rng() >> 11) * 0x1.0p-53 * static_cast<double>(prob_.size());
  const std::size_t i = std::min(static_cast<std::size_t>(x), prob_.size() - 1);
  return x - static_cast<double>(i) < prob_[i] ? i : alias_[i];
}

// ---------------------------------------------------------------------------
// Stable family tables

struct OffspringLaw::StableTables {
  std::vector<double> pmf;           // p_0 .. p_K
  std::vector<double> tail;          // P(xi > k), k = 0 .. K
  AliasTable all;                    // {0..K} plus one tail cell
  AliasTable at_least_two;           // {2..K} plus one tail cell
};

OffspringLaw::OffspringLaw(Kind kind, double alpha, double c, std::size_t cutoff)
    : kind_(kind), alpha_(alpha), c_(c), cutoff_(cutoff) {}

OffspringLaw OffspringLaw::stable(double alpha, double c, std::size_t table_cutoff) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("stable law: alpha must lie in (0, 1], got " + format_double(alpha));
  }
  const double c_max = 1.0 / (1.0 + alpha);
  if (!(c > 0.0 && c <= c_max * (1.0 + 1e-12))) {
    throw std::invalid_argument("stable law: c must lie in (0, 1/(1+alpha)], got " + format_double(c));
  }
  c = std::min(c, c_max);
  if (table_cutoff < 2) throw std::invalid_argument("stable law: table cutoff must be at least 2");

  OffspringLaw law(Kind::stable, alpha, c, table_cutoff);
  auto t = std::make_shared<StableTables>();
  const std::size_t K = table_cutoff;

  t->pmf.resize(K + 1);
  t->pmf[0] = c;
  t->pmf[1] = std::max(0.0, 1.0 - c * (1.0 + alpha));
  t->pmf[2] = c * (1.0 + alpha) * alpha / 2.0;
  for (std::size_t k = 2; k < K; ++k) {
    t->pmf[k + 1] = t->pmf[k] * (static_cast<double>(k) - 1.0 - alpha) / (static_cast<double>(k) + 1.0);
  }

  t->tail.resize(K + 1);
  t->tail[0] = 1.0 - c;
  t->tail[1] = c * alpha;
  for (std::size_t k = 1; k < K; ++k) {
    t->tail[k + 1] = t->tail[k] * (static_cast<double>(k) - alpha) / (static_cast<double>(k) + 1.0);
  }

  std::vector<double> weights(t->pmf);
  weights.push_back(t->tail[K]);
  t->all = AliasTable(weights);
  std::vector<double> ge2(t->pmf.begin() + 2, t->pmf.end());
  ge2.push_back(t->tail[K]);
  t->at_least_two = AliasTable(ge2);

  law.tables_ = std::move(t);
  return law;
}

OffspringLaw OffspringLaw::stable(double alpha) { return stable(alpha, 1.0 / (1.0 + alpha)); }

OffspringLaw OffspringLaw::geometric() { return OffspringLaw(Kind::geometric, 1.0, 1.0, 0); }

OffspringLaw OffspringLaw::unit() { return OffspringLaw(Kind::unit, 1.0, 0.0, 0); }

OffspringLaw OffspringLaw::parse(std::string_view text) {
  const std::string_view s = trim(text);
  if (s == "geometric") return geometric();
  if (s == "unit") return unit();
  constexpr std::string_view prefix = "stable(";
  if (s.substr(0, prefix.size()) != prefix || s.back() != ')') {
    throw std::invalid_argument("unknown offspring law '" + std::string(s) + "'");
  }
  std::string_view body = s.substr(prefix.size(), s.size() - prefix.size() - 1);
  double alpha = std::nan("");
  double c = std::nan("");
  while (!body.empty()) {
    const auto comma = body.find(',');
    const std::string_view item = trim(body.substr(0, comma));
    body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("expected key=value in '" + std::string(s) + "'");
    }
    const std::string_view key = trim(item.substr(0, eq));
    const double value = parse_number(item.substr(eq + 1), s);
    if (key == "alpha") {
      alpha = value;
    } else if (key == "c") {
      c = value;
    } else {
      throw std::invalid_argument("unknown stable-law parameter '" + std::string(key) + "'");
    }
  }
  if (std::isnan(alpha)) throw std::invalid_argument("stable law requires alpha");
  return std::isnan(c) ? stable(alpha) : stable(alpha, c);
}

std::string OffspringLaw::to_string() const {
  switch (kind_) {
    case Kind::geometric: return "geometric";
    case Kind::unit: return "unit";
    case Kind::stable: break;
  }
  return "stable(alpha=" + format_double(alpha_) + ", c=" + format_double(c_) + ")";
}

double OffspringLaw::slowly_varying_constant() const {
  switch (kind_) {
    case Kind::stable: return c_;
    case Kind::geometric: return 1.0;  // sigma^2 / 2
    case Kind::unit: break;
  }
  throw std::logic_error("unit law is degenerate: no slowly varying constant");
}

double OffspringLaw::pmf(std::uint64_t k) const {
  switch (kind_) {
    case Kind::unit: return k == 1 ? 1.0 : 0.0;
    case Kind::geometric: return k > 2000 ? 0.0 : std::ldexp(1.0, -static_cast<int>(k) - 1);
    case Kind::stable: break;
  }
  const auto& t = *tables_;
  if (k <= cutoff_) return t.pmf[k];
  double p = t.pmf[cutoff_];
  for (std::uint64_t j = cutoff_; j < k && p > 0.0; ++j) {
    p *= (static_cast<double>(j) - 1.0 - alpha_) / (static_cast<double>(j) + 1.0);
  }
  return p;
}

double OffspringLaw::tail(std::uint64_t k) const {
  switch (kind_) {
    case Kind::unit: return k == 0 ? 1.0 : 0.0;
    case Kind::geometric: return k > 2000 ? 0.0 : std::ldexp(1.0, -static_cast<int>(k) - 1);
    case Kind::stable: break;
  }
  const auto& t = *tables_;
  if (k <= cutoff_) return t.tail[k];
  double q = t.tail[cutoff_];
  for (std::uint64_t j = cutoff_; j < k && q > 0.0; ++j) {
    q *= (static_cast<double>(j) - alpha_) / (static_cast<double>(j) + 1.0);
  }
  return q;
}

double OffspringLaw::pgf(double s) const {
  switch (kind_) {
    case Kind::unit: return s;
    case Kind::geometric: return 1.0 / (2.0 - s);
    case Kind::stable: break;
  }
  return s + c_ * std::pow(1.0 - s, 1.0 + alpha_);
}

long double OffspringLaw::survival_step(long double u) const {
  switch (kind_) {
    case Kind::unit: return u;
    case Kind::geometric: return u / (1.0L + u);
    case Kind::stable: break;
  }
  return u - static_cast<long double>(c_) * std::pow(u, 1.0L + static_cast<long double>(alpha_));
}

std::uint64_t OffspringLaw::stable_tail_walk(Rng& rng) const {
  // Inversion of P(xi > k | xi > K) through the exact tail recurrence.
  const double target = rng.uniform() * tables_->tail[cutoff_];
  double q = tables_->tail[cutoff_];
  std::uint64_t k = cutoff_;
  while (true) {
    q *= (static_cast<double>(k) - alpha_) / (static_cast<double>(k) + 1.0);
    ++k;
    if (q < target) return k;
  }
}

std::uint64_t OffspringLaw::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::unit: return 1;
    case Kind::geometric: {
      std::uint64_t k = 0;
      while (true) {
        const std::uint64_t word = rng();
        if (word != 0) return k + static_cast<std::uint64_t>(std::countr_zero(word));
        k += 64;
      }
    }
    case Kind::stable: break;
  }
  const std::size_t i = tables_->all.sample(rng);
  return i <= cutoff_ ? i : stable_tail_walk(rng);
}

std::uint64_t OffspringLaw::sample_stable_at_least_two(Rng& rng) const {
  const std::size_t i = tables_->at_least_two.sample(rng) + 2;
  return i <= cutoff_ ? i : stable_tail_walk(rng);
}

std::uint64_t OffspringLaw::sample_tilted_sibuya(double v, Rng& rng) const {
  // Sibuya(alpha) is Geometric(p) on {1, 2, ...} with p ~ Beta(alpha, 1 - alpha).
  // Tilting by q^d, q = 1 - v, reweights p by p / (v + p q) <= 1 and shrinks
  // the geometric ratio to (1 - p) q.
  if (alpha_ >= 1.0) return 1;
  const double q = 1.0 - v;
  const double inv_a = 1.0 / alpha_;
  const double inv_b = 1.0 / (1.0 - alpha_);
  while (true) {
    // Johnk's beta generator, valid since both shapes are below one.
    const double x = std::pow(rng.uniform(), inv_a);
    const double y = std::pow(rng.uniform(), inv_b);
    if (x + y > 1.0 || !(x + y > 0.0)) continue;
    const double p = x / (x + y);
    if (rng.uniform() * (v + p * q) < p) return 1 + geometric_failures(v + p * q, rng);
  }
}

SplitParams OffspringLaw::split_params(double child_survival) const {
  const double v = child_survival;
  if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("sample_split: survival probability must be in (0, 1]");
  SplitParams params;
  params.child_survival = v;
  if (kind_ != Kind::stable) return params;
  // Joint pgf E[a^S b^D] = f(v a + (1-v) b). With t = c v^alpha:
  //   P(S >= 2) = alpha t / (1 - t), and S | S >= 2 has the law of xi | xi >= 2;
  //   D | S = s >= 2 ~ NegBin(s - 1 - alpha, failure 1 - v);
  //   P(S = 1, D = 0) = p_1 / (1 - t);
  //   D | S = 1, D >= 1 is Sibuya(alpha) tilted by (1-v)^d.
  const double t = c_ * std::pow(v, alpha_);
  params.multi = alpha_ * t / (1.0 - t);
  params.multi_or_clean = params.multi + tables_->pmf[1] / (1.0 - t);
  return params;
}

SurvivorSplit OffspringLaw::sample_split(double child_survival, Rng& rng) const {
  return sample_split(split_params(child_survival), rng);
}

SurvivorSplit OffspringLaw::sample_split(const SplitParams& params, Rng& rng) const {
  const double v = params.child_survival;
  switch (kind_) {
    case Kind::unit: return {1, 0};
    case Kind::geometric: {
      // S - 1 ~ Geometric(1/(1+v)); D | S ~ NegBin(S+1, failure (1-v)/2).
      const std::uint64_t s = 1 + geometric_failures(1.0 / (1.0 + v), rng);
      return {s, sample_negative_binomial(static_cast<double>(s) + 1.0, (1.0 - v) / 2.0, rng)};
    }
    case Kind::stable: break;
  }
  const double u = rng.uniform();
  if (u < params.multi) {
    const std::uint64_t s = sample_stable_at_least_two(rng);
    return {s, sample_negative_binomial(static_cast<double>(s) - 1.0 - alpha_, 1.0 - v, rng)};
  }
  if (u < params.multi_or_clean) return {1, 0};
  return {1, sample_tilted_sibuya(v, rng)};
}

SurvivorSplit OffspringLaw::sample_split_rejection(double child_survival, Rng& rng) const {
  if (!(child_survival > 0.0 && child_survival <= 1.0)) {
    throw std::invalid_argument("sample_split_rejection: survival probability must be in (0, 1]");
  }
  while (true) {
    const std::uint64_t xi = sample(rng);
    if (xi == 0) continue;
    std::binomial_distribution<std::uint64_t> survivors(xi, child_survival);
    const std::uint64_t s = survivors(rng);
    if (s > 0) return {s, xi - s};
  }
}

std::uint64_t OffspringLaw::sample_doomed(double child_death, Rng& rng) const {
  const double q = child_death;
  if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("sample_doomed: death probability must be in [0, 1)");
  switch (kind_) {
    case Kind::unit:
      throw std::logic_error("unit law has no lines that die out");
    case Kind::geometric:
      return q == 0.0 ? 0 : geometric_failures(1.0 - q / 2.0, rng);
    case Kind::stable: break;
  }
  // Rejection from p_k with acceptance q^k; acceptance rate f(q) >= p_0 = c.
  const double log_q = std::log(q);
  while (true) {
    const std::uint64_t k = sample(rng);
    if (k == 0) return 0;
    if (std::log(rng.uniform()) < static_cast<double>(k) * log_q) return k;
  }
}

DoomedSampler::DoomedSampler(const OffspringLaw& law, double child_death) : law_(&law), q_(child_death) {
  const double q = q_;
  if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("DoomedSampler: death probability must be in [0, 1)");
  if (law.kind() != OffspringLaw::Kind::stable || q == 0.0) return;
  const auto& t = *law.tables_;
  const std::size_t K = law.cutoff_;
  const long double u = 1.0L - q;
  const long double total =
      1.0L - u + static_cast<long double>(law.c_) * std::pow(u, 1.0L + static_cast<long double>(law.alpha_));
  std::vector<double> weights(K);
  long double head = 0.0L;
  long double power = 1.0L;
  for (std::size_t k = 1; k <= K; ++k) {
    power *= q;
    weights[k - 1] = static_cast<double>(t.pmf[k] * power);
    head += t.pmf[k] * power;
  }
  const long double tail = std::max(0.0L, total - t.pmf[0] - head);
  zero_ = static_cast<double>(t.pmf[0] / total);
  beyond_ = static_cast<double>(tail / (head + tail));
  positive_ = AliasTable(weights);
}

std::uint64_t DoomedSampler::sample_positive(Rng& rng) const {
  const std::size_t K = law_->cutoff_;
  if (rng.uniform() >= beyond_) return positive_.sample(rng) + 1;
  // Proposal p_k / P(xi > K) on k > K, accepted with probability q^{k-K-1}.
  const double log_q = std::log(q_);
  while (true) {
    const std::uint64_t k = law_->stable_tail_walk(rng);
    if (std::log(rng.uniform()) < static_cast<double>(k - K - 1) * log_q) return k;
  }
}

std::uint64_t DoomedSampler::sample_sum(std::uint64_t count, Rng& rng) const {
  if (count == 0 || q_ == 0.0) return 0;
  switch (law_->kind()) {
    case OffspringLaw::Kind::unit:
      throw std::logic_error("unit law has no lines that die out");
    case OffspringLaw::Kind::geometric:
      // Each count is geometric with ratio q/2; the sum is negative binomial.
      return sample_negative_binomial(static_cast<double>(count), q_ / 2.0, rng);
    case OffspringLaw::Kind::stable: break;
  }
  std::binomial_distribution<std::uint64_t> positives(count, 1.0 - zero_);
  const std::uint64_t m = positives(rng);
  std::uint64_t total = 0;
  for (std::uint64_t i = 0; i < m && total < kHuge; ++i) total += sample_positive(rng);
  return std::min(total, kHuge);
}

std::uint64_t sample_negative_binomial(double shape, double fail_prob, Rng& rng) {
  if (shape < 0.0 || !(fail_prob >= 0.0 && fail_prob < 1.0)) {
    throw std::invalid_argument("negative binomial parameters out of range");
  }
  if (shape == 0.0 || fail_prob == 0.0) return 0;
  std::gamma_distribution<double> gamma(shape, 1.0);
  const double mean = gamma(rng) * fail_prob / (1.0 - fail_prob);
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> poisson(mean);
  return poisson(rng);
}

}  // namespace critgw
