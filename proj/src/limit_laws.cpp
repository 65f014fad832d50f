#include "critgw/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

namespace critgw {

using laplace::Complex;

namespace {

Complex complex_log1p(Complex z) {
  if (std::abs(z) < 1e-4L) {
    // z - z^2/2 + z^3/3 - z^4/4
    return z * (1.0L - z * (0.5L - z * (1.0L / 3.0L - z * 0.25L)));
  }
  return std::log(1.0L + z);
}

Complex complex_expm1(Complex z) {
  if (std::abs(z) < 1e-4L) {
    return z * (1.0L + z * (0.5L + z * (1.0L / 6.0L + z / 24.0L)));
  }
  return std::exp(z) - 1.0L;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
}

// Tail sum_{j > J} alpha Gamma(j+alpha)/j! t^j for t in [0, 1): the smaller of
// the closed form minus the partial sum (with a rounding allowance) and the
// geometric ratio bound c_{J+1} t^{J+1} / (1 - t).
double coefficient_series_tail(double alpha, double t, int J) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return std::numeric_limits<double>::infinity();
  long double partial = 0.0L;
  long double coef = series_coefficient(alpha, 1);
  long double power = t;
  for (int j = 1; j <= J; ++j) {
    partial += coef * power;
    coef *= (j + static_cast<long double>(alpha)) / (j + 1.0L);
    power *= t;
  }
  const long double ratio_bound = coef * power / (1.0L - t);
  const long double closed = term2_closed_form(alpha, t);
  const long double exact = std::max(closed - partial, 0.0L) + 1e-15L * closed;
  return static_cast<double>(std::min(ratio_bound, exact));
}

// Certified bound for sum_{j>J} coef_j scale^j M^{*j}(x), using
// M^{*j}(x) <= M(x)^j and the Chernoff bound M^{*j}(x) <= e^{s x} LST(s)^j.
double convolution_series_tail(const YaglomLaw& law, double x, double scale, double m_at_x, int J) {
  const double alpha = law.alpha();
  double best = coefficient_series_tail(alpha, scale * std::min(1.0, m_at_x), J);
  for (int e = -4; e <= 40; ++e) {
    const double s = std::ldexp(1.0, e) / x;
    const double t = scale * yaglom_lst(alpha, s);
    const double factor = std::exp(s * x);
    if (!std::isfinite(factor)) break;
    best = std::min(best, factor * coefficient_series_tail(alpha, t, J));
  }
  return best;
}

// sum_{j=1}^{J} coef_j scale^j M^{*j}(x) with J doubled until the certified
// tail bound drops below tol.
SeriesValue convolution_series(const YaglomLaw& law, double x, double scale, double prefactor, double tol,
                               int max_terms) {
  const double alpha = law.alpha();
  int J = std::min(16, max_terms);
  while (true) {
    const std::vector<double> conv = law.conv_cdfs(J, x);
    long double sum = 0.0L;
    long double coef = series_coefficient(alpha, 1);
    long double power = scale;
    for (int j = 1; j <= J; ++j) {
      sum += coef * power * conv[j - 1];
      coef *= (j + static_cast<long double>(alpha)) / (j + 1.0L);
      power *= scale;
    }
    const double bound = prefactor * convolution_series_tail(law, x, scale, conv[0], J);
    if (bound < tol) return {static_cast<double>(prefactor * sum), bound, J};
    if (J >= max_terms) {
      std::ostringstream msg;
      msg << "series tail bound " << bound << " not below " << tol << " with " << max_terms
          << " terms (alpha=" << alpha << ", x=" << x << ")";
      throw std::runtime_error(msg.str());
    }
    J = std::min(2 * J, max_terms);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// YaglomLaw

YaglomLaw::YaglomLaw(double alpha, laplace::InversionConfig config) : alpha_(alpha), config_(config) {
  check_alpha(alpha);
}

Complex YaglomLaw::lst(Complex lambda) const {
  const long double a = alpha_;
  const Complex neg_power = std::pow(lambda, -a);
  if (std::abs(neg_power) > 1.0L) {
    // 1 - lambda (1 + lambda^alpha)^{-1/alpha}: no overflow of lambda^{-alpha}.
    return 1.0L - lambda * std::pow(1.0L + std::pow(lambda, a), -1.0L / a);
  }
  return -complex_expm1(-complex_log1p(neg_power) / a);
}

std::vector<double> YaglomLaw::conv_cdfs_with(laplace::Method method, int j_max, double x) const {
  if (j_max < 1) throw std::invalid_argument("conv_cdfs: j_max must be at least 1");
  if (!(x > 0.0)) throw std::invalid_argument("conv_cdfs: x must be positive");
  const int terms = method == laplace::Method::talbot ? config_.talbot_terms : config_.euler_terms;
  const laplace::Rule rule = laplace::make_rule(method, x, terms);
  std::vector<long double> acc(j_max, 0.0L);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const Complex s = rule.nodes[k];
    const Complex phi = lst(s);
    Complex term = rule.weights[k] / s;
    for (int j = 0; j < j_max; ++j) {
      term *= phi;
      acc[j] += std::real(term);
    }
  }
  return {acc.begin(), acc.end()};
}

std::vector<double> YaglomLaw::conv_cdfs(int j_max, double x) const {
  std::vector<double> talbot = conv_cdfs_with(laplace::Method::talbot, j_max, x);
  const std::vector<double> euler = conv_cdfs_with(laplace::Method::euler, j_max, x);
  for (int j = 0; j < j_max; ++j) {
    if (!(std::abs(talbot[j] - euler[j]) <= config_.agreement_tol)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "Laplace inversion backends disagree for M^{*" << j + 1 << "}(" << x << "), alpha=" << alpha_
          << ": talbot=" << talbot[j] << " euler=" << euler[j];
      throw laplace::InversionError(msg.str(), talbot[j], euler[j]);
    }
    talbot[j] = std::clamp(talbot[j], 0.0, 1.0);
  }
  return talbot;
}

double YaglomLaw::cdf(double x) const { return conv_cdfs(1, x)[0]; }

double YaglomLaw::conv_cdf(int j, double x) const { return conv_cdfs(j, x).back(); }

double yaglom_lst(double alpha, double lambda) {
  check_alpha(alpha);
  if (!(lambda > 0.0)) throw std::invalid_argument("yaglom_lst: lambda must be positive");
  return static_cast<double>(std::real(YaglomLaw(alpha).lst(Complex(lambda, 0.0L))));
}

// ---------------------------------------------------------------------------
// Series identities

double series_coefficient(double alpha, int j) {
  if (j < 1) throw std::invalid_argument("series_coefficient: j must be at least 1");
  long double coef = alpha * std::tgamma(1.0L + alpha);
  for (int i = 1; i < j; ++i) coef *= (i + static_cast<long double>(alpha)) / (i + 1.0L);
  return static_cast<double>(coef);
}

double term2_closed_form(double alpha, double t) {
  check_alpha(alpha);
  if (!(t >= 0.0 && t < 1.0)) throw std::invalid_argument("term2: t must lie in [0, 1)");
  return static_cast<double>(std::tgamma(1.0L + alpha) *
                             std::expm1(-static_cast<long double>(alpha) * std::log1p(-static_cast<long double>(t))));
}

double term2_residual(double alpha, double t) {
  const double closed = term2_closed_form(alpha, t);
  long double sum = 0.0L;
  long double coef = series_coefficient(alpha, 1);
  long double power = t;
  for (int j = 1; j < 1000000; ++j) {
    sum += coef * power;
    coef *= (j + static_cast<long double>(alpha)) / (j + 1.0L);
    power *= t;
    if (coef * power / (1.0L - t) < 1e-19L * std::max(1.0L, sum)) break;
  }
  return static_cast<double>(std::abs(sum - static_cast<long double>(closed)));
}

SeriesValue renewal_measure(const YaglomLaw& law, double x, double tol, int max_terms) {
  return convolution_series(law, x, 1.0, 1.0, tol, max_terms);
}

// ---------------------------------------------------------------------------
// Regime transforms

double regime1_transform(double alpha, double lambda) {
  check_alpha(alpha);
  if (!(lambda >= 0.0)) throw std::invalid_argument("regime transform: lambda must be nonnegative");
  return std::pow(1.0 + std::pow(lambda, alpha), -(1.0 / alpha + 1.0));
}

double regime2_transform(double alpha, double theta, double lambda) {
  check_alpha(alpha);
  if (!(theta >= 0.0 && theta < 1.0)) throw std::invalid_argument("regime 2: theta must lie in [0, 1)");
  if (!(lambda >= 0.0)) throw std::invalid_argument("regime transform: lambda must be nonnegative");
  const double inner = lambda * std::pow(1.0 - theta, 1.0 / alpha) + std::pow(theta, 1.0 / alpha);
  return std::pow(1.0 - theta + std::pow(inner, alpha), -(1.0 / alpha + 1.0));
}

double regime3_transform(double alpha, double lambda) {
  check_alpha(alpha);
  if (!(lambda >= 0.0)) throw std::invalid_argument("regime transform: lambda must be nonnegative");
  return std::pow(1.0 + lambda, -(alpha + 1.0));
}

SeriesValue regime4_transform(const YaglomLaw& law, double y, double lambda, double tol, int max_terms) {
  if (!(y > 0.0) || !std::isfinite(y)) throw std::invalid_argument("regime 4: y must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("regime transform: lambda must be nonnegative");
  const double alpha = law.alpha();
  const double x = std::pow(y, -1.0 / alpha);
  const double prefactor = y * std::pow(1.0 + lambda, -alpha);
  return convolution_series(law, x, 1.0 / (1.0 + lambda), prefactor, tol, max_terms);
}

double regime5_transform(double alpha, double lambda) {
  check_alpha(alpha);
  if (!(lambda >= 0.0)) throw std::invalid_argument("regime transform: lambda must be nonnegative");
  if (lambda == 0.0) return 1.0;
  return alpha * std::pow(lambda, -alpha) * boost::math::tgamma_lower(alpha, lambda);
}

double regime_transform(const RegimeSpec& spec, const YaglomLaw& law, double lambda) {
  spec.validate();
  const double alpha = law.alpha();
  switch (spec.id) {
    case 1: return regime1_transform(alpha, lambda);
    case 2: return regime2_transform(alpha, spec.theta, lambda);
    case 3: return regime3_transform(alpha, lambda);
    case 4: return regime4_transform(law, spec.y, lambda).value;
    default: return regime5_transform(alpha, lambda);
  }
}

// ---------------------------------------------------------------------------
// Reduced process and MRCA

std::vector<double> reduced_limit_pmfs(const YaglomLaw& law, double y, int j_max) {
  if (!(y > 0.0) || !std::isfinite(y)) throw std::invalid_argument("reduced_limit_pmf: y must be positive");
  const double alpha = law.alpha();
  const std::vector<double> conv = law.conv_cdfs(j_max, std::pow(y, -1.0 / alpha));
  std::vector<double> pmf(j_max);
  for (int j = 1; j <= j_max; ++j) pmf[j - 1] = series_coefficient(alpha, j) * y * conv[j - 1];
  return pmf;
}

double reduced_limit_pmf(const YaglomLaw& law, double y, int j) {
  if (j < 1) throw std::invalid_argument("reduced_limit_pmf: j must be at least 1");
  return reduced_limit_pmfs(law, y, j).back();
}

double reduced_limit_tail_bound(const YaglomLaw& law, double y, int j_max) {
  if (!(y > 0.0) || !std::isfinite(y)) throw std::invalid_argument("reduced_limit_tail_bound: y must be positive");
  const double x = std::pow(y, -1.0 / law.alpha());
  return y * convolution_series_tail(law, x, 1.0, law.cdf(x), j_max);
}

double mrca_limit_cdf(const YaglomLaw& law, double y) { return reduced_limit_pmf(law, y, 1); }

// ---------------------------------------------------------------------------
// Small deviations

double small_deviation_prob(const ExtinctionTable& table, std::size_t n, std::size_t phi) {
  if (!(phi < n) || n > table.n_max()) throw std::out_of_range("small_deviation_prob: need phi < n <= n_max");
  const double alpha = table.law().alpha();
  return table.delta(n) * static_cast<double>(phi) / std::tgamma(1.0 + alpha);
}

double small_deviation_prob_tform(const ExtinctionTable& table, std::size_t n, std::size_t phi) {
  if (!(phi < n) || n > table.n_max()) throw std::out_of_range("small_deviation_prob: need phi < n <= n_max");
  const double alpha = table.law().alpha();
  const double T = table.threshold(phi);
  return table.delta(n) * std::pow(T, alpha) /
         (alpha * std::tgamma(1.0 + alpha) * table.law().slowly_varying_constant());
}

double finite_variance_small_deviation(double sigma2, std::size_t n, double T) {
  if (!(sigma2 > 0.0) || n == 0) throw std::invalid_argument("finite_variance_small_deviation: bad arguments");
  const double nn = static_cast<double>(n);
  return 4.0 * T / (sigma2 * sigma2 * nn * nn);
}

}  // namespace critgw
