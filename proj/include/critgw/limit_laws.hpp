#pragma once

#include <vector>

#include "critgw/extinction.hpp"
#include "critgw/laplace.hpp"
#include "critgw/regime.hpp"

namespace critgw {

/// Yaglom limit law M of u_n Z(n) given survival, described by its
/// Laplace-Stieltjes transform 1 - (1 + lambda^{-alpha})^{-1/alpha}.
///
/// CDF values of M and of its convolution powers are obtained by numerical
/// inversion of LST^j(s)/s with two independent backends (fixed Talbot and
/// Euler-accelerated Fourier series). The Talbot value is returned; a
/// disagreement above `agreement_tol` raises laplace::InversionError.
class YaglomLaw {
 public:
  explicit YaglomLaw(double alpha, laplace::InversionConfig config = {});

  double alpha() const { return alpha_; }
  const laplace::InversionConfig& config() const { return config_; }

  /// Transform at a complex argument off the negative real axis.
  laplace::Complex lst(laplace::Complex lambda) const;

  /// M(x), x > 0.
  double cdf(double x) const;
  /// M^{*j}(x), j >= 1, x > 0.
  double conv_cdf(int j, double x) const;
  /// M^{*j}(x) for j = 1..j_max; element j-1 holds M^{*j}(x).
  std::vector<double> conv_cdfs(int j_max, double x) const;
  /// Single-backend values, unclamped, for diagnostics.
  std::vector<double> conv_cdfs_with(laplace::Method method, int j_max, double x) const;

 private:
  double alpha_;
  laplace::InversionConfig config_;
};

/// 1 - (1 + lambda^{-alpha})^{-1/alpha}; lambda > 0.
double yaglom_lst(double alpha, double lambda);

/// Truncated series with a certified bound on the omitted tail.
struct SeriesValue {
  double value = 0.0;
  double tail_bound = 0.0;
  int terms = 0;
};

/// alpha Gamma(j + alpha) / j!.
double series_coefficient(double alpha, int j);

/// sum_{j >= 1} alpha Gamma(j+alpha)/j! t^j, closed form Gamma(alpha+1) ((1-t)^{-alpha} - 1).
double term2_closed_form(double alpha, double t);
/// |adaptive partial sum - closed form| for t in [0, 1).
double term2_residual(double alpha, double t);

/// U(x) = sum_j alpha Gamma(j+alpha)/j! M^{*j}(x); equals x^alpha.
SeriesValue renewal_measure(const YaglomLaw& law, double x, double tol = 1e-6, int max_terms = 500);

double regime1_transform(double alpha, double lambda);
/// theta in [0, 1); theta = 0 reproduces regime 1.
double regime2_transform(double alpha, double theta, double lambda);
double regime3_transform(double alpha, double lambda);
/// sum_j alpha Gamma(j+alpha) / (j! (1+lambda)^{alpha+j}) y M^{*j}(y^{-1/alpha}),
/// truncated adaptively until the tail bound drops below `tol`.
SeriesValue regime4_transform(const YaglomLaw& law, double y, double lambda, double tol = 1e-6,
                              int max_terms = 500);
/// alpha int_0^1 x^{alpha-1} e^{-lambda x} dx = alpha lambda^{-alpha} gamma(alpha, lambda).
double regime5_transform(double alpha, double lambda);
/// Dispatch on the regime id. lambda >= 0.
double regime_transform(const RegimeSpec& spec, const YaglomLaw& law, double lambda);

/// Limit of P(Z(n - y phi, n) = j | H(n, phi)).
double reduced_limit_pmf(const YaglomLaw& law, double y, int j);
std::vector<double> reduced_limit_pmfs(const YaglomLaw& law, double y, int j_max);
/// Certified upper bound for the limit mass beyond j_max.
double reduced_limit_tail_bound(const YaglomLaw& law, double y, int j_max);
/// Limit of P(d(n) <= y phi | H(n, phi)) = alpha Gamma(1+alpha) y M(y^{-1/alpha}).
double mrca_limit_cdf(const YaglomLaw& law, double y);

/// Small-deviation asymptotic Delta(n) phi / Gamma(1+alpha); requires phi < n <= n_max.
double small_deviation_prob(const ExtinctionTable& table, std::size_t n, std::size_t phi);
/// Same asymptotic written through T = 1/u_phi: Delta(n) T^alpha / (alpha Gamma(1+alpha) L).
double small_deviation_prob_tform(const ExtinctionTable& table, std::size_t n, std::size_t phi);
/// Finite-variance counterpart 4 T / (sigma^4 n^2).
double finite_variance_small_deviation(double sigma2, std::size_t n, double T);

}  // namespace critgw
