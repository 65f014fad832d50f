#include "critgw/limit_laws.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace critgw;

namespace {

// Composite Simpson rule on [a, b] with an even number of panels.
template <class F>
double simpson(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

}  // namespace

TEST(YaglomLaw, TransformValues) {
  // alpha = 1: 1 / (1 + lambda).
  for (double lambda : {0.1, 1.0, 7.0}) EXPECT_NEAR(yaglom_lst(1.0, lambda), 1.0 / (1.0 + lambda), 1e-15);
  // alpha = 1/2: (1 + 2 sqrt(l)) / (1 + sqrt(l))^2.
  for (double lambda : {0.01, 0.5, 2.0, 1e6}) {
    const double r = std::sqrt(lambda);
    EXPECT_NEAR(yaglom_lst(0.5, lambda), (1 + 2 * r) / ((1 + r) * (1 + r)), 1e-14);
  }
  EXPECT_THROW((void)yaglom_lst(0.5, 0.0), std::invalid_argument);
  EXPECT_THROW(YaglomLaw(1.5), std::invalid_argument);
}

TEST(YaglomLaw, ExponentialCase) {
  const YaglomLaw law(1.0);
  for (double x : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0}) EXPECT_NEAR(law.cdf(x), -std::expm1(-x), 1e-8) << x;
  // Gamma(3, 1) CDF.
  EXPECT_NEAR(law.conv_cdf(3, 2.0), 1.0 - 5.0 * std::exp(-2.0), 1e-8);
}

TEST(YaglomLaw, SmallArgumentAsymptotics) {
  // M(x) ~ x^alpha / (alpha Gamma(1 + alpha)) as x -> 0.
  const double alpha = 0.5;
  const YaglomLaw law(alpha);
  const double x = 1e-6;
  EXPECT_NEAR(law.cdf(x) / (std::pow(x, alpha) / (alpha * std::tgamma(1 + alpha))), 1.0, 1e-2);
}

TEST(YaglomLaw, ConvolutionMatchesGridConvolution) {
  // M^{*3}(x) = int_0^x M^{*2}(x - t) dM(t) by a midpoint Stieltjes sum.
  const YaglomLaw law(0.5);
  const double x = 2.0;
  const int cells = 2000;
  const double h = x / cells;
  std::vector<double> m(cells + 1, 0.0);
  for (int i = 1; i <= cells; ++i) m[i] = law.cdf(i * h);
  double sum = 0.0;
  for (int i = 0; i < cells; ++i) sum += law.conv_cdf(2, x - (i + 0.5) * h) * (m[i + 1] - m[i]);
  EXPECT_NEAR(law.conv_cdf(3, x), sum, 1e-4);
}

TEST(YaglomLaw, CdfIsMonotone) {
  const YaglomLaw law(0.3);
  double previous = 0.0;
  for (double x = 0.05; x < 20.0; x *= 1.3) {
    const auto values = law.conv_cdfs(4, x);
    EXPECT_GE(values[0], previous);
    for (int j = 1; j < 4; ++j) EXPECT_LE(values[j], values[j - 1] + 1e-9);
    previous = values[0];
  }
}

TEST(YaglomLaw, BackendsAgree) {
  const YaglomLaw law(0.8);
  for (double x : {0.1, 1.0, 5.0}) {
    const auto t = law.conv_cdfs_with(laplace::Method::talbot, 5, x);
    const auto e = law.conv_cdfs_with(laplace::Method::euler, 5, x);
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(t[j], e[j], 1e-8);
  }
}

TEST(YaglomLaw, ForcedInversionError) {
  const YaglomLaw law(0.5, laplace::InversionConfig{4, 2, 1e-12});
  EXPECT_THROW((void)law.cdf(1.0), laplace::InversionError);
  try {
    (void)law.cdf(1.0);
  } catch (const laplace::InversionError& e) {
    EXPECT_NE(e.talbot(), e.euler());
  }
}

TEST(SeriesIdentities, ClosedFormAndCoefficients) {
  EXPECT_NEAR(series_coefficient(0.5, 1), 0.5 * std::tgamma(1.5), 1e-15);
  EXPECT_NEAR(series_coefficient(0.5, 4), 0.5 * std::tgamma(4.5) / 24.0, 1e-14);
  for (double alpha : {0.1, 0.5, 0.9}) {
    for (double t : {0.0, 0.3, 0.9}) EXPECT_LT(term2_residual(alpha, t), 1e-10) << alpha << " " << t;
  }
  EXPECT_THROW((void)term2_closed_form(0.5, 1.0), std::invalid_argument);
}

TEST(SeriesIdentities, RenewalMeasure) {
  for (double alpha : {0.3, 0.5, 0.8}) {
    const YaglomLaw law(alpha);
    for (double x : {0.5, 1.0, 2.0}) {
      const SeriesValue u = renewal_measure(law, x);
      EXPECT_NEAR(u.value, std::pow(x, alpha), 1e-4) << alpha << " " << x;
      EXPECT_LT(u.tail_bound, 1e-6);
    }
  }
}

TEST(Regimes, ClosedForms) {
  EXPECT_NEAR(regime1_transform(0.5, 1.0), std::pow(2.0, -3.0), 1e-15);
  EXPECT_NEAR(regime3_transform(0.5, 3.0), std::pow(4.0, -1.5), 1e-15);
  EXPECT_DOUBLE_EQ(regime5_transform(0.5, 0.0), 1.0);
  for (double lambda : {0.25, 1.0, 4.0}) {
    EXPECT_NEAR(regime2_transform(0.5, 0.0, lambda), regime1_transform(0.5, lambda), 1e-12);
  }
  // Tends to 1 as theta -> 1.
  EXPECT_NEAR(regime2_transform(0.5, 0.999999, 1.0), 1.0, 1e-2);
}

TEST(Regimes, Regime5MatchesQuadrature) {
  for (double alpha : {0.3, 0.5, 1.0}) {
    for (double lambda : {0.5, 1.0, 2.0}) {
      // alpha int_0^1 x^{alpha-1} e^{-lambda x} dx with x = s^{1/alpha}.
      const double q = simpson([&](double s) { return std::exp(-lambda * std::pow(s, 1.0 / alpha)); }, 0.0, 1.0, 2000);
      EXPECT_NEAR(regime5_transform(alpha, lambda), q, 1e-10) << alpha << " " << lambda;
    }
  }
}

TEST(Regimes, Regime4ExponentialClosedForm) {
  const YaglomLaw law(1.0);
  for (double y : {0.5, 1.0, 2.0}) {
    for (double lambda : {0.5, 1.0, 2.0}) {
      const double a = 1.0 / (1.0 + lambda);
      const double expected = y * a * a / (1.0 - a) * -std::expm1(-(1.0 - a) / y);
      const SeriesValue v = regime4_transform(law, y, lambda, 1e-9);
      EXPECT_NEAR(v.value, expected, 1e-7) << y << " " << lambda;
    }
  }
}

TEST(Regimes, Regime4ApproachesRegime3) {
  const YaglomLaw law(0.5);
  EXPECT_NEAR(regime4_transform(law, 1000.0, 1.0).value, regime3_transform(0.5, 1.0), 2e-3);
}

TEST(Regimes, TransformsAreDecreasingAndConvex) {
  const YaglomLaw law(0.5);
  for (int id = 1; id <= 5; ++id) {
    RegimeSpec spec;
    spec.id = id;
    std::vector<double> values;
    for (double lambda = 0.0; lambda <= 4.0; lambda += 0.5) values.push_back(regime_transform(spec, law, lambda));
    EXPECT_NEAR(values[0], 1.0, 1e-6) << id;
    for (std::size_t i = 1; i < values.size(); ++i) EXPECT_LT(values[i], values[i - 1]) << id;
    for (std::size_t i = 2; i < values.size(); ++i) {
      EXPECT_GE(values[i] - 2 * values[i - 1] + values[i - 2], -1e-7) << id;
    }
  }
}

TEST(Reduced, PmfSumsToOne) {
  // sum_j alpha Gamma(j+alpha)/j! y M^{*j}(y^{-1/alpha}) = y U(y^{-1/alpha}) = 1.
  const YaglomLaw law(0.5);
  for (double y : {0.5, 1.0, 2.0}) {
    const auto pmf = reduced_limit_pmfs(law, y, 10);
    const double head = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    const double bound = reduced_limit_tail_bound(law, y, 10);
    EXPECT_LE(head, 1.0 + 1e-8) << y;
    EXPECT_GE(head + bound, 1.0 - 1e-8) << y;
    for (double p : pmf) EXPECT_GE(p, 0.0);
    EXPECT_NEAR(reduced_limit_pmf(law, y, 3), pmf[2], 1e-15);
  }
}

TEST(Reduced, MrcaCdf) {
  const YaglomLaw law(0.5);
  double previous = 0.0;
  for (double y : {0.1, 0.5, 1.0, 2.0, 10.0, 1e4}) {
    const double value = mrca_limit_cdf(law, y);
    EXPECT_GT(value, previous) << y;
    EXPECT_LE(value, 1.0);
    previous = value;
  }
  EXPECT_NEAR(previous, 1.0, 1e-2);
  const double y = 2.0;
  EXPECT_NEAR(mrca_limit_cdf(law, y), 0.5 * std::tgamma(1.5) * y * law.cdf(std::pow(y, -2.0)), 1e-15);
}

TEST(SmallDeviation, TwoFormsConverge) {
  const ExtinctionTable table(OffspringLaw::stable(0.5), 1000000);
  double previous_gap = 1e9;
  for (std::size_t n : {100u, 10000u, 1000000u}) {
    const std::size_t phi = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    const double gap = std::abs(small_deviation_prob_tform(table, n, phi) / small_deviation_prob(table, n, phi) - 1.0);
    EXPECT_LT(gap, previous_gap) << n;
    previous_gap = gap;
  }
  EXPECT_LT(previous_gap, 0.05);
  EXPECT_THROW((void)small_deviation_prob(table, 10, 10), std::out_of_range);
}

TEST(SmallDeviation, FiniteVariance) {
  EXPECT_DOUBLE_EQ(finite_variance_small_deviation(2.0, 20, 10.0), 4.0 * 10.0 / (4.0 * 400.0));
  EXPECT_THROW((void)finite_variance_small_deviation(0.0, 20, 1.0), std::invalid_argument);
}
