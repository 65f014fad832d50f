#include "critgw/extinction.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace critgw;

TEST(Extinction, FirstStepsByHand) {
  const double c = 2.0 / 3.0;
  const ExtinctionTable table(OffspringLaw::stable(0.5, c), 3);
  const double u1 = 1.0 - c;
  const double u2 = u1 - c * std::pow(u1, 1.5);
  const double u3 = u2 - c * std::pow(u2, 1.5);
  EXPECT_DOUBLE_EQ(table.survival(0), 1.0);
  EXPECT_NEAR(table.survival(1), u1, 1e-16);
  EXPECT_NEAR(table.survival(2), u2, 1e-16);
  EXPECT_NEAR(table.survival(3), u3, 1e-15);
  EXPECT_NEAR(table.delta(2), u2 / (0.5 * 2), 1e-16);
  EXPECT_THROW((void)table.delta(0), std::out_of_range);
  EXPECT_THROW((void)table.survival(4), std::out_of_range);
}

TEST(Extinction, GeometricIsExact) {
  const std::size_t n_max = 100000;
  const ExtinctionTable table(OffspringLaw::geometric(), n_max);
  double worst = 0.0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double exact = 1.0 / static_cast<double>(n + 1);
    worst = std::max(worst, std::abs(table.survival(n) - exact) / exact);
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(Extinction, StableAsymptotics) {
  // u_n ~ (alpha c n)^{-1/alpha}.
  for (double alpha : {0.3, 0.5, 0.8}) {
    const double c = 1.0 / (1.0 + alpha);
    const std::size_t n = 1000000;
    const ExtinctionTable table(OffspringLaw::stable(alpha, c), n);
    const double scaled = static_cast<double>(n) * alpha * c * std::pow(table.survival(n), alpha);
    EXPECT_NEAR(scaled, 1.0, 0.01) << alpha;
  }
}

TEST(Extinction, Monotone) {
  const ExtinctionTable table(OffspringLaw::stable(0.5), 5000);
  const auto u = table.values();
  for (std::size_t k = 1; k < u.size(); ++k) EXPECT_LT(u[k], u[k - 1]) << k;
}

TEST(Extinction, Threshold) {
  const ExtinctionTable table(OffspringLaw::geometric(), 50);
  EXPECT_DOUBLE_EQ(table.threshold(20), 21.0);
  const ExtinctionTable stable(OffspringLaw::stable(0.5), 400);
  EXPECT_DOUBLE_EQ(stable.threshold(20), 1.0 / stable.survival(20));
}

TEST(Extinction, FindR) {
  const ExtinctionTable table(OffspringLaw::stable(0.5), 2000);
  for (std::size_t l : {5u, 20u, 100u}) EXPECT_EQ(table.find_r(l, 1.0), l - 1);
  for (std::size_t l : {5u, 20u, 100u}) {
    for (double rho : {0.5, 2.0, 3.7}) {
      const std::size_t r = table.find_r(l, rho);
      const double target = 1.0 - std::pow(1.0 - table.survival(l), rho);
      EXPECT_LE(table.survival(r + 1), target) << l << " " << rho;
      EXPECT_LT(target, table.survival(r)) << l << " " << rho;
    }
  }
  EXPECT_THROW((void)table.find_r(10, 0.0), std::invalid_argument);
  EXPECT_THROW((void)table.find_r(1000, 1e-6), std::out_of_range);
}

TEST(Extinction, GuardsUnderflow) {
  EXPECT_THROW(ExtinctionTable(OffspringLaw::stable(0.01), 300000), std::range_error);
  EXPECT_THROW(ExtinctionTable(OffspringLaw::unit(), 0), std::invalid_argument);
}

TEST(Extinction, CsvLayout) {
  const ExtinctionTable table(OffspringLaw::geometric(), 3);
  std::ostringstream out;
  table.write_csv(out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "k,u_k,delta_k");
  std::getline(in, line);
  EXPECT_EQ(line, "0,1,");
  std::getline(in, line);
  EXPECT_EQ(line, "1,0.5,0.5");
}
