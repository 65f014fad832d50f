#include "critgw/laplace.hpp"

#include <cmath>
#include <numbers>

namespace critgw::laplace {

std::string to_string(Method method) { return method == Method::talbot ? "talbot" : "euler"; }

Rule talbot_rule(double t, int terms) {
  if (!(t > 0.0) || terms < 2) throw std::invalid_argument("talbot_rule: need t > 0 and at least 2 terms");
  const long double pi = std::numbers::pi_v<long double>;
  const long double M = terms;
  const long double scale = 2.0L / (5.0L * t);
  Rule rule;
  rule.nodes.reserve(terms);
  rule.weights.reserve(terms);
  const long double beta0 = 2.0L * M / 5.0L;
  rule.nodes.emplace_back(beta0 / t, 0.0L);
  rule.weights.emplace_back(scale * 0.5L * std::exp(beta0), 0.0L);
  for (int k = 1; k < terms; ++k) {
    const long double theta = k * pi / M;
    const long double cot = std::cos(theta) / std::sin(theta);
    const Complex beta(2.0L * k * pi / 5.0L * cot, 2.0L * k * pi / 5.0L);
    const Complex eta = Complex(1.0L, theta * (1.0L + cot * cot) - cot) * std::exp(beta);
    rule.nodes.push_back(beta / static_cast<long double>(t));
    rule.weights.push_back(scale * eta);
  }
  return rule;
}

Rule euler_rule(double t, int terms) {
  if (!(t > 0.0) || terms < 1) throw std::invalid_argument("euler_rule: need t > 0 and at least 1 term");
  const long double pi = std::numbers::pi_v<long double>;
  const int M = terms;
  // xi_k: 1/2, then ones, then binomial tail averages.
  std::vector<long double> xi(2 * M + 1, 1.0L);
  xi[0] = 0.5L;
  const long double two_pow = std::pow(2.0L, -static_cast<long double>(M));
  xi[2 * M] = two_pow;
  long double binom = 1.0L;  // C(M, k)
  for (int k = 1; k < M; ++k) {
    binom = binom * (M - k + 1) / k;
    xi[2 * M - k] = xi[2 * M - k + 1] + two_pow * binom;
  }
  const long double a = M * std::log(10.0L) / 3.0L;
  const long double gain = std::pow(10.0L, M / 3.0L) / t;
  Rule rule;
  for (int k = 0; k <= 2 * M; ++k) {
    const Complex beta(a, k * pi);
    const long double sign = (k % 2 == 0) ? 1.0L : -1.0L;
    rule.nodes.push_back(beta / static_cast<long double>(t));
    rule.weights.emplace_back(gain * sign * xi[k], 0.0L);
  }
  return rule;
}

Rule make_rule(Method method, double t, int terms) {
  return method == Method::talbot ? talbot_rule(t, terms) : euler_rule(t, terms);
}

}  // namespace critgw::laplace
