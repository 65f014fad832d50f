#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace critgw::laplace {

using Complex = std::complex<long double>;

enum class Method { talbot, euler };

std::string to_string(Method method);

/// Quadrature rule for the Bromwich integral at a fixed time t:
///   f(t) ~= sum_k Re(weights[k] * F(nodes[k])).
struct Rule {
  std::vector<Complex> nodes;
  std::vector<Complex> weights;
};

/// Fixed Talbot contour (Abate & Valko) with `terms` nodes.
Rule talbot_rule(double t, int terms);
/// Fourier series with Euler summation (Abate & Whitt) using 2*terms+1 nodes.
Rule euler_rule(double t, int terms);
Rule make_rule(Method method, double t, int terms);

template <class Transform>
long double apply(const Rule& rule, Transform&& transform) {
  long double sum = 0.0L;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += std::real(rule.weights[k] * transform(rule.nodes[k]));
  return sum;
}

struct InversionConfig {
  int talbot_terms = 24;
  int euler_terms = 18;
  /// Maximum allowed disagreement between the two backends.
  double agreement_tol = 1e-6;
};

/// Raised when the two inversion backends disagree beyond tolerance.
class InversionError : public std::runtime_error {
 public:
  InversionError(const std::string& what, double talbot, double euler)
      : std::runtime_error(what), talbot_(talbot), euler_(euler) {}
  double talbot() const { return talbot_; }
  double euler() const { return euler_; }

 private:
  double talbot_;
  double euler_;
};

}  // namespace critgw::laplace
