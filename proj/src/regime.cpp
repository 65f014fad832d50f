#include "critgw/regime.hpp"

#include <cmath>
#include <stdexcept>

namespace critgw {

std::string to_string(Scaling scaling) {
  switch (scaling) {
    case Scaling::u_m: return "u_m";
    case Scaling::u_psi: return "u_psi";
    case Scaling::u_n_minus_m: return "u_n_minus_m";
    case Scaling::u_phi: return "u_phi";
  }
  return "?";
}

std::size_t ceil_power(std::size_t n, double a) {
  const double x = std::pow(static_cast<double>(n), a);
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, x)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(x));
}

void RegimeSpec::validate() const {
  if (id < 1 || id > 5) throw std::invalid_argument("regime id must be 1..5");
  if (!(a_phi > 0.0 && a_phi < 1.0)) throw std::invalid_argument("regime: a_phi must lie in (0, 1)");
  switch (id) {
    case 1:
      if (!(a_m > 0.0 && a_m < 1.0)) throw std::invalid_argument("regime 1: a_m must lie in (0, 1)");
      break;
    case 2:
      if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("regime 2: theta must lie in (0, 1)");
      break;
    case 3:
      if (!(a_phi < a_psi && a_psi < 1.0)) throw std::invalid_argument("regime 3: need a_phi < a_psi < 1");
      break;
    case 4:
      if (!(y > 0.0) || !std::isfinite(y)) throw std::invalid_argument("regime 4: y must be positive");
      break;
    case 5:
      if (!chi_zero && !(a_chi >= 0.0 && a_chi < a_phi)) {
        throw std::invalid_argument("regime 5: need 0 <= a_chi < a_phi");
      }
      break;
  }
}

std::size_t RegimeSpec::phi(std::size_t n) const { return ceil_power(n, a_phi); }
std::size_t RegimeSpec::psi(std::size_t n) const { return ceil_power(n, a_psi); }
std::size_t RegimeSpec::chi(std::size_t n) const { return chi_zero ? 0 : ceil_power(n, a_chi); }

std::size_t RegimeSpec::m(std::size_t n) const {
  std::size_t back = 0;
  switch (id) {
    case 1: {
      const std::size_t m = ceil_power(n, a_m);
      if (m > n) throw std::invalid_argument("regime 1: m exceeds n");
      return m;
    }
    case 2: return static_cast<std::size_t>(std::floor(theta * static_cast<double>(n)));
    case 3: back = psi(n); break;
    case 4: back = static_cast<std::size_t>(std::ceil(y * static_cast<double>(phi(n)))); break;
    case 5: back = chi(n); break;
    default: throw std::invalid_argument("regime id must be 1..5");
  }
  if (back > n) throw std::invalid_argument("regime " + std::to_string(id) + ": observation point precedes 0");
  return n - back;
}

Scaling RegimeSpec::scaling() const {
  switch (id) {
    case 1:
    case 2: return Scaling::u_m;
    case 3: return Scaling::u_psi;
    case 4: return Scaling::u_n_minus_m;
    default: return Scaling::u_phi;
  }
}

std::size_t RegimeSpec::scaling_index(std::size_t n) const {
  switch (scaling()) {
    case Scaling::u_m: return m(n);
    case Scaling::u_psi: return psi(n);
    case Scaling::u_n_minus_m: return n - m(n);
    case Scaling::u_phi: return phi(n);
  }
  return 0;
}

}  // namespace critgw
