#include "critgw/extinction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace critgw {

namespace {
constexpr double kUnderflowFloor = 1e-300;
}

ExtinctionTable::ExtinctionTable(OffspringLaw law, std::size_t n_max) : law_(std::move(law)) {
  if (n_max < 1) throw std::invalid_argument("extinction table: n_max must be at least 1");
  u_.resize(n_max + 1);
  long double u = 1.0L;
  u_[0] = 1.0;
  for (std::size_t k = 1; k <= n_max; ++k) {
    u = law_.survival_step(u);
    if (!(u >= kUnderflowFloor)) {
      throw std::range_error("extinction table: u_n underflows below 1e-300 at n = " + std::to_string(k) +
                             "; the largest safe n_max is " + std::to_string(k - 1));
    }
    u_[k] = static_cast<double>(u);
  }
}

void ExtinctionTable::check_index(std::size_t n, const char* what) const {
  if (n > n_max()) {
    throw std::out_of_range(std::string(what) + ": index " + std::to_string(n) + " exceeds table n_max " +
                            std::to_string(n_max()));
  }
}

double ExtinctionTable::survival(std::size_t n) const {
  check_index(n, "survival");
  return u_[n];
}

double ExtinctionTable::delta(std::size_t n) const {
  check_index(n, "delta");
  if (n == 0) throw std::out_of_range("delta: defined for n >= 1");
  return u_[n] / (law_.alpha() * static_cast<double>(n));
}

double ExtinctionTable::threshold(std::size_t phi) const {
  check_index(phi, "threshold");
  return 1.0 / u_[phi];
}

std::size_t ExtinctionTable::find_r(std::size_t l, double rho) const {
  check_index(l, "find_r");
  if (!(rho > 0.0)) throw std::invalid_argument("find_r: rho must be positive");
  // Target 1 - (1 - u_l)^rho; rho == 1 is kept exact so that r = l - 1.
  const long double ul = u_[l];
  const double target =
      rho == 1.0 ? u_[l] : static_cast<double>(-std::expm1(static_cast<long double>(rho) * std::log1p(-ul)));
  if (!(target < u_[0]) || !(target >= u_.back())) {
    throw std::out_of_range("find_r: target " + std::to_string(target) + " lies outside the table range (l = " +
                            std::to_string(l) + ", rho = " + std::to_string(rho) + ")");
  }
  // First index i with u_i <= target; u is nonincreasing.
  const auto it = std::partition_point(u_.begin(), u_.end(), [target](double v) { return v > target; });
  if (it == u_.end()) throw std::out_of_range("find_r: target below table range");
  return static_cast<std::size_t>(it - u_.begin()) - 1;
}

void ExtinctionTable::write_csv(std::ostream& out) const {
  out << "k,u_k,delta_k\n";
  char buf[96];
  for (std::size_t k = 0; k < u_.size(); ++k) {
    if (k == 0) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,\n", k, u_[k]);
    } else {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", k, u_[k], delta(k));
    }
    out << buf;
  }
}

}  // namespace critgw
