#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "critgw/offspring.hpp"

namespace critgw {

/// Survival probabilities u_k = 1 - f_k(0) = P(Z(k) > 0 | Z(0) = 1) for
/// k = 0..n_max, iterated in the survival variable so that no precision is
/// lost to 1 - f_k(0) cancellation. The recursion runs in extended precision
/// and the stored values are binary64.
class ExtinctionTable {
 public:
  ExtinctionTable(OffspringLaw law, std::size_t n_max);

  const OffspringLaw& law() const { return law_; }
  std::size_t n_max() const { return u_.size() - 1; }
  std::span<const double> values() const { return u_; }

  /// u_n.
  double survival(std::size_t n) const;
  /// Delta(n) = u_n / (alpha n), n >= 1.
  double delta(std::size_t n) const;
  /// T = 1 / u_phi.
  double threshold(std::size_t phi) const;

  /// The unique r with u_{r+1} <= 1 - (1 - u_l)^rho < u_r.
  std::size_t find_r(std::size_t l, double rho) const;

  /// CSV with header `k,u_k,delta_k`; delta_0 is left empty.
  void write_csv(std::ostream& out) const;

 private:
  void check_index(std::size_t n, const char* what) const;

  OffspringLaw law_;
  std::vector<double> u_;
};

}  // namespace critgw
