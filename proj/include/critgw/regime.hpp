#pragma once

#include <cstddef>
#include <string>

namespace critgw {

/// Which survival probability rescales Z(m) in a regime's Laplace transform.
enum class Scaling { u_m, u_psi, u_n_minus_m, u_phi };

std::string to_string(Scaling scaling);

/// ceil(n^a), robust to pow() landing an ulp above an integer.
std::size_t ceil_power(std::size_t n, double a);

/// One of the five observation regimes for Z(m) given the small-deviation
/// event at horizon n. Scale functions are phi(n) = ceil(n^a_phi),
/// psi(n) = ceil(n^a_psi), chi(n) = ceil(n^a_chi) (or 0 when chi_zero).
///
///   1: m = ceil(n^a_m)           scaled by u_m      (m -> inf, m = o(n))
///   2: m = floor(theta n)        scaled by u_m
///   3: m = n - psi(n)            scaled by u_psi
///   4: m = n - ceil(y phi(n))    scaled by u_{n-m}
///   5: m = n - chi(n)            scaled by u_phi
struct RegimeSpec {
  int id = 1;
  double theta = 0.5;
  double y = 1.0;
  double a_phi = 0.5;
  double a_psi = 0.75;
  double a_chi = 0.25;
  bool chi_zero = false;
  double a_m = 0.5;

  bool operator==(const RegimeSpec&) const = default;

  /// Throws std::invalid_argument when the ordering constraints fail.
  void validate() const;

  std::size_t phi(std::size_t n) const;
  std::size_t psi(std::size_t n) const;
  std::size_t chi(std::size_t n) const;
  /// Observation generation; throws if it falls outside [0, n].
  std::size_t m(std::size_t n) const;
  Scaling scaling() const;
  /// Index k such that the rescaling factor is u_k.
  std::size_t scaling_index(std::size_t n) const;
};

}  // namespace critgw
