#pragma once

// Exact finite-n laws from truncated power series of iterated pgfs.
//
// For H = {0 < Z(n) <= T}, E[x^{Z(m)} s^{Z(n)}] = f_m(x f_{n-m}(s)) and
// E[x^{Z(m,n)} s^{Z(n)}] = f_m(g0 + x (f_{n-m}(s) - g0)) with g0 = f_{n-m}(0).
// Only the coefficients of s^1..s^T are needed, so every series is truncated
// at degree T and no other truncation enters.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "critgw/offspring.hpp"

namespace critgw::testing {

using Cx = std::complex<long double>;
using Series = std::vector<Cx>;

// b^beta for a series with b[0] off the negative real axis (J.C.P. Miller).
inline Series series_power(const Series& b, long double beta) {
  const std::size_t N = b.size();
  Series h(N);
  h[0] = std::pow(b[0], beta);
  for (std::size_t n = 1; n < N; ++n) {
    Cx sum = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      sum += ((beta + 1.0L) * static_cast<long double>(k) - static_cast<long double>(n)) * b[k] * h[n - k];
    }
    h[n] = sum / (static_cast<long double>(n) * b[0]);
  }
  return h;
}

// f(h) as a series.
inline Series apply_pgf(const OffspringLaw& law, const Series& h) {
  const std::size_t N = h.size();
  Series one_minus(N);
  for (std::size_t i = 0; i < N; ++i) one_minus[i] = (i == 0 ? 1.0L : 0.0L) - h[i];
  switch (law.kind()) {
    case OffspringLaw::Kind::unit:
      return h;
    case OffspringLaw::Kind::geometric: {
      // 1 / (2 - h) = (1 + (1 - h))^{-1}.
      Series two_minus = one_minus;
      two_minus[0] += 1.0L;
      return series_power(two_minus, -1.0L);
    }
    case OffspringLaw::Kind::stable: {
      const long double alpha = law.alpha();
      const long double c = law.slowly_varying_constant();
      const Series p = series_power(one_minus, 1.0L + alpha);
      Series out(N);
      for (std::size_t i = 0; i < N; ++i) out[i] = h[i] + c * p[i];
      return out;
    }
  }
  throw std::logic_error("apply_pgf: unknown law");
}

inline Series iterate_pgf(const OffspringLaw& law, Series h, std::size_t times) {
  for (std::size_t i = 0; i < times; ++i) h = apply_pgf(law, h);
  return h;
}

// Coefficients of f_n(s) up to s^degree.
inline std::vector<double> pgf_coefficients(const OffspringLaw& law, std::size_t n, std::size_t degree) {
  Series s(degree + 1, 0.0L);
  if (degree >= 1) s[1] = 1.0L;
  const Series f = iterate_pgf(law, s, n);
  std::vector<double> out(degree + 1);
  for (std::size_t i = 0; i <= degree; ++i) out[i] = static_cast<double>(f[i].real());
  return out;
}

// E[x^{Z(m)}; 0 < Z(n) <= T] for complex x.
inline Cx joint_population(const OffspringLaw& law, std::size_t n, std::size_t m, std::size_t T, Cx x) {
  Series s(T + 1, 0.0L);
  if (T >= 1) s[1] = 1.0L;
  Series g = iterate_pgf(law, s, n - m);
  for (auto& v : g) v *= x;
  const Series f = iterate_pgf(law, g, m);
  Cx sum = 0;
  for (std::size_t j = 1; j <= T; ++j) sum += f[j];
  return sum;
}

// E[x^{Z(m, n)}; 0 < Z(n) <= T].
inline Cx joint_reduced(const OffspringLaw& law, std::size_t n, std::size_t m, std::size_t T, Cx x) {
  Series s(T + 1, 0.0L);
  if (T >= 1) s[1] = 1.0L;
  Series g = iterate_pgf(law, s, n - m);
  const Cx g0 = g[0];
  for (std::size_t i = 0; i <= T; ++i) g[i] = (i == 0 ? g0 : 0.0L) + x * (g[i] - (i == 0 ? g0 : 0.0L));
  const Series f = iterate_pgf(law, g, m);
  Cx sum = 0;
  for (std::size_t j = 1; j <= T; ++j) sum += f[j];
  return sum;
}

inline double event_probability(const OffspringLaw& law, std::size_t n, std::size_t T) {
  return static_cast<double>(joint_population(law, n, n, T, 1.0L).real());
}

// E[exp(-lambda scale Z(m)) | 0 < Z(n) <= T].
inline double conditional_lst(const OffspringLaw& law, std::size_t n, std::size_t m, std::size_t T, double scale,
                              double lambda) {
  const Cx x = std::exp(-static_cast<long double>(lambda) * scale);
  return static_cast<double>((joint_population(law, n, m, T, x) / joint_population(law, n, m, T, 1.0L)).real());
}

// P(Z(m, n) = j | 0 < Z(n) <= T) for j = 0..T, by a discrete Fourier transform in x.
inline std::vector<double> conditional_reduced_pmf(const OffspringLaw& law, std::size_t n, std::size_t m,
                                                   std::size_t T) {
  const std::size_t N = T + 1;
  const long double norm = joint_reduced(law, n, m, T, 1.0L).real();
  std::vector<Cx> values(N);
  for (std::size_t k = 0; k < N; ++k) {
    values[k] = joint_reduced(law, n, m, T, std::polar(1.0L, 2.0L * std::numbers::pi_v<long double> * k / N));
  }
  std::vector<double> pmf(N);
  for (std::size_t j = 0; j < N; ++j) {
    Cx sum = 0;
    for (std::size_t k = 0; k < N; ++k) {
      sum += values[k] * std::polar(1.0L, -2.0L * std::numbers::pi_v<long double> * k * j / N);
    }
    pmf[j] = static_cast<double>(sum.real() / (N * norm));
  }
  return pmf;
}

}  // namespace critgw::testing
