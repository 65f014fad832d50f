#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace critgw {

using BigInt = boost::multiprecision::cpp_int;

/// Largest J accepted by stirling2 / bell_at_ones.
inline constexpr int kMaxStirlingOrder = 30;

/// Stirling number of the second kind by the explicit alternating sum
/// S(J,k) = (1/k!) sum_r (-1)^{k-r} C(k,r) r^J. Requires 1 <= k <= J <= 30.
BigInt stirling2(int J, int k);

/// Partial Bell polynomial B_{J,k}(1, 1, ..., 1) from the triangular
/// recurrence B_{n,k} = sum_i C(n-1, i-1) B_{n-i,k-1}.
BigInt bell_at_ones(int J, int k);

/// Falling factorial x (x-1) ... (x-k+1).
BigInt falling_factorial(long long x, int k);

}  // namespace critgw
