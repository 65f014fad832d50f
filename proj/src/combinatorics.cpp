#include "critgw/combinatorics.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace critgw {

namespace {

void check_range(int J, int k) {
  if (k < 1 || k > J || J > kMaxStirlingOrder) {
    throw std::out_of_range("Stirling/Bell index out of range: need 1 <= k <= J <= 30, got J=" + std::to_string(J) +
                            ", k=" + std::to_string(k));
  }
}

BigInt binomial(int n, int k) {
  BigInt b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

}  // namespace

BigInt stirling2(int J, int k) {
  check_range(J, k);
  BigInt sum = 0;
  for (int r = 1; r <= k; ++r) {
    BigInt term = binomial(k, r) * boost::multiprecision::pow(BigInt(r), static_cast<unsigned>(J));
    if ((k - r) % 2 == 0) {
      sum += term;
    } else {
      sum -= term;
    }
  }
  BigInt factorial = 1;
  for (int i = 2; i <= k; ++i) factorial *= i;
  if (sum % factorial != 0) throw std::logic_error("stirling2: alternating sum not divisible by k!");
  return sum / factorial;
}

BigInt bell_at_ones(int J, int k) {
  check_range(J, k);
  // table[n][j] = B_{n,j}(1,...,1)
  std::vector<std::vector<BigInt>> table(J + 1, std::vector<BigInt>(k + 1, 0));
  table[0][0] = 1;
  for (int j = 1; j <= k; ++j) {
    for (int n = j; n <= J; ++n) {
      BigInt sum = 0;
      for (int i = 1; i <= n - j + 1; ++i) sum += binomial(n - 1, i - 1) * table[n - i][j - 1];
      table[n][j] = sum;
    }
  }
  return table[J][k];
}

BigInt falling_factorial(long long x, int k) {
  BigInt p = 1;
  for (int i = 0; i < k; ++i) p *= (x - i);
  return p;
}

}  // namespace critgw
