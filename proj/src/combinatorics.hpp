#pragma once

#include <cstdint>

namespace refnet {

// 20! is the largest factorial that fits in 64 bits.
inline constexpr int kMaxDegree = 20;

constexpr std::uint64_t ExactBinomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

constexpr double Binomial(int n, int k) { return static_cast<double>(ExactBinomial(n, k)); }

constexpr double Factorial(int n) {
  std::uint64_t r = 1;
  for (int i = 2; i <= n; ++i) r *= static_cast<std::uint64_t>(i);
  return static_cast<double>(r);
}

}  // namespace refnet
