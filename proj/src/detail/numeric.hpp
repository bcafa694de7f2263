#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace metroscope::detail {

/// Neumaier-compensated accumulator; error stays O(eps * sum |x|)
/// independent of the term count, and the result is a pure function of the
/// addition order.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double value) {
    const double t = sum + value;
    if (std::abs(sum) >= std::abs(value)) {
      comp += (sum - t) + value;
    } else {
      comp += (value - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

struct KahanComplex {
  KahanSum re;
  KahanSum im;

  void add(std::complex<double> value) {
    re.add(value.real());
    im.add(value.imag());
  }

  std::complex<double> value() const { return {re.value(), im.value()}; }
};

/// ln(n!) via a precomputed table, Stirling's series beyond it.
inline double log_factorial(std::int64_t n) {
  static constexpr int kTableSize = 4096;
  static const std::array<double, kTableSize> table = [] {
    std::array<double, kTableSize> t{};
    for (int i = 0; i < kTableSize; ++i) t[i] = std::lgamma(double(i) + 1.0);
    return t;
  }();
  if (n < kTableSize) return table[static_cast<std::size_t>(n)];
  const double x = static_cast<double>(n) + 1.0;
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Stirling series for lgamma(x); far below 1 ulp for x > 4096.
  return (x - 0.5) * std::log(x) - x + 0.918938533204672741780329736406 +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

}  // namespace metroscope::detail
