#pragma once

#include <cmath>
#include <numbers>

namespace curebo::normal {

inline double pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// erfc keeps full relative accuracy in the lower tail, unlike 0.5 * (1 + erf).
inline double cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace curebo::normal
