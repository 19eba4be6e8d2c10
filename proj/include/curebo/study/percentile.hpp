#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "curebo/error.hpp"

namespace curebo::study {

/// Percentile with linear interpolation between order statistics at rank
/// r = 1 + p/100 (n - 1).
inline double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw DomainError("percentile of an empty list");
  if (!(p >= 0.0 && p <= 100.0)) throw DomainError("percentile p outside [0,100]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double r = 1.0 + p / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(r));
  const auto hi = static_cast<std::size_t>(std::ceil(r));
  const double frac = r - static_cast<double>(lo);
  if (frac == 0.0 || v[lo - 1] == v[hi - 1]) return v[lo - 1];  // keeps +inf entries well defined
  return v[lo - 1] + frac * (v[hi - 1] - v[lo - 1]);
}

inline double median(std::span<const double> values) { return percentile(values, 50.0); }

}  // namespace curebo::study
