#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace curebo {

struct NelderMeadSettings {
  double initial_step = 0.5;
  std::size_t max_evaluations = 300;
  double f_tolerance = 1e-9;  // spread of simplex values
  double x_tolerance = 1e-7;  // simplex diameter
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
};

/// Box-clamped Nelder-Mead minimizer.
///
/// Trial points are clamped into [lower, upper] coordinate-wise. The result is
/// never worse than the start point. Non-finite objective values are treated
/// as +inf.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> start, const NelderMeadSettings& s = {}) {
  const std::size_t k = start.size();
  std::size_t evals = 0;
  auto clamp = [&](std::vector<double>& x) {
    for (double& v : x) v = std::clamp(v, s.lower, s.upper);
  };
  auto value = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  clamp(start);
  std::vector<std::vector<double>> simplex{start};
  for (std::size_t i = 0; i < k; ++i) {
    auto v = start;
    v[i] += s.initial_step;
    if (v[i] > s.upper) v[i] = start[i] - s.initial_step;
    clamp(v);
    simplex.push_back(std::move(v));
  }
  std::vector<double> fv(k + 1);
  for (std::size_t i = 0; i <= k; ++i) fv[i] = value(simplex[i]);

  std::vector<std::size_t> order(k + 1);
  while (evals < s.max_evaluations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[k - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
      }
    }
    if (std::isfinite(fv[worst]) && fv[worst] - fv[best] <= s.f_tolerance * (1.0 + std::abs(fv[best])) &&
        diameter <= s.x_tolerance) {
      break;
    }
    if (diameter <= s.x_tolerance * 1e-3) break;

    std::vector<double> centroid(k, 0.0);
    for (std::size_t i = 0; i <= k; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < k; ++j) centroid[j] += simplex[i][j] / static_cast<double>(k);
    }
    auto along = [&](double t) {
      std::vector<double> p(k);
      for (std::size_t j = 0; j < k; ++j) p[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
      clamp(p);
      return p;
    };

    auto reflected = along(-1.0);
    const double fr = value(reflected);
    if (fr < fv[best]) {
      auto expanded = along(-2.0);
      const double fe = value(expanded);
      if (fe < fr) {
        simplex[worst] = std::move(expanded);
        fv[worst] = fe;
      } else {
        simplex[worst] = std::move(reflected);
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = std::move(reflected);
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    auto contracted = along(outside ? -0.5 : 0.5);
    const double fc = value(contracted);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = std::move(contracted);
      fv[worst] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t i = 0; i <= k; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < k; ++j) {
        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      }
      fv[i] = value(simplex[i]);
    }
  }

  const auto it = std::min_element(fv.begin(), fv.end());
  NelderMeadResult r;
  r.x = simplex[static_cast<std::size_t>(it - fv.begin())];
  r.value = *it;
  r.evaluations = evals;
  return r;
}

}  // namespace curebo
