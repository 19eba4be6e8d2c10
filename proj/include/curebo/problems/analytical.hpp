#pragma once

#include <array>
#include <cstddef>
#include <limits>

#include "curebo/error.hpp"

namespace curebo::problems {

/// Quadratic surface c0 t^2 + c1 t T + c2 t + c3 T^2 + c4 T + c5.
struct Quadratic2 {
  std::array<double, 6> c{};

  [[nodiscard]] double operator()(double t, double T) const {
    return (c[0] * t + c[1] * T + c[2]) * t + (c[3] * T + c[4]) * T + c[5];
  }
};

/// Closed-form deformation/degree-of-cure validation problem on the unit
/// square (inputs are normalized time and temperature).
struct AnalyticalPidProblem {
  Quadratic2 u{{-0.1272, -0.1698, 0.2914, 0.2329, -0.0841, 1.8646}};
  Quadratic2 doc{{-0.0458, 0.0801, -0.0265, -0.0376, 0.0329, 0.9902}};
  double threshold = 0.995;

  // physical ranges the unit square was normalized from
  static constexpr double t_min = 1.0, t_max = 108.0;
  static constexpr double T_min = 120.0, T_max = 177.0;
};

struct AnalyticalValue {
  double u = 0.0;
  double doc = 0.0;
};

inline AnalyticalValue eval_analytical(const AnalyticalPidProblem& p, double t, double T) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("analytical problem: t outside [0,1]");
  if (!(T >= 0.0 && T <= 1.0)) throw DomainError("analytical problem: T outside [0,1]");
  return {p.u(t, T), p.doc(t, T)};
}

inline AnalyticalValue eval_analytical(double t, double T) { return eval_analytical(AnalyticalPidProblem{}, t, T); }

struct GridOptimum {
  double u = std::numeric_limits<double>::infinity();
  double t = 0.0;
  double T = 0.0;
  double doc = 0.0;
  std::size_t feasible_nodes = 0;
  bool found = false;
};

/// Brute-force feasible minimum over an n x n grid of the unit square.
inline GridOptimum grid_oracle(const AnalyticalPidProblem& p, std::size_t n = 2001) {
  if (n < 2) throw DomainError("grid oracle needs at least 2 nodes per axis");
  GridOptimum best;
  const double h = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * h;
    for (std::size_t j = 0; j < n; ++j) {
      const double T = static_cast<double>(j) * h;
      const double g = p.doc(t, T);
      if (g < p.threshold) continue;
      ++best.feasible_nodes;
      const double u = p.u(t, T);
      if (u < best.u) best = {u, t, T, g, best.feasible_nodes, true};
    }
  }
  return best;
}

}  // namespace curebo::problems
