#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "curebo/report.hpp"

namespace curebo::study {

struct GridSearchResult {
  std::optional<double> f;
  std::vector<double> raw;
  double g = 0.0;
  std::size_t nodes = 0;
  std::size_t feasible_nodes = 0;
};

/// Exhaustive search over a regular grid with n nodes per dimension.
inline GridSearchResult grid_search(const BlackBox& problem, std::size_t n, double threshold) {
  if (n < 2) throw DomainError("grid search needs at least two nodes per dimension");
  const std::size_t d = problem.space().dims();
  GridSearchResult r;
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  for (;;) {
    for (std::size_t k = 0; k < d; ++k) x[k] = static_cast<double>(idx[k]) / static_cast<double>(n - 1);
    const DesignPoint p(x);
    ++r.nodes;
    if (problem.admissible(p)) {
      const auto o = problem(p);
      if (o.g >= threshold) {
        ++r.feasible_nodes;
        if (!r.f || o.f < *r.f) {
          r.f = o.f;
          r.g = o.g;
          r.raw = problem.space().denormalize(p);
        }
      }
    }
    std::size_t k = 0;
    while (k < d && ++idx[k] == n) idx[k++] = 0;
    if (k == d) break;
  }
  return r;
}

}  // namespace curebo::study
