#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "curebo/design_space.hpp"

namespace testdata {

struct Dataset {
  std::vector<curebo::DesignPoint> x;
  std::vector<double> y;
};

// Smooth random test surface: sum of a few random cosines.
inline Dataset random_dataset(std::mt19937_64& gen, std::size_t n, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> w(3, std::vector<double>(d));
  std::vector<double> phase(3), amp(3);
  for (std::size_t k = 0; k < 3; ++k) {
    for (auto& v : w[k]) v = 4.0 * u(gen) - 2.0;
    phase[k] = 6.0 * u(gen);
    amp[k] = 0.5 + u(gen);
  }
  Dataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> c(d);
    for (auto& v : c) v = u(gen);
    double y = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      double dot = 0.0;
      for (std::size_t h = 0; h < d; ++h) dot += w[k][h] * c[h];
      y += amp[k] * std::cos(dot + phase[k]);
    }
    ds.x.emplace_back(std::move(c));
    ds.y.push_back(y);
  }
  return ds;
}

inline std::vector<curebo::DesignPoint> random_queries(std::mt19937_64& gen, std::size_t m, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<curebo::DesignPoint> q;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> c(d);
    for (auto& v : c) v = u(gen);
    q.emplace_back(std::move(c));
  }
  return q;
}

}  // namespace testdata
