#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Monte-Carlo estimate of E[max(0, y_min - Y)], Y ~ N(mean, s^2).
/// When the mean sits above y_min the draws come from N(y_min, s^2) and are
/// reweighted by the density ratio, so far-tail cases still see improving draws.
inline McEstimate mc_improvement(double mean, double s, double y_min, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const double centre = std::min(mean, y_min);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double y = centre + s * z(gen);
    const double w = centre == mean ? 1.0 : std::exp(((y - y_min) * (y - y_min) - (y - mean) * (y - mean)) / (2.0 * s * s));
    const double imp = w * std::max(0.0, y_min - y);
    sum += imp;
    sum2 += imp * imp;
  }
  const double n = static_cast<double>(draws);
  const double m = sum / n;
  const double var = std::max(0.0, sum2 / n - m * m);
  return {m, std::sqrt(var / (n - 1.0))};
}

/// Two-branch autocatalytic rate with Arrhenius factors, written out from
/// the kinetic law for 3501-6 epoxy (literature constants), floored at zero.
struct Kinetics {
  double A1 = 2.101e9, A2 = -2.014e9, A3 = 1.960e5;
  double E1 = 8.07e4, E2 = 7.78e4, E3 = 5.66e4;
  double alpha_crit = 0.47;
  double R = 8.314;

  [[nodiscard]] double rate(double a, double T_celsius) const {
    const double T = T_celsius + 273.15;
    double r;
    if (a <= 0.3) {
      const double b1 = A1 * std::exp(-E1 / (R * T));
      const double b2 = A2 * std::exp(-E2 / (R * T));
      r = (b1 + a * b2) * (1.0 - a) * (alpha_crit - a);
    } else {
      r = A3 * std::exp(-E3 / (R * T)) * (1.0 - a);
    }
    return std::max(0.0, r);
  }
};

/// Adaptive Dormand-Prince 5(4) integration of y' = f(t, y) from t0 to t1.
inline double dopri5(const std::function<double(double, double)>& f, double t0, double t1, double y0,
                     double rtol = 1e-11, double atol = 1e-13) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  double t = t0, y = y0, h = std::min(0.01, t1 - t0);
  while (t < t1) {
    h = std::min(h, t1 - t);
    const double k1 = f(t, y);
    const double k2 = f(t + c2 * h, y + h * a21 * k1);
    const double k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const double k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double yn = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double k7 = f(t + h, yn);
    const double err = std::abs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
    const double tol = atol + rtol * std::max(std::abs(y), std::abs(yn));
    if (err <= tol) {
      t += h;
      y = yn;
    }
    const double scale = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
    h *= std::clamp(scale, 0.2, 5.0);
    h = std::max(h, 1e-12);
  }
  return y;
}

/// Piecewise-linear schedule given as (time, temperature) vertices.
struct Schedule {
  std::vector<std::pair<double, double>> v;

  [[nodiscard]] double at(double t) const {
    if (t <= v.front().first) return v.front().second;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (t <= v[i].first) {
        const auto [ta, Ta] = v[i - 1];
        const auto [tb, Tb] = v[i];
        return Ta + (Tb - Ta) * (t - ta) / (tb - ta);
      }
    }
    return v.back().second;
  }
};

/// Degree of cure at time t under a schedule, integrating segment by
/// segment so every kink is a step boundary.
inline double cure_at(const Schedule& s, const Kinetics& k, double t_end, double a0 = 0.0) {
  auto f = [&](double t, double a) { return k.rate(a, s.at(t)); };
  double a = a0;
  double t = 0.0;
  for (std::size_t i = 1; i < s.v.size() && t < t_end; ++i) {
    const double tb = std::min(s.v[i].first, t_end);
    if (tb > t) a = dopri5(f, t, tb, a);
    t = tb;
  }
  if (t < t_end) a = dopri5(f, t, t_end, a);
  return a;
}

/// Direct (non-Horner) evaluation of a full bivariate quadratic with the
/// coefficient order t^2, tT, t, T^2, T, 1.
inline double quad_naive(const std::array<double, 6>& c, double t, double T) {
  return c[0] * std::pow(t, 2) + c[1] * t * T + c[2] * t + c[3] * std::pow(T, 2) + c[4] * T + c[5];
}

}  // namespace oracle
