#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "curebo/error.hpp"

namespace curebo::problems {

/// Raised when control points do not assemble into a valid schedule.
class InfeasibleCycleError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct CycleVertex {
  double time = 0.0;         // min
  double temperature = 0.0;  // deg C
};

/// Piecewise-linear time/temperature schedule.
class CureCycle {
 public:
  explicit CureCycle(std::vector<CycleVertex> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 2) throw InfeasibleCycleError("cure cycle needs at least two vertices");
    if (vertices_.front().time != 0.0) throw InfeasibleCycleError("cure cycle must start at t = 0");
    for (std::size_t i = 1; i < vertices_.size(); ++i) {
      if (!(vertices_[i].time > vertices_[i - 1].time)) {
        throw InfeasibleCycleError("cure cycle vertex times must be strictly increasing (vertex " +
                                   std::to_string(i) + ")");
      }
    }
  }

  [[nodiscard]] const std::vector<CycleVertex>& vertices() const noexcept { return vertices_; }
  [[nodiscard]] double end_time() const noexcept { return vertices_.back().time; }
  [[nodiscard]] std::size_t segments() const noexcept { return vertices_.size() - 1; }

  /// Temperature by linear interpolation; held constant outside [0, t_end].
  [[nodiscard]] double temperature(double t) const {
    if (t <= 0.0) return vertices_.front().temperature;
    if (t >= end_time()) return vertices_.back().temperature;
    const auto it = std::upper_bound(vertices_.begin(), vertices_.end(), t,
                                     [](double v, const CycleVertex& p) { return v < p.time; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    return a.temperature + (b.temperature - a.temperature) * (t - a.time) / (b.time - a.time);
  }

  /// Heating rate of segment i (0-based; S1 is segment 0), deg C/min.
  [[nodiscard]] double slope(std::size_t i) const {
    if (i >= segments()) throw DomainError("cure cycle has no segment " + std::to_string(i));
    const auto& a = vertices_[i];
    const auto& b = vertices_[i + 1];
    return (b.temperature - a.temperature) / (b.time - a.time);
  }

 private:
  std::vector<CycleVertex> vertices_;
};

/// Fixed anchors shared by the cycle families.
struct CycleSettings {
  double start_temperature = 20.0;
  double hold_temperature = 180.0;
  double ramp_rate = 2.6;      // deg C/min
  double cool_rate = 4.846;    // deg C/min
  double baseline_dwell = 112.0;
  double two_point_dwell_start = 120.0;
  double two_point_dwell = 112.0;
  double four_point_dwell = 60.0;
};

enum class CycleVariant { Baseline, TwoPoint, FourPoint };

namespace detail {

inline void append_dwell_and_cool(std::vector<CycleVertex>& v, double dwell, const CycleSettings& s) {
  const double t_hold_end = v.back().time + dwell;
  v.push_back({t_hold_end, s.hold_temperature});
  v.push_back({t_hold_end + (s.hold_temperature - s.start_temperature) / s.cool_rate, s.start_temperature});
}

}  // namespace detail

/// Straight ramp to the hold temperature, dwell, cool down.
inline CureCycle baseline_cycle(const CycleSettings& s = {}) {
  std::vector<CycleVertex> v{{0.0, s.start_temperature}};
  v.push_back({(s.hold_temperature - s.start_temperature) / s.ramp_rate, s.hold_temperature});
  detail::append_dwell_and_cool(v, s.baseline_dwell, s);
  return CureCycle(std::move(v));
}

/// Start -> A(t1, T1) -> hold temperature at the fixed dwell start -> dwell -> cool.
inline CureCycle two_point_cycle(double t1, double T1, const CycleSettings& s = {}) {
  std::vector<CycleVertex> v{{0.0, s.start_temperature}, {t1, T1}, {s.two_point_dwell_start, s.hold_temperature}};
  detail::append_dwell_and_cool(v, s.two_point_dwell, s);
  return CureCycle(std::move(v));
}

/// Start -> A(t1, T1) -> B(t2, T2) -> ramp to hold temperature -> dwell -> cool.
inline CureCycle four_point_cycle(double t1, double T1, double t2, double T2, const CycleSettings& s = {}) {
  std::vector<CycleVertex> v{{0.0, s.start_temperature}, {t1, T1}, {t2, T2}};
  if (T2 > s.hold_temperature) throw InfeasibleCycleError("point B lies above the hold temperature");
  if (T2 < s.hold_temperature) v.push_back({t2 + (s.hold_temperature - T2) / s.ramp_rate, s.hold_temperature});
  detail::append_dwell_and_cool(v, s.four_point_dwell, s);
  return CureCycle(std::move(v));
}

/// Assemble a cycle from raw control-point coordinates: none for the
/// baseline, (t1, T1) for two-point, (t1, T1, t2, T2) for four-point.
inline CureCycle build_cycle(CycleVariant variant, const std::vector<double>& params, const CycleSettings& s = {}) {
  const std::size_t expected = variant == CycleVariant::Baseline ? 0 : variant == CycleVariant::TwoPoint ? 2 : 4;
  if (params.size() != expected) {
    throw DomainError("cure cycle variant expects " + std::to_string(expected) + " parameters");
  }
  switch (variant) {
    case CycleVariant::Baseline:
      return baseline_cycle(s);
    case CycleVariant::TwoPoint:
      return two_point_cycle(params[0], params[1], s);
    case CycleVariant::FourPoint:
      return four_point_cycle(params[0], params[1], params[2], params[3], s);
  }
  throw DomainError("unknown cure cycle variant");
}

}  // namespace curebo::problems
