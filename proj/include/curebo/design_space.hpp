#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "curebo/error.hpp"
#include "curebo/rng.hpp"

namespace curebo {

/// A point of the unit box [0,1]^d.
class DesignPoint {
 public:
  DesignPoint() = default;

  explicit DesignPoint(std::vector<double> coords) : coords_(std::move(coords)) {
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      if (!(coords_[i] >= 0.0 && coords_[i] <= 1.0)) {
        throw DomainError("design point coordinate " + std::to_string(i) + " = " +
                          std::to_string(coords_[i]) + " is outside [0,1]");
      }
    }
  }

  [[nodiscard]] std::size_t dims() const noexcept { return coords_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return coords_[i]; }
  [[nodiscard]] std::span<const double> coords() const noexcept { return coords_; }

  friend bool operator==(const DesignPoint&, const DesignPoint&) = default;

 private:
  std::vector<double> coords_;
};

/// Clamp each coordinate into [0,1] and wrap it as a point.
inline DesignPoint clamped_point(std::vector<double> coords) {
  for (double& c : coords) c = std::clamp(c, 0.0, 1.0);
  return DesignPoint(std::move(coords));
}

inline double linf_distance(const DesignPoint& a, const DesignPoint& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.dims(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// Axis-aligned box of raw design variables (minutes, degrees C, ...).
class DesignSpace {
 public:
  DesignSpace(std::vector<std::string> names, std::vector<double> lower, std::vector<double> upper)
      : names_(std::move(names)), lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty()) throw DomainError("design space needs at least one dimension");
    if (lower_.size() != upper_.size() || names_.size() != lower_.size()) {
      throw DomainError("design space names/lower/upper sizes differ");
    }
    for (std::size_t i = 0; i < lower_.size(); ++i) {
      if (!(lower_[i] < upper_[i])) {
        throw DomainError("design space dimension '" + names_[i] + "' has lower >= upper");
      }
    }
  }

  [[nodiscard]] std::size_t dims() const noexcept { return lower_.size(); }
  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] const std::vector<double>& lower() const noexcept { return lower_; }
  [[nodiscard]] const std::vector<double>& upper() const noexcept { return upper_; }

  [[nodiscard]] DesignPoint normalize(std::span<const double> raw) const {
    if (raw.size() != dims()) throw DomainError("raw point has wrong dimension");
    std::vector<double> coords(dims());
    for (std::size_t i = 0; i < dims(); ++i) {
      if (!(raw[i] >= lower_[i] && raw[i] <= upper_[i])) {
        throw DomainError("raw value " + std::to_string(raw[i]) + " for dimension '" + names_[i] +
                          "' is outside [" + std::to_string(lower_[i]) + ", " +
                          std::to_string(upper_[i]) + "]");
      }
      coords[i] = std::clamp((raw[i] - lower_[i]) / (upper_[i] - lower_[i]), 0.0, 1.0);
    }
    return DesignPoint(std::move(coords));
  }

  [[nodiscard]] std::vector<double> denormalize(const DesignPoint& p) const {
    if (p.dims() != dims()) throw DomainError("design point has wrong dimension");
    std::vector<double> raw(dims());
    for (std::size_t i = 0; i < dims(); ++i) raw[i] = lower_[i] + p[i] * (upper_[i] - lower_[i]);
    return raw;
  }

 private:
  std::vector<std::string> names_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Finite candidate set over which acquisitions are maximized.
struct CandidatePool {
  std::vector<DesignPoint> points;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
  [[nodiscard]] bool empty() const noexcept { return points.empty(); }
};

/// Latin hypercube sample of m points, drawing from an existing stream.
///
/// Along every dimension each of the m strata [k/m, (k+1)/m) holds exactly
/// one point, placed uniformly at random inside its stratum.
inline CandidatePool lhs_sample(const DesignSpace& space, std::size_t m, Rng& rng,
                                std::uint64_t seed_tag = 0) {
  if (m == 0) throw DomainError("latin hypercube sample size must be at least 1");
  const std::size_t d = space.dims();
  std::vector<std::vector<double>> coords(m, std::vector<double>(d));
  std::vector<std::size_t> perm(m);
  const double width = 1.0 / static_cast<double>(m);
  for (std::size_t h = 0; h < d; ++h) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = m - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    for (std::size_t i = 0; i < m; ++i) {
      // (k + u)/m can round up to the next stratum edge for u close to 1
      const double k = static_cast<double>(perm[i]);
      coords[i][h] = std::min((k + rng.uniform()) * width, std::nextafter((k + 1.0) * width, 0.0));
    }
  }
  CandidatePool pool;
  pool.seed = seed_tag;
  pool.points.reserve(m);
  for (auto& c : coords) pool.points.emplace_back(std::move(c));
  return pool;
}

inline CandidatePool lhs_sample(const DesignSpace& space, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  return lhs_sample(space, m, rng, seed);
}

/// Deterministic feasibility test on raw design coordinates.
using RawPredicate = std::function<bool(std::span<const double>)>;

/// Keep the candidates whose raw coordinates satisfy the predicate, in order.
inline CandidatePool sieve(const CandidatePool& pool, const DesignSpace& space,
                           const RawPredicate& keep) {
  CandidatePool out;
  out.seed = pool.seed;
  for (const auto& p : pool.points) {
    if (keep(space.denormalize(p))) out.points.push_back(p);
  }
  return out;
}

/// Drop candidates within L-infinity distance tol of any evaluated point.
inline CandidatePool remove_near_duplicates(const CandidatePool& pool,
                                            std::span<const DesignPoint> evaluated,
                                            double tol = 1e-9) {
  CandidatePool out;
  out.seed = pool.seed;
  out.points.reserve(pool.size());
  for (const auto& p : pool.points) {
    const bool dup = std::any_of(evaluated.begin(), evaluated.end(),
                                 [&](const DesignPoint& e) { return linf_distance(p, e) <= tol; });
    if (!dup) out.points.push_back(p);
  }
  return out;
}

}  // namespace curebo
