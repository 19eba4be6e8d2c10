#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>

#include "curebo/design_space.hpp"
#include "curebo/error.hpp"
#include "curebo/gp.hpp"
#include "curebo/normal.hpp"

namespace curebo {

/// Best feasible observation so far; empty until a feasible point exists.
struct Incumbent {
  std::optional<double> y_min;
  std::optional<DesignPoint> x_best;
  std::optional<std::size_t> index;  // position in the evaluation log

  [[nodiscard]] bool present() const noexcept { return y_min.has_value(); }
};

/// Closed-form expected improvement below y_min, using the posterior
/// standard deviation.
inline double expected_improvement(const Posterior& post, double y_min) {
  const double s = std::sqrt(std::max(post.variance, 0.0));
  const double gap = y_min - post.mean;
  if (s == 0.0) return std::max(0.0, gap);
  const double z = gap / s;
  return std::max(0.0, gap * normal::cdf(z) + s * normal::pdf(z));
}

/// Posterior probability that the constraint output is at least c.
inline double prob_feasible(const Posterior& post, double c) {
  const double s = std::sqrt(std::max(post.variance, 0.0));
  if (s == 0.0) return post.mean >= c ? 1.0 : 0.0;
  // 1 - Phi(x) == Phi(-x), without cancellation in the upper tail
  return normal::cdf((post.mean - c) / s);
}

/// EI weighted by probability of feasibility; PF alone without an incumbent.
inline double constrained_ei(const Posterior& post_f, const Posterior& post_g, const Incumbent& incumbent,
                             double c) {
  const double pf = prob_feasible(post_g, c);
  if (!incumbent.present()) return pf;
  return expected_improvement(post_f, *incumbent.y_min) * pf;
}

/// Index of the largest score, lowest index on ties; NaN never wins.
inline std::size_t argmax_index(std::span<const double> scores) {
  if (scores.empty()) throw DomainError("argmax over an empty candidate pool");
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) continue;
    if (!found || scores[i] > best_score) {
      best = i;
      best_score = scores[i];
      found = true;
    }
  }
  return best;
}

inline const DesignPoint& argmax_pool(const CandidatePool& pool,
                                      const std::function<double(const DesignPoint&)>& scorer) {
  if (pool.empty()) throw DomainError("argmax over an empty candidate pool");
  std::vector<double> scores;
  scores.reserve(pool.size());
  for (const auto& p : pool.points) scores.push_back(scorer(p));
  return pool.points[argmax_index(scores)];
}

}  // namespace curebo
