#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "curebo/acquisition.hpp"
#include "curebo/design_space.hpp"
#include "curebo/error.hpp"
#include "curebo/gp.hpp"
#include "curebo/report.hpp"
#include "curebo/rng.hpp"

namespace curebo {

enum class PoolMode { Fresh, Fixed };

/// One learn step, as reported to progress listeners.
struct StepRecord {
  std::size_t step = 0;
  std::vector<double> raw;
  double f = 0.0;
  double g = 0.0;
  double acquisition = 0.0;
  std::optional<double> incumbent;
  bool fallback = false;
};

struct CboConfig {
  std::size_t n_init = 10;
  std::size_t n_steps = 30;
  std::size_t pool_size = 10000;
  double threshold = 0.995;
  std::uint64_t seed = 1;
  PoolMode pool_mode = PoolMode::Fresh;
  RawPredicate sieve;  // empty: use the problem's admissibility rule
  double duplicate_tolerance = 1e-9;
  FitSettings fit;
  std::function<void(const StepRecord&)> on_step;

  void validate() const {
    if (n_init < 2) throw ValidationError("cbo: n_init must be at least 2");
    if (n_steps < 1) throw ValidationError("cbo: n_steps must be at least 1");
    if (pool_size < 1) throw ValidationError("cbo: pool_size must be at least 1");
  }
};

namespace detail {

inline bool evaluate_into(const BlackBox& problem, RunReport& report, const DesignPoint& x, std::size_t step,
                          Phase phase, double acquisition) {
  Evaluation e;
  e.x = x;
  e.raw = problem.space().denormalize(x);
  e.step_index = step;
  e.phase = phase;
  e.acquisition = acquisition;
  e.admissible = problem.admissible(x);
  try {
    const Outcome out = problem(x);
    if (!std::isfinite(out.f) || !std::isfinite(out.g)) throw NumericalError("non-finite objective or constraint");
    e.f = out.f;
    e.g = out.g;
  } catch (const std::exception& ex) {
    report.complete = false;
    report.events.push_back("evaluation failed at step " + std::to_string(step) + ": " + ex.what());
    return false;
  }
  record(report, std::move(e));
  return true;
}

}  // namespace detail

/// Constrained Bayesian optimization: LHS initialization, then one
/// EI_C-maximizing proposal per step from a fresh candidate pool.
inline RunReport run_cbo(const BlackBox& problem, const CboConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const DesignSpace& space = problem.space();
  const RawPredicate& sieve_rule = config.sieve ? config.sieve : problem.admissible_rule();

  RunReport report;
  report.optimizer = "cbo";
  report.threshold = config.threshold;
  report.initial_evaluations = config.n_init;
  auto finish = [&] {
    report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
  };

  Rng rng(config.seed);
  const auto init = lhs_sample(space, config.n_init, rng, config.seed);
  for (const auto& x : init.points) {
    if (!detail::evaluate_into(problem, report, x, 0, Phase::Init, 0.0)) return finish();
  }

  std::optional<CandidatePool> fixed_pool;
  if (config.pool_mode == PoolMode::Fixed) fixed_pool = lhs_sample(space, config.pool_size, rng, config.seed);

  std::vector<DesignPoint> xs;
  std::vector<double> fs, gs;
  for (const auto& e : report.evaluations) {
    xs.push_back(e.x);
    fs.push_back(e.f);
    gs.push_back(e.g);
  }

  for (std::size_t step = 1; step <= config.n_steps; ++step) {
    std::optional<GpSurrogate> gp_f, gp_g;
    try {
      gp_f = GpSurrogate::fit(xs, fs, config.fit);
      gp_g = GpSurrogate::fit(xs, gs, config.fit);
    } catch (const std::exception& ex) {
      report.complete = false;
      report.events.push_back("surrogate fit failed at step " + std::to_string(step) + ": " + ex.what());
      return finish();
    }

    const CandidatePool raw_pool = fixed_pool ? *fixed_pool : lhs_sample(space, config.pool_size, rng, config.seed);
    CandidatePool pool = remove_near_duplicates(sieve_rule ? sieve(raw_pool, space, sieve_rule) : raw_pool, xs,
                                                config.duplicate_tolerance);
    bool fallback = false;
    if (pool.empty()) {
      fallback = true;
      pool = remove_near_duplicates(raw_pool, xs, config.duplicate_tolerance);
      if (pool.empty()) pool = raw_pool;
      report.events.push_back("step " + std::to_string(step) +
                              ": sieved pool empty, scoring unsieved pool by probability of feasibility");
    }

    const auto post_f = gp_f->predict(pool.points);
    const auto post_g = gp_g->predict(pool.points);
    std::vector<double> scores(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      scores[i] = fallback ? prob_feasible(post_g[i], config.threshold)
                           : constrained_ei(post_f[i], post_g[i], report.x_star, config.threshold);
    }
    const std::size_t pick = argmax_index(scores);
    const DesignPoint& x_next = pool.points[pick];

    for (const auto& seen : xs) {
      if (linf_distance(seen, x_next) <= config.duplicate_tolerance) {
        report.events.push_back("step " + std::to_string(step) + ": proposal duplicates an evaluated point");
        break;
      }
    }

    if (!detail::evaluate_into(problem, report, x_next, step, Phase::Learn, scores[pick])) return finish();
    const auto& e = report.evaluations.back();
    xs.push_back(e.x);
    fs.push_back(e.f);
    gs.push_back(e.g);
    if (config.on_step) {
      config.on_step(StepRecord{step, e.raw, e.f, e.g, e.acquisition, report.x_star.y_min, fallback});
    }
  }
  return finish();
}

}  // namespace curebo
