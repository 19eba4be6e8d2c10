#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "curebo/design_space.hpp"
#include "curebo/error.hpp"
#include "curebo/report.hpp"
#include "curebo/rng.hpp"

namespace curebo {

struct GaConfig {
  std::size_t pop_size = 100;
  std::size_t generations = 10;
  double crossover_prob = 0.9;
  double crossover_eta = 15.0;
  std::optional<double> mutation_prob;  // default 1/d
  double mutation_eta = 20.0;
  std::size_t tournament_size = 2;
  std::uint64_t seed = 1;
  double threshold = 0.995;

  void validate() const {
    if (pop_size < 2 || pop_size % 2 != 0) throw ValidationError("ga: pop_size must be even and at least 2");
    if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) throw ValidationError("ga: crossover_prob outside [0,1]");
    if (mutation_prob && !(*mutation_prob >= 0.0 && *mutation_prob <= 1.0)) {
      throw ValidationError("ga: mutation_prob outside [0,1]");
    }
    if (tournament_size < 1) throw ValidationError("ga: tournament_size must be at least 1");
    if (!(crossover_eta >= 0.0) || !(mutation_eta >= 0.0)) throw ValidationError("ga: negative distribution index");
  }
};

struct Individual {
  DesignPoint x;
  double f = 0.0;
  double g = 0.0;
  double violation = 0.0;  // max(0, c - g), plus 1 for inadmissible designs

  [[nodiscard]] bool feasible() const noexcept { return violation == 0.0; }
};

inline Individual make_individual(const Evaluation& e, double c) {
  Individual ind{e.x, e.f, e.g, std::max(0.0, c - e.g)};
  if (!e.admissible) ind.violation += 1.0;
  return ind;
}

/// Constraint domination for one objective and one aggregated violation.
inline bool constraint_dominates(const Individual& a, const Individual& b) {
  if (a.feasible() != b.feasible()) return a.feasible();
  if (!a.feasible()) return a.violation < b.violation;
  return a.f < b.f;
}

namespace detail {

// Deb & Agrawal bounded simulated binary crossover on [0,1].
inline void sbx(std::vector<double>& c1, std::vector<double>& c2, double eta, Rng& rng) {
  for (std::size_t i = 0; i < c1.size(); ++i) {
    if (!rng.coin()) continue;
    double y1 = std::min(c1[i], c2[i]);
    double y2 = std::max(c1[i], c2[i]);
    if (y2 - y1 < 1e-14) continue;
    const double u = rng.uniform();
    auto spread = [&](double beta) {
      const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
      return u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                              : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
    };
    const double beta_lo = 1.0 + 2.0 * y1 / (y2 - y1);
    const double beta_hi = 1.0 + 2.0 * (1.0 - y2) / (y2 - y1);
    double o1 = 0.5 * ((y1 + y2) - spread(beta_lo) * (y2 - y1));
    double o2 = 0.5 * ((y1 + y2) + spread(beta_hi) * (y2 - y1));
    o1 = std::clamp(o1, 0.0, 1.0);
    o2 = std::clamp(o2, 0.0, 1.0);
    if (rng.coin()) std::swap(o1, o2);
    c1[i] = o1;
    c2[i] = o2;
  }
}

// Deb's bounded polynomial mutation on [0,1].
inline void polynomial_mutation(std::vector<double>& x, double prob, double eta, Rng& rng) {
  for (double& v : x) {
    if (rng.uniform() >= prob) continue;
    const double d1 = v, d2 = 1.0 - v;
    const double u = rng.uniform();
    const double p = 1.0 / (eta + 1.0);
    double dq;
    if (u < 0.5) {
      dq = std::pow(2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0), p) - 1.0;
    } else {
      dq = 1.0 - std::pow(2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0), p);
    }
    v = std::clamp(v + dq, 0.0, 1.0);
  }
}

inline std::size_t tournament(const std::vector<Individual>& pop, std::size_t size, Rng& rng) {
  std::size_t best = rng.below(pop.size());
  for (std::size_t k = 1; k < size; ++k) {
    const std::size_t other = rng.below(pop.size());
    if (constraint_dominates(pop[other], pop[best])) {
      best = other;
    } else if (!constraint_dominates(pop[best], pop[other]) && rng.coin()) {
      best = other;
    }
  }
  return best;
}

// Full order used for elitist truncation; shares its classes with
// constraint_dominates, stable on ties.
inline bool survives_before(const Individual& a, const Individual& b) {
  return constraint_dominates(a, b);
}

}  // namespace detail

/// Elitist generational GA with constraint-domination tournaments, SBX,
/// polynomial mutation and (mu + lambda) survival.
inline RunReport run_ga(const BlackBox& problem, const GaConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const DesignSpace& space = problem.space();
  const std::size_t d = space.dims();
  const double pm = config.mutation_prob.value_or(1.0 / static_cast<double>(d));

  RunReport report;
  report.optimizer = "ga";
  report.threshold = config.threshold;
  report.initial_evaluations = config.pop_size;
  auto finish = [&] {
    report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
  };

  Rng rng(config.seed);
  std::vector<Individual> pop;
  const auto init = lhs_sample(space, config.pop_size, rng, config.seed);
  for (const auto& x : init.points) {
    if (!detail::evaluate_into(problem, report, x, 0, Phase::Init, 0.0)) return finish();
    pop.push_back(make_individual(report.evaluations.back(), config.threshold));
  }

  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    std::vector<Individual> next = pop;
    next.reserve(2 * config.pop_size);
    for (std::size_t k = 0; k < config.pop_size; k += 2) {
      const auto& p1 = pop[detail::tournament(pop, config.tournament_size, rng)];
      const auto& p2 = pop[detail::tournament(pop, config.tournament_size, rng)];
      std::vector<double> c1(p1.x.coords().begin(), p1.x.coords().end());
      std::vector<double> c2(p2.x.coords().begin(), p2.x.coords().end());
      if (rng.uniform() < config.crossover_prob) detail::sbx(c1, c2, config.crossover_eta, rng);
      detail::polynomial_mutation(c1, pm, config.mutation_eta, rng);
      detail::polynomial_mutation(c2, pm, config.mutation_eta, rng);
      for (auto* child : {&c1, &c2}) {
        if (!detail::evaluate_into(problem, report, clamped_point(*child), gen, Phase::Learn, 0.0)) return finish();
        next.push_back(make_individual(report.evaluations.back(), config.threshold));
      }
    }
    std::stable_sort(next.begin(), next.end(), detail::survives_before);
    next.resize(config.pop_size);
    pop = std::move(next);
  }
  return finish();
}

}  // namespace curebo
