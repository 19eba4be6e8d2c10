#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "curebo/acquisition.hpp"
#include "curebo/design_space.hpp"

namespace curebo {

/// Objective and constraint outputs of one black-box evaluation.
struct Outcome {
  double f = 0.0;
  double g = 0.0;
};

/// Deterministic expensive function over a design space.
///
/// `admissible` is an optional design-level rule on raw coordinates (cure
/// cycle slope requirements); a design violating it is never feasible.
class BlackBox {
 public:
  using Evaluator = std::function<Outcome(const DesignPoint&)>;

  BlackBox(std::string name, DesignSpace space, Evaluator evaluate, RawPredicate admissible = {})
      : name_(std::move(name)), space_(std::move(space)), evaluate_(std::move(evaluate)),
        admissible_(std::move(admissible)) {}

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const DesignSpace& space() const noexcept { return space_; }
  [[nodiscard]] const RawPredicate& admissible_rule() const noexcept { return admissible_; }

  [[nodiscard]] Outcome operator()(const DesignPoint& x) const { return evaluate_(x); }

  [[nodiscard]] bool admissible(const DesignPoint& x) const {
    return !admissible_ || admissible_(space_.denormalize(x));
  }

 private:
  std::string name_;
  DesignSpace space_;
  Evaluator evaluate_;
  RawPredicate admissible_;
};

enum class Phase { Init, Learn };

inline const char* to_string(Phase p) { return p == Phase::Init ? "INIT" : "LEARN"; }

struct Evaluation {
  DesignPoint x;
  std::vector<double> raw;
  double f = 0.0;
  double g = 0.0;
  std::size_t step_index = 0;  // 0 for initialization, learn step or generation otherwise
  Phase phase = Phase::Init;
  bool admissible = true;
  double acquisition = 0.0;  // EI_C of the proposal, 0 for non-acquisition points
};

[[nodiscard]] inline bool is_feasible(const Evaluation& e, double c) { return e.admissible && e.g >= c; }

/// Minimum-f feasible evaluation (g >= c and admissible); earliest on ties.
inline Incumbent best_feasible(std::span<const Evaluation> evaluations, double c) {
  Incumbent inc;
  for (std::size_t i = 0; i < evaluations.size(); ++i) {
    const auto& e = evaluations[i];
    if (!is_feasible(e, c)) continue;
    if (!inc.present() || e.f < *inc.y_min) {
      inc.y_min = e.f;
      inc.x_best = e.x;
      inc.index = i;
    }
  }
  return inc;
}

/// Log of a cBO or GA run.
struct RunReport {
  std::string optimizer;
  double threshold = 0.0;
  std::vector<Evaluation> evaluations;
  // best feasible f after each evaluation, empty before the first feasible one
  std::vector<std::optional<double>> best_trace;
  Incumbent x_star;
  double wall_time_seconds = 0.0;
  bool complete = true;
  std::vector<std::string> events;
  std::size_t initial_evaluations = 0;

  /// Best feasible f after the first `count` evaluations.
  [[nodiscard]] std::optional<double> best_after(std::size_t count) const {
    if (count == 0 || best_trace.empty()) return std::nullopt;
    return best_trace[std::min(count, best_trace.size()) - 1];
  }
};

/// Append an evaluation and extend the best-feasible trace. An evaluation
/// replaces the incumbent only when it is feasible and strictly better.
inline void record(RunReport& report, Evaluation e) {
  const bool improves = is_feasible(e, report.threshold) &&
                        (!report.x_star.present() || e.f < *report.x_star.y_min);
  if (improves) {
    report.x_star.y_min = e.f;
    report.x_star.x_best = e.x;
    report.x_star.index = report.evaluations.size();
  }
  report.evaluations.push_back(std::move(e));
  report.best_trace.push_back(report.x_star.y_min);
}

}  // namespace curebo
