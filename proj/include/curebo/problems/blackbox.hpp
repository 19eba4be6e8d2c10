#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "curebo/problems/analytical.hpp"
#include "curebo/problems/cure_cycle.hpp"
#include "curebo/problems/cure_model.hpp"
#include "curebo/report.hpp"

namespace curebo::problems {

/// Objective value reported for control points that do not form a cycle.
inline constexpr double kInfeasibleObjective = 1.0e3;

inline DesignSpace analytical_space() {
  return DesignSpace({"t", "T"}, {AnalyticalPidProblem::t_min, AnalyticalPidProblem::T_min},
                     {AnalyticalPidProblem::t_max, AnalyticalPidProblem::T_max});
}

/// The polynomial problem works on normalized coordinates directly; raw
/// coordinates are only carried for reporting.
inline BlackBox analytical_blackbox(AnalyticalPidProblem p = {}) {
  return BlackBox("analytical", analytical_space(), [p](const DesignPoint& x) {
    const auto v = eval_analytical(p, x[0], x[1]);
    return Outcome{v.u, v.doc};
  });
}

enum class DesignRule { SlopeS1AboveS2, SlopeS2Positive };

inline std::string to_string(DesignRule r) {
  return r == DesignRule::SlopeS1AboveS2 ? "s1_gt_s2" : "s2_positive";
}

/// Configuration of a cure-simulator black box.
struct CureProblem {
  CycleVariant variant = CycleVariant::TwoPoint;
  DesignSpace space = DesignSpace({"t1", "T1"}, {1.0, 125.0}, {110.0, 180.0});
  CycleSettings cycle;
  KineticParams kinetics;
  MechanicalParams mechanics;
  SimulationSettings simulation;
  double threshold = 0.995;
  std::vector<DesignRule> rules;
  std::function<void(const std::string&)> on_infeasible;
};

/// Two control points, bounds of the flat-laminate case R1.
inline CureProblem two_point_problem() { return CureProblem{}; }

/// Four control points with the slope requirement slope(S1) > slope(S2).
inline CureProblem four_point_problem() {
  CureProblem p;
  p.variant = CycleVariant::FourPoint;
  p.space = DesignSpace({"t1", "T1", "t2", "T2"}, {10.0, 125.0, 120.0, 150.0}, {110.0, 180.0, 200.0, 180.0});
  p.threshold = 0.960;
  p.rules = {DesignRule::SlopeS1AboveS2};
  return p;
}

inline bool satisfies_rules(const CureCycle& cycle, const std::vector<DesignRule>& rules) {
  for (auto r : rules) {
    switch (r) {
      case DesignRule::SlopeS1AboveS2:
        if (!(cycle.slope(0) > cycle.slope(1))) return false;
        break;
      case DesignRule::SlopeS2Positive:
        if (!(cycle.slope(1) > 0.0)) return false;
        break;
    }
  }
  return true;
}

/// Slope rules as a raw-coordinate predicate; unassemblable cycles fail it.
inline RawPredicate rule_predicate(const CureProblem& p) {
  if (p.rules.empty()) return {};
  return [variant = p.variant, cycle = p.cycle, rules = p.rules](std::span<const double> raw) {
    try {
      return satisfies_rules(build_cycle(variant, std::vector<double>(raw.begin(), raw.end()), cycle), rules);
    } catch (const InfeasibleCycleError&) {
      return false;
    }
  };
}

inline BlackBox cure_blackbox(const CureProblem& p) {
  p.kinetics.validate();
  p.mechanics.validate();
  const std::string name = p.variant == CycleVariant::FourPoint ? "sim4pt" : "sim2pt";
  return BlackBox(
      name, p.space,
      [p](const DesignPoint& x) {
        const auto raw = p.space.denormalize(x);
        try {
          const auto cycle = build_cycle(p.variant, raw, p.cycle);
          const auto tr = simulate_cure(cycle, p.kinetics, p.mechanics, p.simulation);
          return Outcome{tr.u_proxy, tr.final_doc};
        } catch (const InfeasibleCycleError& e) {
          if (p.on_infeasible) p.on_infeasible(e.what());
          return Outcome{kInfeasibleObjective, 0.0};
        }
      },
      rule_predicate(p));
}

/// Deformation proxy and final degree of cure of the baseline cycle.
inline Outcome baseline_outcome(const CureProblem& p) {
  const auto tr = simulate_cure(baseline_cycle(p.cycle), p.kinetics, p.mechanics, p.simulation);
  return {tr.u_proxy, tr.final_doc};
}

}  // namespace curebo::problems
