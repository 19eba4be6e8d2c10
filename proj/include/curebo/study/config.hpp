#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "curebo/cbo.hpp"
#include "curebo/error.hpp"
#include "curebo/ga.hpp"
#include "curebo/problems/blackbox.hpp"

namespace curebo::study {

using nlohmann::json;

enum class ProblemKind { Analytical, Sim2pt, Sim4pt };
enum class OptimizerKind { Cbo, Ga, Both };

inline std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Analytical: return "analytical";
    case ProblemKind::Sim2pt: return "sim2pt";
    case ProblemKind::Sim4pt: return "sim4pt";
  }
  return "?";
}

inline std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::Cbo: return "cbo";
    case OptimizerKind::Ga: return "ga";
    case OptimizerKind::Both: return "both";
  }
  return "?";
}

struct CboSettings {
  std::size_t n_init = 10;
  std::size_t n_steps = 30;
  std::size_t pool_size = 10000;
  PoolMode pool_mode = PoolMode::Fresh;
  double duplicate_tolerance = 1e-9;
  std::size_t fit_starts = 3;
  std::size_t fit_max_evaluations = 300;

  friend bool operator==(const CboSettings&, const CboSettings&) = default;
};

struct GaSettings {
  std::size_t pop_size = 100;
  std::size_t generations = 10;
  double crossover_prob = 0.9;
  double crossover_eta = 15.0;
  std::optional<double> mutation_prob;
  double mutation_eta = 20.0;
  std::size_t tournament_size = 2;

  friend bool operator==(const GaSettings&, const GaSettings&) = default;
};

/// One study: a problem, an optimizer (or both) and a replication protocol.
struct RunConfig {
  std::string name = "study";
  ProblemKind problem = ProblemKind::Analytical;
  OptimizerKind optimizer = OptimizerKind::Cbo;
  std::size_t replications = 1;
  std::uint64_t root_seed = 1;
  std::size_t workers = 1;
  std::string output_dir = "out";
  std::optional<double> threshold;
  std::optional<double> reference_optimum;
  bool reference_from_grid = false;
  double convergence_tolerance = 2e-4;
  std::vector<std::size_t> report_steps;
  CboSettings cbo;
  GaSettings ga;
  std::map<std::string, std::pair<double, double>> bounds;
  std::optional<std::vector<problems::DesignRule>> rules;
  problems::CycleSettings cycle;
  problems::KineticParams kinetics;
  problems::MechanicalParams mechanics;
  problems::SimulationSettings simulation;
};

namespace detail {

template <class T>
struct Field {
  const char* key;
  double T::*member;
};

inline const std::vector<Field<problems::KineticParams>>& kinetic_fields() {
  using K = problems::KineticParams;
  static const std::vector<Field<K>> f{{"A1", &K::A1},
                                       {"A2", &K::A2},
                                       {"A3", &K::A3},
                                       {"dE1", &K::dE1},
                                       {"dE2", &K::dE2},
                                       {"dE3", &K::dE3},
                                       {"alpha_crit", &K::alpha_crit},
                                       {"branch_switch", &K::branch_switch},
                                       {"gas_constant", &K::gas_constant},
                                       {"heat_of_reaction", &K::heat_of_reaction},
                                       {"fiber_volume_fraction", &K::fiber_volume_fraction},
                                       {"resin_density", &K::resin_density}};
  return f;
}

inline const std::vector<Field<problems::MechanicalParams>>& mechanical_fields() {
  using M = problems::MechanicalParams;
  static const std::vector<Field<M>> f{{"modulus_liquid", &M::modulus_liquid},
                                       {"modulus_cured", &M::modulus_cured},
                                       {"gamma", &M::gamma},
                                       {"alpha1", &M::alpha1},
                                       {"alpha2", &M::alpha2},
                                       {"shrink_A", &M::shrink_A},
                                       {"shrink_total", &M::shrink_total},
                                       {"alpha_c1", &M::alpha_c1},
                                       {"alpha_c2", &M::alpha_c2},
                                       {"cte", &M::cte},
                                       {"ccs", &M::ccs},
                                       {"gel_viscosity", &M::gel_viscosity},
                                       {"mu_inf", &M::mu_inf},
                                       {"viscosity_U", &M::viscosity_U},
                                       {"viscosity_K", &M::viscosity_K},
                                       {"tg0", &M::tg0},
                                       {"tg_inf", &M::tg_inf},
                                       {"tg_lambda", &M::tg_lambda}};
  return f;
}

inline const std::vector<Field<problems::CycleSettings>>& cycle_fields() {
  using C = problems::CycleSettings;
  static const std::vector<Field<C>> f{{"start_temperature", &C::start_temperature},
                                       {"hold_temperature", &C::hold_temperature},
                                       {"ramp_rate", &C::ramp_rate},
                                       {"cool_rate", &C::cool_rate},
                                       {"baseline_dwell", &C::baseline_dwell},
                                       {"two_point_dwell_start", &C::two_point_dwell_start},
                                       {"two_point_dwell", &C::two_point_dwell},
                                       {"four_point_dwell", &C::four_point_dwell}};
  return f;
}

inline const std::vector<Field<problems::SimulationSettings>>& simulation_fields() {
  using S = problems::SimulationSettings;
  static const std::vector<Field<S>> f{{"dt", &S::dt}, {"initial_alpha", &S::initial_alpha}};
  return f;
}

/// Collects violations so a config reports all of its problems at once.
class Reader {
 public:
  std::vector<std::string> violations;

  void unknown_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
      violations.push_back(where + ": expected an object");
      return;
    }
    for (const auto& [k, v] : obj.items()) {
      if (!allowed.count(k)) violations.push_back(where + ": unknown key '" + k + "'");
    }
  }

  template <class T>
  void number(const json& obj, const char* key, const std::string& where, T& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) {
        violations.push_back(where + "." + key + ": expected a number");
        return;
      }
      out = v.get<T>();
    } else {
      if (!v.is_number_integer() && !v.is_number_unsigned()) {
        violations.push_back(where + "." + key + ": expected an integer");
        return;
      }
      if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
        violations.push_back(where + "." + key + ": must be non-negative");
        return;
      }
      out = v.get<T>();
    }
  }

  void string(const json& obj, const char* key, const std::string& where, std::string& out) {
    if (!obj.contains(key)) return;
    if (!obj.at(key).is_string()) {
      violations.push_back(where + "." + key + ": expected a string");
      return;
    }
    out = obj.at(key).get<std::string>();
  }

  template <class T>
  void fields(const json& obj, const std::string& where, const std::vector<Field<T>>& table, T& out,
              std::set<std::string> extra = {}) {
    for (const auto& f : table) extra.insert(f.key);
    unknown_keys(obj, where, extra);
    if (!obj.is_object()) return;
    for (const auto& f : table) number(obj, f.key, where, out.*(f.member));
  }
};

template <class T>
json dump_fields(const std::vector<Field<T>>& table, const T& v) {
  json j = json::object();
  for (const auto& f : table) j[f.key] = v.*(f.member);
  return j;
}

inline std::optional<problems::DesignRule> parse_rule(const std::string& s) {
  if (s == "s1_gt_s2") return problems::DesignRule::SlopeS1AboveS2;
  if (s == "s2_positive") return problems::DesignRule::SlopeS2Positive;
  return std::nullopt;
}

}  // namespace detail

/// Material, cycle and simulation blocks shared by study and trace configs.
inline void read_physics(const json& j, detail::Reader& rd, problems::CycleSettings& cycle,
                         problems::KineticParams& kin, problems::MechanicalParams& mech,
                         problems::SimulationSettings& sim) {
  if (j.contains("cycle")) rd.fields(j.at("cycle"), "cycle", detail::cycle_fields(), cycle);
  if (j.contains("kinetics")) rd.fields(j.at("kinetics"), "kinetics", detail::kinetic_fields(), kin);
  if (j.contains("simulation")) rd.fields(j.at("simulation"), "simulation", detail::simulation_fields(), sim);
  if (j.contains("mechanics")) {
    const auto& m = j.at("mechanics");
    rd.fields(m, "mechanics", detail::mechanical_fields(), mech, {"knots"});
    if (m.is_object() && m.contains("knots")) {
      const auto& k = m.at("knots");
      if (k == "fixed") {
        mech.knots = problems::KnotMode::Fixed;
      } else if (k == "derived") {
        mech.knots = problems::KnotMode::Derived;
      } else {
        rd.violations.push_back("mechanics.knots: expected \"fixed\" or \"derived\"");
      }
    }
  }
  auto check = [&](auto&& fn) {
    try {
      fn();
    } catch (const ValidationError& e) {
      rd.violations.push_back(e.what());
    }
  };
  check([&] { kin.validate(); });
  check([&] { mech.validate(); });
  if (!(sim.dt > 0.0)) rd.violations.push_back("simulation.dt: must be positive");
  if (!(cycle.ramp_rate > 0.0 && cycle.cool_rate > 0.0)) rd.violations.push_back("cycle: rates must be positive");
  if (!(cycle.hold_temperature > cycle.start_temperature)) {
    rd.violations.push_back("cycle: hold temperature must exceed start temperature");
  }
}

inline void write_physics(json& j, const problems::CycleSettings& cycle, const problems::KineticParams& kin,
                          const problems::MechanicalParams& mech, const problems::SimulationSettings& sim) {
  j["cycle"] = detail::dump_fields(detail::cycle_fields(), cycle);
  j["kinetics"] = detail::dump_fields(detail::kinetic_fields(), kin);
  j["mechanics"] = detail::dump_fields(detail::mechanical_fields(), mech);
  j["mechanics"]["knots"] = mech.knots == problems::KnotMode::Fixed ? "fixed" : "derived";
  j["simulation"] = detail::dump_fields(detail::simulation_fields(), sim);
}

/// Parse and validate a study config; throws ValidationError listing every
/// violation found.
inline RunConfig parse_run_config(const json& j) {
  detail::Reader rd;
  RunConfig c;
  rd.unknown_keys(j, "config",
                  {"name", "problem", "optimizer", "replications", "root_seed", "workers", "output_dir", "threshold",
                   "reference_optimum", "convergence_tolerance", "report_steps", "cbo", "ga", "design", "cycle",
                   "kinetics", "mechanics", "simulation"});
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");

  rd.string(j, "name", "config", c.name);
  if (j.contains("problem")) {
    const auto p = j.at("problem");
    if (p == "analytical") c.problem = ProblemKind::Analytical;
    else if (p == "sim2pt") c.problem = ProblemKind::Sim2pt;
    else if (p == "sim4pt") c.problem = ProblemKind::Sim4pt;
    else rd.violations.push_back("config.problem: expected analytical, sim2pt or sim4pt");
  } else {
    rd.violations.push_back("config.problem: required");
  }
  if (j.contains("optimizer")) {
    const auto o = j.at("optimizer");
    if (o == "cbo") c.optimizer = OptimizerKind::Cbo;
    else if (o == "ga") c.optimizer = OptimizerKind::Ga;
    else if (o == "both") c.optimizer = OptimizerKind::Both;
    else rd.violations.push_back("config.optimizer: expected cbo, ga or both");
  }
  rd.number(j, "replications", "config", c.replications);
  rd.number(j, "root_seed", "config", c.root_seed);
  rd.number(j, "workers", "config", c.workers);
  rd.string(j, "output_dir", "config", c.output_dir);
  if (j.contains("threshold")) {
    if (j.at("threshold").is_number()) c.threshold = j.at("threshold").get<double>();
    else if (!j.at("threshold").is_null()) rd.violations.push_back("config.threshold: expected a number");
  }
  if (j.contains("reference_optimum")) {
    const auto& r = j.at("reference_optimum");
    if (r.is_number()) c.reference_optimum = r.get<double>();
    else if (r == "grid") c.reference_from_grid = true;
    else if (!r.is_null()) rd.violations.push_back("config.reference_optimum: expected a number, \"grid\" or null");
  }
  rd.number(j, "convergence_tolerance", "config", c.convergence_tolerance);
  if (j.contains("report_steps")) {
    const auto& rs = j.at("report_steps");
    if (!rs.is_array()) {
      rd.violations.push_back("config.report_steps: expected an array");
    } else {
      for (const auto& s : rs) {
        if (s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0)) c.report_steps.push_back(s.get<std::size_t>());
        else rd.violations.push_back("config.report_steps: entries must be non-negative integers");
      }
    }
  }

  if (j.contains("cbo")) {
    const auto& b = j.at("cbo");
    rd.unknown_keys(b, "cbo", {"n_init", "n_steps", "pool_size", "pool_mode", "duplicate_tolerance", "fit_starts",
                               "fit_max_evaluations"});
    if (b.is_object()) {
      rd.number(b, "n_init", "cbo", c.cbo.n_init);
      rd.number(b, "n_steps", "cbo", c.cbo.n_steps);
      rd.number(b, "pool_size", "cbo", c.cbo.pool_size);
      rd.number(b, "duplicate_tolerance", "cbo", c.cbo.duplicate_tolerance);
      rd.number(b, "fit_starts", "cbo", c.cbo.fit_starts);
      rd.number(b, "fit_max_evaluations", "cbo", c.cbo.fit_max_evaluations);
      if (b.contains("pool_mode")) {
        if (b.at("pool_mode") == "fresh") c.cbo.pool_mode = PoolMode::Fresh;
        else if (b.at("pool_mode") == "fixed") c.cbo.pool_mode = PoolMode::Fixed;
        else rd.violations.push_back("cbo.pool_mode: expected \"fresh\" or \"fixed\"");
      }
    }
  }
  if (j.contains("ga")) {
    const auto& g = j.at("ga");
    rd.unknown_keys(g, "ga", {"pop_size", "generations", "crossover_prob", "crossover_eta", "mutation_prob",
                              "mutation_eta", "tournament_size"});
    if (g.is_object()) {
      rd.number(g, "pop_size", "ga", c.ga.pop_size);
      rd.number(g, "generations", "ga", c.ga.generations);
      rd.number(g, "crossover_prob", "ga", c.ga.crossover_prob);
      rd.number(g, "crossover_eta", "ga", c.ga.crossover_eta);
      rd.number(g, "mutation_eta", "ga", c.ga.mutation_eta);
      rd.number(g, "tournament_size", "ga", c.ga.tournament_size);
      if (g.contains("mutation_prob") && !g.at("mutation_prob").is_null()) {
        double pm = 0.0;
        rd.number(g, "mutation_prob", "ga", pm);
        c.ga.mutation_prob = pm;
      }
    }
  }
  if (j.contains("design")) {
    const auto& d = j.at("design");
    rd.unknown_keys(d, "design", {"bounds", "rules"});
    if (d.is_object() && d.contains("bounds")) {
      const auto& b = d.at("bounds");
      if (!b.is_object()) rd.violations.push_back("design.bounds: expected an object");
      else {
        for (const auto& [k, v] : b.items()) {
          if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            c.bounds[k] = {v[0].get<double>(), v[1].get<double>()};
          } else {
            rd.violations.push_back("design.bounds." + k + ": expected [lower, upper]");
          }
        }
      }
    }
    if (d.is_object() && d.contains("rules")) {
      const auto& r = d.at("rules");
      std::vector<problems::DesignRule> rules;
      if (!r.is_array()) rd.violations.push_back("design.rules: expected an array");
      else {
        for (const auto& s : r) {
          const auto rule = s.is_string() ? detail::parse_rule(s.get<std::string>()) : std::nullopt;
          if (rule) rules.push_back(*rule);
          else rd.violations.push_back("design.rules: unknown rule " + s.dump());
        }
      }
      c.rules = rules;
    }
  }
  read_physics(j, rd, c.cycle, c.kinetics, c.mechanics, c.simulation);

  if (c.replications < 1) rd.violations.push_back("config.replications: must be at least 1");
  if (c.workers < 1) rd.violations.push_back("config.workers: must be at least 1");
  if (c.output_dir.empty()) rd.violations.push_back("config.output_dir: must not be empty");
  if (!(c.convergence_tolerance > 0.0)) rd.violations.push_back("config.convergence_tolerance: must be positive");
  if (c.cbo.n_init < 2) rd.violations.push_back("cbo.n_init: must be at least 2");
  if (c.cbo.n_steps < 1) rd.violations.push_back("cbo.n_steps: must be at least 1");
  if (c.cbo.pool_size < 1) rd.violations.push_back("cbo.pool_size: must be at least 1");
  if (c.cbo.fit_starts < 1) rd.violations.push_back("cbo.fit_starts: must be at least 1");
  if (c.ga.pop_size < 2 || c.ga.pop_size % 2 != 0) rd.violations.push_back("ga.pop_size: must be even and at least 2");
  if (!(c.ga.crossover_prob >= 0.0 && c.ga.crossover_prob <= 1.0)) rd.violations.push_back("ga.crossover_prob: outside [0,1]");
  if (c.ga.mutation_prob && !(*c.ga.mutation_prob >= 0.0 && *c.ga.mutation_prob <= 1.0)) {
    rd.violations.push_back("ga.mutation_prob: outside [0,1]");
  }
  if (c.ga.tournament_size < 1) rd.violations.push_back("ga.tournament_size: must be at least 1");
  if (c.threshold && !(*c.threshold >= 0.0 && *c.threshold <= 1.0)) rd.violations.push_back("config.threshold: outside [0,1]");
  if (c.problem == ProblemKind::Analytical && (!c.bounds.empty() || c.rules)) {
    rd.violations.push_back("design: bounds and rules apply to simulator problems only");
  }
  if (c.reference_from_grid && c.problem != ProblemKind::Analytical) {
    rd.violations.push_back("config.reference_optimum: \"grid\" is only available for the analytical problem");
  }

  if (!rd.violations.empty()) {
    std::ostringstream os;
    os << "invalid config (" << rd.violations.size() << " violation" << (rd.violations.size() > 1 ? "s" : "") << "):";
    for (const auto& v : rd.violations) os << "\n  - " << v;
    throw ValidationError(os.str());
  }
  return c;
}

inline json to_json(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  j["problem"] = to_string(c.problem);
  j["optimizer"] = to_string(c.optimizer);
  j["replications"] = c.replications;
  j["root_seed"] = c.root_seed;
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir;
  j["threshold"] = c.threshold ? json(*c.threshold) : json(nullptr);
  j["reference_optimum"] = c.reference_from_grid ? json("grid") : c.reference_optimum ? json(*c.reference_optimum) : json(nullptr);
  j["convergence_tolerance"] = c.convergence_tolerance;
  j["report_steps"] = c.report_steps;
  j["cbo"] = {{"n_init", c.cbo.n_init},
              {"n_steps", c.cbo.n_steps},
              {"pool_size", c.cbo.pool_size},
              {"pool_mode", c.cbo.pool_mode == PoolMode::Fresh ? "fresh" : "fixed"},
              {"duplicate_tolerance", c.cbo.duplicate_tolerance},
              {"fit_starts", c.cbo.fit_starts},
              {"fit_max_evaluations", c.cbo.fit_max_evaluations}};
  j["ga"] = {{"pop_size", c.ga.pop_size},
             {"generations", c.ga.generations},
             {"crossover_prob", c.ga.crossover_prob},
             {"crossover_eta", c.ga.crossover_eta},
             {"mutation_prob", c.ga.mutation_prob ? json(*c.ga.mutation_prob) : json(nullptr)},
             {"mutation_eta", c.ga.mutation_eta},
             {"tournament_size", c.ga.tournament_size}};
  if (c.problem != ProblemKind::Analytical) {
    json design;
    design["bounds"] = json::object();
    for (const auto& [k, v] : c.bounds) design["bounds"][k] = {v.first, v.second};
    if (c.rules) {
      design["rules"] = json::array();
      for (auto r : *c.rules) design["rules"].push_back(problems::to_string(r));
    }
    j["design"] = design;
  }
  write_physics(j, c.cycle, c.kinetics, c.mechanics, c.simulation);
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

inline RunConfig load_run_config(const std::string& path) { return parse_run_config(read_json_file(path)); }

/// Simulator problem definition with config overrides applied.
inline problems::CureProblem cure_problem(const RunConfig& c) {
  auto p = c.problem == ProblemKind::Sim4pt ? problems::four_point_problem() : problems::two_point_problem();
  p.cycle = c.cycle;
  p.kinetics = c.kinetics;
  p.mechanics = c.mechanics;
  p.simulation = c.simulation;
  if (c.threshold) p.threshold = *c.threshold;
  if (c.rules) p.rules = *c.rules;
  if (!c.bounds.empty()) {
    auto lower = p.space.lower();
    auto upper = p.space.upper();
    std::vector<std::string> bad;
    for (const auto& [k, v] : c.bounds) {
      const auto& names = p.space.names();
      const auto it = std::find(names.begin(), names.end(), k);
      if (it == names.end()) {
        bad.push_back(k);
        continue;
      }
      const auto i = static_cast<std::size_t>(it - names.begin());
      lower[i] = v.first;
      upper[i] = v.second;
    }
    if (!bad.empty()) {
      std::string msg = "design.bounds: unknown dimension(s)";
      for (const auto& b : bad) msg += " '" + b + "'";
      throw ValidationError(msg);
    }
    try {
      p.space = DesignSpace(p.space.names(), lower, upper);
    } catch (const DomainError& e) {
      throw ValidationError(std::string("design.bounds: ") + e.what());
    }
  }
  return p;
}

inline double threshold_of(const RunConfig& c) {
  if (c.threshold) return *c.threshold;
  if (c.problem == ProblemKind::Analytical) return problems::AnalyticalPidProblem{}.threshold;
  return cure_problem(c).threshold;
}

inline BlackBox make_blackbox(const RunConfig& c) {
  if (c.problem == ProblemKind::Analytical) {
    problems::AnalyticalPidProblem p;
    if (c.threshold) p.threshold = *c.threshold;
    return problems::analytical_blackbox(p);
  }
  return problems::cure_blackbox(cure_problem(c));
}

}  // namespace curebo::study
