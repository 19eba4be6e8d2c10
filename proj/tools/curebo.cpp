// curebo: run optimization studies, brute-force oracles and cure traces.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "curebo/study/oracle.hpp"
#include "curebo/study/study.hpp"

namespace {

using namespace curebo;
using curebo::study::json;

int exit_code(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Domain:
    case ErrorCategory::Validation: return 2;
    case ErrorCategory::Io: return 3;
    case ErrorCategory::Numerical: return 4;
  }
  return 1;
}

std::string num(double v, int prec = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

int cmd_run(const std::string& path, bool quiet) {
  const auto cfg = study::load_run_config(path);
  study::StudyOptions opt;
  if (!quiet) opt.log = [](const std::string& s) { std::cerr << s << '\n'; };
  const auto s = study::run_study(cfg, opt);
  std::cout << "study '" << cfg.name << "' on " << study::to_string(cfg.problem) << ", threshold "
            << num(s.threshold, 3) << ", " << cfg.replications << " replication(s)\n";
  if (s.reference_optimum) std::cout << "reference optimum " << num(*s.reference_optimum) << '\n';
  for (const auto& o : s.optimizers) {
    std::cout << "\n[" << o.optimizer << "] budget " << o.budget << " evaluations\n";
    std::cout << "  step   evals  feasible      median          p5         p95\n";
    auto row = [&](const study::StepAggregate& a) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "  %4zu  %6zu  %8zu  %10s  %10s  %10s\n", a.step, a.evaluations, a.n_feasible,
                    a.median && std::isfinite(*a.median) ? num(*a.median).c_str() : "-",
                    a.p5 && std::isfinite(*a.p5) ? num(*a.p5).c_str() : "-",
                    a.p95 && std::isfinite(*a.p95) ? num(*a.p95).c_str() : "-");
      std::cout << buf;
    };
    if (cfg.report_steps.empty()) {
      row(o.steps.back());
    } else {
      for (auto k : cfg.report_steps)
        if (const auto* a = o.at_step(k)) row(*a);
    }
    if (s.reference_optimum) {
      std::cout << "  median evaluations to reach reference + " << cfg.convergence_tolerance << ": "
                << (o.median_convergence_evaluations ? num(*o.median_convergence_evaluations, 1) : "not reached")
                << '\n';
    }
    std::size_t ok = 0;
    for (const auto& c : o.contracts) ok += c.ok() ? 1 : 0;
    std::cout << "  run contracts satisfied: " << ok << "/" << o.contracts.size() << '\n';
  }
  std::cout << "\nwrote " << cfg.output_dir << " (" << num(s.wall_time_seconds, 1) << " s)\n";
  return 0;
}

int cmd_oracle(const std::string& which, std::size_t grid) {
  study::RunConfig cfg;
  if (which.size() > 5 && which.substr(which.size() - 5) == ".json") {
    cfg = study::load_run_config(which);
  } else {
    cfg = study::parse_run_config(json{{"problem", which}});
  }
  const auto t0 = std::chrono::steady_clock::now();
  const double c = study::threshold_of(cfg);
  if (cfg.problem == study::ProblemKind::Analytical) {
    problems::AnalyticalPidProblem p;
    p.threshold = c;
    const auto g = problems::grid_oracle(p, grid ? grid : 2001);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!g.found) {
      std::cout << "no feasible grid node\n";
      return 0;
    }
    const auto space = problems::analytical_space();
    const auto raw = space.denormalize(DesignPoint({g.t, g.T}));
    std::cout << "feasible minimum u = " << num(g.u, 9) << " at t = " << num(g.t) << ", T = " << num(g.T)
              << " (raw t = " << num(raw[0], 3) << ", T = " << num(raw[1], 3) << "), DoC = " << num(g.doc)
              << "\n" << g.feasible_nodes << " feasible nodes, " << num(secs, 2) << " s\n";
    return 0;
  }
  const auto box = study::make_blackbox(cfg);
  const std::size_t n = grid ? grid : (box.space().dims() == 2 ? 41 : 7);
  const auto r = study::grid_search(box, n, c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto base = problems::baseline_outcome(study::cure_problem(cfg));
  std::cout << "baseline u = " << num(base.f, 9) << ", DoC = " << num(base.g) << '\n';
  if (!r.f) {
    std::cout << "no feasible grid node among " << r.nodes << '\n';
    return 0;
  }
  std::cout << "feasible minimum u = " << num(*r.f, 9) << " at";
  const auto& names = box.space().names();
  for (std::size_t i = 0; i < names.size(); ++i) std::cout << (i ? ", " : " ") << names[i] << " = " << num(r.raw[i], 3);
  std::cout << ", DoC = " << num(r.g) << "\n" << r.feasible_nodes << "/" << r.nodes << " feasible nodes, "
            << num(secs, 2) << " s\n";
  return 0;
}

int cmd_trace(const std::string& path, const std::string& output) {
  const auto j = study::read_json_file(path);
  study::detail::Reader rd;
  rd.unknown_keys(j, "trace", {"variant", "params", "vertices", "cycle", "kinetics", "mechanics", "simulation"});
  problems::CycleSettings cs;
  problems::KineticParams kin;
  problems::MechanicalParams mech;
  problems::SimulationSettings sim;
  study::read_physics(j, rd, cs, kin, mech, sim);
  std::string variant = "baseline";
  rd.string(j, "variant", "trace", variant);
  std::vector<double> params;
  if (j.contains("params")) {
    if (j.at("params").is_array()) {
      for (const auto& v : j.at("params")) {
        if (v.is_number()) params.push_back(v.get<double>());
        else rd.violations.push_back("trace.params: entries must be numbers");
      }
    } else {
      rd.violations.push_back("trace.params: expected an array");
    }
  }
  std::vector<problems::CycleVertex> vertices;
  if (j.contains("vertices")) {
    for (const auto& v : j.at("vertices")) {
      if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        vertices.push_back({v[0].get<double>(), v[1].get<double>()});
      } else {
        rd.violations.push_back("trace.vertices: expected [time, temperature] pairs");
      }
    }
  }
  problems::CycleVariant kind = problems::CycleVariant::Baseline;
  if (variant == "two_point") kind = problems::CycleVariant::TwoPoint;
  else if (variant == "four_point") kind = problems::CycleVariant::FourPoint;
  else if (variant != "baseline" && variant != "custom") {
    rd.violations.push_back("trace.variant: expected baseline, two_point, four_point or custom");
  }
  if (variant == "custom" && vertices.empty()) rd.violations.push_back("trace.vertices: required for custom cycles");
  if (!rd.violations.empty()) {
    std::string msg = "invalid trace config:";
    for (const auto& v : rd.violations) msg += "\n  - " + v;
    throw ValidationError(msg);
  }
  const auto cycle = variant == "custom" ? problems::CureCycle(vertices) : problems::build_cycle(kind, params, cs);
  const auto tr = problems::simulate_cure(cycle, kin, mech, sim);
  if (output.empty()) {
    problems::write_trace_csv(std::cout, tr);
  } else {
    std::ofstream out(output);
    if (!out) throw IoError("cannot write '" + output + "'");
    problems::write_trace_csv(out, tr);
    if (!out) throw IoError("write failed for '" + output + "'");
  }
  std::cerr << "final DoC " << num(tr.final_doc) << ", u proxy " << num(tr.u_proxy, 9) << ", gel "
            << (tr.gel_index ? num(tr.time[*tr.gel_index], 1) + " min" : std::string("not reached")) << ", vitrification "
            << (tr.vitrification_index ? num(tr.time[*tr.vitrification_index], 1) + " min" : std::string("not reached"))
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained Bayesian optimization of composite cure cycles"};
  app.require_subcommand(1);

  std::string config_path;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a replicated optimization study from a JSON config");
  run->add_option("config", config_path, "Study config file")->required();
  run->add_flag("-q,--quiet", quiet, "Suppress per-replication progress");

  std::string problem;
  std::size_t grid = 0;
  auto* oracle = app.add_subcommand("oracle", "Brute-force feasible minimum of a problem");
  oracle->add_option("problem", problem, "analytical, sim2pt, sim4pt or a study config file")->required();
  oracle->add_option("--grid", grid, "Grid nodes per dimension");

  std::string trace_path, trace_out;
  auto* trace = app.add_subcommand("trace", "Simulate one cure cycle and write its state trace as CSV");
  trace->add_option("config", trace_path, "Cycle config file")->required();
  trace->add_option("-o,--output", trace_out, "Output CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) return cmd_run(config_path, quiet);
    if (*oracle) return cmd_oracle(problem, grid);
    if (*trace) return cmd_trace(trace_path, trace_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
