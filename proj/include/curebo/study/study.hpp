#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "curebo/study/config.hpp"
#include "curebo/study/percentile.hpp"

namespace curebo::study {

/// Across-replication statistics of the best feasible objective at one step.
/// Runs without a feasible incumbent count as +inf in the percentiles and
/// are left out of the mean.
struct StepAggregate {
  std::size_t step = 0;
  std::size_t evaluations = 0;
  std::size_t n_feasible = 0;
  std::optional<double> mean, median, p5, p95;
};

struct ContractCheck {
  bool budget_exact = true;
  bool trace_monotone = true;
  bool incumbent_feasible = true;
  bool complete = true;

  [[nodiscard]] bool ok() const { return budget_exact && trace_monotone && incumbent_feasible && complete; }
};

struct OptimizerSummary {
  std::string optimizer;
  std::size_t budget = 0;
  std::vector<StepAggregate> steps;
  std::vector<std::size_t> evaluation_counts;
  std::vector<std::optional<double>> final_best;
  std::vector<std::optional<std::size_t>> convergence_evaluations;
  std::vector<std::optional<std::size_t>> convergence_step;
  std::optional<double> median_convergence_evaluations;  // empty when the median run never converged
  std::vector<ContractCheck> contracts;
  std::vector<double> wall_times;

  /// Aggregate at the requested step, if that step exists.
  [[nodiscard]] const StepAggregate* at_step(std::size_t step) const {
    for (const auto& s : steps)
      if (s.step == step) return &s;
    return nullptr;
  }
};

struct StudySummary {
  RunConfig config;
  double threshold = 0.0;
  std::optional<double> reference_optimum;
  std::vector<OptimizerSummary> optimizers;
  double wall_time_seconds = 0.0;

  [[nodiscard]] const OptimizerSummary* find(const std::string& name) const {
    for (const auto& o : optimizers)
      if (o.optimizer == name) return &o;
    return nullptr;
  }
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }

inline json json_opt(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

inline void ensure_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok")) throw IoError("output directory '" + dir.string() + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  return out;
}

inline void write_replication_csv(std::ostream& os, const RunReport& r, const DesignSpace& space) {
  os << "eval,step,phase";
  for (const auto& n : space.names()) os << ',' << n;
  for (const auto& n : space.names()) os << ',' << n << "_norm";
  os << ",f,g,admissible,feasible,acquisition,best_feasible\n";
  for (std::size_t i = 0; i < r.evaluations.size(); ++i) {
    const auto& e = r.evaluations[i];
    os << i + 1 << ',' << e.step_index << ',' << to_string(e.phase);
    for (double v : e.raw) os << ',' << fmt17(v);
    for (double v : e.x.coords()) os << ',' << fmt17(v);
    os << ',' << fmt17(e.f) << ',' << fmt17(e.g) << ',' << (e.admissible ? 1 : 0) << ','
       << (is_feasible(e, r.threshold) ? 1 : 0) << ',' << fmt17(e.acquisition) << ','
       << fmt_opt(r.best_trace[i]) << '\n';
  }
}

inline ContractCheck check_contracts(const RunReport& r, std::size_t budget) {
  ContractCheck c;
  c.complete = r.complete;
  c.budget_exact = r.evaluations.size() == budget && r.best_trace.size() == budget;
  for (std::size_t i = 1; i < r.best_trace.size(); ++i) {
    const auto& a = r.best_trace[i - 1];
    const auto& b = r.best_trace[i];
    if (a && (!b || *b > *a)) c.trace_monotone = false;
  }
  if (r.x_star.present()) {
    const auto idx = *r.x_star.index;
    c.incumbent_feasible = idx < r.evaluations.size() && is_feasible(r.evaluations[idx], r.threshold) &&
                           r.evaluations[idx].f == *r.x_star.y_min;
    const auto best = best_feasible(r.evaluations, r.threshold);
    c.incumbent_feasible = c.incumbent_feasible && best.present() && *best.y_min == *r.x_star.y_min;
  } else {
    c.incumbent_feasible = !best_feasible(r.evaluations, r.threshold).present();
  }
  return c;
}

}  // namespace detail

struct StudyOptions {
  bool write_files = true;
  std::function<void(const std::string&)> log;
};

/// Runs one optimizer for every replication. Replications run on worker
/// threads; a single writer emits per-replication CSVs in index order.
inline OptimizerSummary run_optimizer_study(const RunConfig& cfg, const std::string& optimizer, double threshold,
                                            const std::optional<double>& reference, const StudyOptions& opt) {
  const bool is_cbo = optimizer == "cbo";
  const auto problem = make_blackbox(cfg);
  const std::size_t budget =
      is_cbo ? cfg.cbo.n_init + cfg.cbo.n_steps : cfg.ga.pop_size * (cfg.ga.generations + 1);
  const auto dir = std::filesystem::path(cfg.output_dir) / optimizer;
  if (opt.write_files) detail::ensure_writable(dir);

  auto run_one = [&](std::size_t index) {
    const std::uint64_t seed = cfg.root_seed + index;
    if (is_cbo) {
      CboConfig c;
      c.n_init = cfg.cbo.n_init;
      c.n_steps = cfg.cbo.n_steps;
      c.pool_size = cfg.cbo.pool_size;
      c.pool_mode = cfg.cbo.pool_mode;
      c.duplicate_tolerance = cfg.cbo.duplicate_tolerance;
      c.fit.starts = cfg.cbo.fit_starts;
      c.fit.max_evaluations_per_start = cfg.cbo.fit_max_evaluations;
      c.threshold = threshold;
      c.seed = seed;
      return run_cbo(problem, c);
    }
    GaConfig g;
    g.pop_size = cfg.ga.pop_size;
    g.generations = cfg.ga.generations;
    g.crossover_prob = cfg.ga.crossover_prob;
    g.crossover_eta = cfg.ga.crossover_eta;
    g.mutation_prob = cfg.ga.mutation_prob;
    g.mutation_eta = cfg.ga.mutation_eta;
    g.tournament_size = cfg.ga.tournament_size;
    g.threshold = threshold;
    g.seed = seed;
    return run_ga(problem, g);
  };

  const std::size_t n = cfg.replications;
  std::vector<std::optional<RunReport>> slots(n);
  std::exception_ptr failure;
  std::mutex m;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || stop) return;
      try {
        auto r = run_one(i);
        std::lock_guard lk(m);
        slots[i] = std::move(r);
      } catch (...) {
        std::lock_guard lk(m);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
      cv.notify_all();
    }
  };
  std::vector<std::thread> pool;
  const std::size_t workers = std::min(cfg.workers, n);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);

  OptimizerSummary s;
  s.optimizer = optimizer;
  s.budget = budget;
  std::vector<std::vector<std::optional<double>>> traces;
  std::ofstream events;
  if (opt.write_files) events = detail::open_out(dir / "events.log");

  try {
    for (std::size_t i = 0; i < n; ++i) {
      RunReport r;
      {
        std::unique_lock lk(m);
        cv.wait(lk, [&] { return slots[i].has_value() || failure; });
        if (!slots[i]) std::rethrow_exception(failure);
        r = std::move(*slots[i]);
        slots[i].reset();
      }
      if (opt.write_files) {
        char name[64];
        std::snprintf(name, sizeof name, "replication_%03zu.csv", i);
        auto out = detail::open_out(dir / name);
        detail::write_replication_csv(out, r, problem.space());
        for (const auto& e : r.events) events << "replication " << i << ": " << e << '\n';
        if (!out || !events) throw IoError("write failed under '" + dir.string() + "'");
      }
      s.evaluation_counts.push_back(r.evaluations.size());
      s.final_best.push_back(r.x_star.y_min);
      s.contracts.push_back(detail::check_contracts(r, budget));
      s.wall_times.push_back(r.wall_time_seconds);
      std::optional<std::size_t> conv;
      if (reference) {
        for (std::size_t k = 0; k < r.best_trace.size(); ++k) {
          if (r.best_trace[k] && *r.best_trace[k] <= *reference + cfg.convergence_tolerance) {
            conv = k + 1;
            break;
          }
        }
      }
      s.convergence_evaluations.push_back(conv);
      if (conv) {
        s.convergence_step.push_back(is_cbo ? (*conv > cfg.cbo.n_init ? *conv - cfg.cbo.n_init : 0) : *conv);
      } else {
        s.convergence_step.push_back(std::nullopt);
      }
      traces.push_back(std::move(r.best_trace));
      if (opt.log) {
        opt.log(optimizer + " replication " + std::to_string(i + 1) + "/" + std::to_string(n) + " best " +
                (s.final_best.back() ? detail::fmt17(*s.final_best.back()) : std::string("none")));
      }
    }
  } catch (...) {
    stop = true;
    for (auto& t : pool) t.join();
    throw;
  }
  for (auto& t : pool) t.join();

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> axis;
  if (is_cbo) {
    for (std::size_t k = 0; k <= cfg.cbo.n_steps; ++k) axis.push_back(k);
  } else {
    for (std::size_t k = 1; k <= budget; ++k) axis.push_back(k);
  }
  for (const auto step : axis) {
    StepAggregate a;
    a.step = step;
    a.evaluations = is_cbo ? cfg.cbo.n_init + step : step;
    std::vector<double> vals;
    double sum = 0.0;
    for (const auto& tr : traces) {
      const auto v = a.evaluations <= tr.size() && a.evaluations > 0 ? tr[a.evaluations - 1] : std::nullopt;
      if (v) {
        ++a.n_feasible;
        sum += *v;
        vals.push_back(*v);
      } else {
        vals.push_back(inf);
      }
    }
    if (a.n_feasible > 0) a.mean = sum / static_cast<double>(a.n_feasible);
    a.median = percentile(vals, 50.0);
    a.p5 = percentile(vals, 5.0);
    a.p95 = percentile(vals, 95.0);
    s.steps.push_back(a);
  }
  if (reference) {
    std::vector<double> ce;
    for (const auto& c : s.convergence_evaluations) ce.push_back(c ? static_cast<double>(*c) : inf);
    const double med = median(ce);
    if (std::isfinite(med)) s.median_convergence_evaluations = med;
  }
  return s;
}

inline json summary_json(const StudySummary& s) {
  json j;
  j["config"] = to_json(s.config);
  j["threshold"] = s.threshold;
  j["reference_optimum"] = detail::json_opt(s.reference_optimum);
  j["optimizers"] = json::array();
  for (const auto& o : s.optimizers) {
    json oj;
    oj["optimizer"] = o.optimizer;
    oj["budget"] = o.budget;
    oj["replications"] = o.evaluation_counts.size();
    oj["evaluation_counts"] = o.evaluation_counts;
    json fb = json::array();
    for (const auto& v : o.final_best) fb.push_back(detail::json_opt(v));
    oj["final_best"] = fb;
    json conv = json::array();
    for (const auto& c : o.convergence_evaluations) conv.push_back(c ? json(*c) : json(nullptr));
    oj["convergence_evaluations"] = conv;
    json cstep = json::array();
    for (const auto& c : o.convergence_step) cstep.push_back(c ? json(*c) : json(nullptr));
    oj["convergence_step"] = cstep;
    oj["median_convergence_evaluations"] = detail::json_opt(o.median_convergence_evaluations);
    std::size_t ok = 0;
    for (const auto& c : o.contracts) ok += c.ok() ? 1 : 0;
    oj["contracts_ok"] = ok;
    auto row = [](const StepAggregate& a) {
      return json{{"step", a.step},
                  {"evaluations", a.evaluations},
                  {"n_feasible", a.n_feasible},
                  {"mean", detail::json_opt(a.mean)},
                  {"median", detail::json_opt(a.median)},
                  {"p5", detail::json_opt(a.p5)},
                  {"p95", detail::json_opt(a.p95)}};
    };
    json rep = json::array();
    for (auto k : s.config.report_steps)
      if (const auto* a = o.at_step(k)) rep.push_back(row(*a));
    oj["report_steps"] = rep;
    if (!o.steps.empty()) oj["final"] = row(o.steps.back());
    j["optimizers"].push_back(oj);
  }
  return j;
}

inline void write_convergence_csv(std::ostream& os, const OptimizerSummary& o) {
  os << "step,evaluations,n_feasible,mean,median,p5,p95\n";
  for (const auto& a : o.steps) {
    os << a.step << ',' << a.evaluations << ',' << a.n_feasible << ',' << detail::fmt_opt(a.mean) << ','
       << detail::fmt_opt(a.median) << ',' << detail::fmt_opt(a.p5) << ',' << detail::fmt_opt(a.p95) << '\n';
  }
}

/// Resolve the reference optimum used for convergence counting.
inline std::optional<double> resolve_reference(const RunConfig& cfg, double threshold) {
  if (cfg.reference_optimum) return cfg.reference_optimum;
  if (cfg.reference_from_grid) {
    problems::AnalyticalPidProblem p;
    p.threshold = threshold;
    const auto g = problems::grid_oracle(p);
    if (!g.found) throw DomainError("grid oracle found no feasible node");
    return g.u;
  }
  return std::nullopt;
}

/// Run every replication of every requested optimizer and write artifacts.
inline StudySummary run_study(const RunConfig& cfg, const StudyOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto root = std::filesystem::path(cfg.output_dir);
  if (opt.write_files) detail::ensure_writable(root);
  make_blackbox(cfg);  // surfaces config errors before any work

  StudySummary s;
  s.config = cfg;
  s.threshold = threshold_of(cfg);
  s.reference_optimum = resolve_reference(cfg, s.threshold);
  std::vector<std::string> names;
  if (cfg.optimizer != OptimizerKind::Ga) names.push_back("cbo");
  if (cfg.optimizer != OptimizerKind::Cbo) names.push_back("ga");
  for (const auto& n : names) {
    s.optimizers.push_back(run_optimizer_study(cfg, n, s.threshold, s.reference_optimum, opt));
    if (opt.write_files) {
      auto out = detail::open_out(root / ("convergence_" + n + ".csv"));
      write_convergence_csv(out, s.optimizers.back());
    }
  }
  s.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (opt.write_files) {
    auto out = detail::open_out(root / "summary.json");
    out << summary_json(s).dump(2) << '\n';
    json timing;
    timing["wall_time_seconds"] = s.wall_time_seconds;
    for (const auto& o : s.optimizers) timing[o.optimizer] = o.wall_times;
    auto tout = detail::open_out(root / "timing.json");
    tout << timing.dump(2) << '\n';
    if (!out || !tout) throw IoError("write failed under '" + root.string() + "'");
  }
  return s;
}

}  // namespace curebo::study
