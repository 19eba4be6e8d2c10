#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "curebo/study/oracle.hpp"
#include "curebo/study/study.hpp"

using namespace curebo;
using namespace curebo::study;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const auto p = fs::temp_directory_path() / ("curebo_test_" + tag);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunConfig small_study(const fs::path& out, OptimizerKind opt = OptimizerKind::Cbo) {
  RunConfig c = parse_run_config(json{{"problem", "analytical"}, {"reference_optimum", "grid"}});
  c.optimizer = opt;
  c.replications = 3;
  c.output_dir = out.string();
  c.cbo.n_init = 6;
  c.cbo.n_steps = 4;
  c.cbo.pool_size = 500;
  c.ga.pop_size = 10;
  c.ga.generations = 2;
  c.report_steps = {2, 4};
  return c;
}

}  // namespace

TEST(Percentile, Examples) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_DOUBLE_EQ(percentile(v, 50), 50.5);
  const std::vector<double> one{3.25};
  for (double p : {0.0, 5.0, 50.0, 95.0, 100.0}) EXPECT_EQ(percentile(one, p), 3.25);
  const std::vector<double> four{40, 10, 30, 20};
  EXPECT_NEAR(percentile(four, 5), 11.5, 1e-12);
  EXPECT_EQ(percentile(four, 0), 10.0);
  EXPECT_EQ(percentile(four, 100), 40.0);
  EXPECT_THROW(percentile(std::vector<double>{}, 50), DomainError);
}

TEST(Percentile, InfiniteEntriesStayOrdered) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> v{1.0, 2.0, inf, inf};
  EXPECT_EQ(percentile(v, 100), inf);
  EXPECT_EQ(percentile(v, 90), inf);
  EXPECT_DOUBLE_EQ(percentile(v, 0), 1.0);
}

TEST(Config, RoundTrip) {
  for (const auto* file : {"analytical_cbo.json", "analytical_ga.json", "analytical_compare.json",
                           "sim_r1.json", "sim_r2.json", "sim_4pt.json"}) {
    const auto c = load_run_config(std::string(CUREBO_CONFIG_DIR) + "/" + file);
    const auto j = to_json(c);
    const auto back = parse_run_config(j);
    EXPECT_EQ(to_json(back).dump(), j.dump()) << file;
  }
}

TEST(Config, CommittedExperimentsMatchSettings) {
  const auto cbo_cfg = load_run_config(std::string(CUREBO_CONFIG_DIR) + "/analytical_cbo.json");
  EXPECT_EQ(cbo_cfg.replications, 100u);
  EXPECT_EQ(cbo_cfg.cbo.n_init, 10u);
  EXPECT_EQ(cbo_cfg.cbo.n_steps, 30u);
  EXPECT_EQ(cbo_cfg.cbo.pool_size, 10000u);
  const auto r2 = load_run_config(std::string(CUREBO_CONFIG_DIR) + "/sim_r2.json");
  const auto p = cure_problem(r2);
  EXPECT_EQ(p.space.lower()[0], 10.0);
  EXPECT_EQ(p.space.upper()[0], 110.0);
  const auto four = load_run_config(std::string(CUREBO_CONFIG_DIR) + "/sim_4pt.json");
  EXPECT_DOUBLE_EQ(threshold_of(four), 0.96);
  EXPECT_EQ(cure_problem(four).rules.size(), 1u);
}

TEST(Config, ListsAllViolations) {
  const json bad = {{"problem", "analytical"},
                    {"replications", 0},
                    {"bogus", 1},
                    {"cbo", {{"n_init", 1}, {"pool_mode", "sometimes"}}},
                    {"ga", {{"pop_size", 7}}}};
  try {
    parse_run_config(bad);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    for (const auto* frag : {"replications", "bogus", "cbo.n_init", "cbo.pool_mode", "ga.pop_size"}) {
      EXPECT_NE(msg.find(frag), std::string::npos) << frag << " missing from: " << msg;
    }
  }
  EXPECT_THROW(parse_run_config(json{{"optimizer", "cbo"}}), ValidationError);
  EXPECT_THROW(parse_run_config(json{{"problem", "sim2pt"}, {"kinetics", {{"A9", 1.0}}}}), ValidationError);
}

TEST(Config, UnknownBoundDimension) {
  const auto c = parse_run_config(json{{"problem", "sim2pt"}, {"design", {{"bounds", {{"t9", {0, 1}}}}}}});
  EXPECT_THROW(cure_problem(c), ValidationError);
}

TEST(Config, MissingFileIsIoError) { EXPECT_THROW(load_run_config("/nonexistent/curebo.json"), IoError); }

TEST(Study, SingleReplicationPercentilesCoincide) {
  auto c = small_study(temp_dir("single"));
  c.replications = 1;
  c.optimizer = OptimizerKind::Both;
  const auto s = run_study(c);
  for (const auto& o : s.optimizers) {
    for (const auto& a : o.steps) {
      ASSERT_EQ(a.p5, a.median);
      ASSERT_EQ(a.median, a.p95);
    }
  }
}

TEST(Study, OrderedPercentilesAndAxis) {
  auto c = small_study(temp_dir("axis"), OptimizerKind::Both);
  c.replications = 5;
  const auto s = run_study(c, StudyOptions{false, {}});
  const auto* cbo = s.find("cbo");
  const auto* ga = s.find("ga");
  ASSERT_TRUE(cbo && ga);
  ASSERT_EQ(cbo->steps.size(), 5u);
  EXPECT_EQ(cbo->steps[0].evaluations, 6u);
  EXPECT_EQ(cbo->steps[4].evaluations, 10u);
  ASSERT_EQ(ga->steps.size(), 30u);
  EXPECT_EQ(ga->steps[0].evaluations, 1u);
  for (const auto* o : {cbo, ga}) {
    for (const auto& a : o->steps) {
      ASSERT_LE(*a.p5, *a.median);
      ASSERT_LE(*a.median, *a.p95);
    }
    for (const auto& k : o->contracts) EXPECT_TRUE(k.ok());
  }
  ASSERT_TRUE(s.reference_optimum.has_value());
  EXPECT_NEAR(*s.reference_optimum, 1.857013597, 1e-8);
}

TEST(Study, RerunIsByteIdentical) {
  const auto a = temp_dir("rerun_a"), b = temp_dir("rerun_b");
  auto ca = small_study(a, OptimizerKind::Both);
  auto cb = small_study(b, OptimizerKind::Both);
  cb.workers = 3;  // parallel workers must not change artifacts
  run_study(ca);
  run_study(cb);
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    const auto rel = fs::relative(entry.path(), a);
    if (!entry.is_regular_file() || rel == "timing.json" || rel == "summary.json") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
    ++compared;
  }
  EXPECT_EQ(compared, 3u + 3u + 2u + 2u);  // replication CSVs, event logs, convergence CSVs
  run_study(ca);
  EXPECT_EQ(slurp(a / "cbo" / "replication_000.csv"), slurp(b / "cbo" / "replication_000.csv"));
}

TEST(Study, ReplicationCsvSchema) {
  const auto dir = temp_dir("schema");
  run_study(small_study(dir));
  std::ifstream in(dir / "cbo" / "replication_000.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "eval,step,phase,t,T,t_norm,T_norm,f,g,admissible,feasible,acquisition,best_feasible");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 10u);
  std::ifstream conv(dir / "convergence_cbo.csv");
  std::getline(conv, header);
  EXPECT_EQ(header, "step,evaluations,n_feasible,mean,median,p5,p95");
  const auto summary = json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(summary.at("optimizers").at(0).at("report_steps").size(), 2u);
}

TEST(Study, UnwritableOutputFailsBeforeCompute) {
  const auto blocker = temp_dir("blocker");
  { std::ofstream(blocker) << "file, not a directory"; }
  auto c = small_study(blocker / "sub");
  c.cbo.n_steps = 1000;  // would take a long time if it ran
  EXPECT_THROW(run_study(c), IoError);
  fs::remove(blocker);
}

TEST(Oracle, GridSearchOnAnalytical) {
  const auto box = problems::analytical_blackbox();
  const auto r = grid_search(box, 201, 0.995);
  ASSERT_TRUE(r.f.has_value());
  EXPECT_EQ(r.nodes, 201u * 201u);
  EXPECT_NEAR(*r.f, 1.8570, 1e-3);
  EXPECT_GE(r.g, 0.995);
}
