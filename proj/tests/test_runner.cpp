#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "sps/sps.hpp"

namespace fs = std::filesystem;

namespace {

class Runner : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sps_runner_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string sub(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

sps::RunConfig logistic_config() {
  sps::RunConfig cfg;
  cfg.problem.kind = sps::ProblemKind::synthetic;
  cfg.problem.n = 60;
  cfg.problem.d = 8;
  cfg.problem.lambda = 1e-2;
  cfg.optimizer.method = sps::Method::decsps;
  cfg.batch_size = 5;
  cfg.iters = 300;
  cfg.seeds = {0, 1, 2};
  return cfg;
}

sps::SeedResult seed_with(std::uint64_t seed, std::vector<std::pair<std::size_t, double>> rows) {
  sps::SeedResult s;
  s.seed = seed;
  for (auto [k, v] : rows) s.records.push_back({seed, k, v, v, v, v});
  return s;
}

}  // namespace

TEST_F(Runner, TracesAreByteIdentical) {
  auto cfg = logistic_config();
  cfg.out_dir = sub("a");
  const auto a = sps::run_experiment(cfg);
  cfg.out_dir = sub("b");
  const auto b = sps::run_experiment(cfg);
  ASSERT_EQ(a.written.size(), 3u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(fs::path(a.written[i]).filename(), fs::path(b.written[i]).filename());
    EXPECT_EQ(slurp(a.written[i]), slurp(b.written[i])) << a.written[i];
  }
  // Manifests differ only in the output directory they record.
  auto ma = sps::read_json_file(a.written[2]);
  auto mb = sps::read_json_file(b.written[2]);
  ma["config"].erase("out");
  mb["config"].erase("out");
  EXPECT_EQ(ma, mb);
}

TEST_F(Runner, ThreadCountDoesNotChangeResults) {
  auto cfg = logistic_config();
  const auto serial = sps::run_experiment(cfg).records();
  cfg.threads = 3;
  EXPECT_EQ(sps::run_experiment(cfg).records(), serial);
}

TEST_F(Runner, SuboptimalityIsNonNegative) {
  for (auto kind : {sps::ProblemKind::synthetic, sps::ProblemKind::quadratic, sps::ProblemKind::absolute}) {
    auto cfg = logistic_config();
    cfg.problem.kind = kind;
    cfg.problem.d = 4;
    cfg.problem.n = 20;
    if (kind == sps::ProblemKind::absolute) {
      cfg.problem.d = 1;
      cfg.optimizer.method = sps::Method::decsps_ns;
    }
    const auto res = sps::run_experiment(cfg);
    for (const auto& r : res.records()) {
      EXPECT_GE(r.f_sub, -cfg.reference_tol);
      EXPECT_GE(r.f_sub_avg_iterate, -cfg.reference_tol);
      EXPECT_GE(r.dist_sq, 0.0);
      EXPECT_GT(r.gamma, 0.0);
    }
  }
}

TEST_F(Runner, AveragedIterateRecomputes) {
  auto cfg = logistic_config();
  cfg.seeds = {4};
  const auto obj = sps::build_problem(cfg.problem);
  const auto ref = sps::solve_reference(obj, cfg.reference_tol);
  const auto res = sps::run_experiment(cfg, obj, ref);
  const auto& logistic = std::get<sps::LogisticObjective>(obj);

  // Replay the same seed and keep every iterate.
  std::vector<sps::Vector> xs;
  auto rng = sps::batch_stream(4);
  sps::run_trajectory(logistic, cfg.optimizer, cfg.batch_size, cfg.iters,
                      sps::initial_point(4, logistic.dim(), cfg.x0_scale), rng,
                      [&](std::size_t, const sps::Vector& x, const sps::StepResult&) { xs.push_back(x); });
  const auto recs = res.records();
  ASSERT_EQ(recs.size(), xs.size());
  sps::Vector sum = sps::Vector::Zero(static_cast<Eigen::Index>(logistic.dim()));
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sum += xs[k];
    ASSERT_EQ(recs[k].k, k);
    EXPECT_NEAR(recs[k].f_sub, logistic.full_value(xs[k]) - ref.f_star, 1e-10);
    EXPECT_NEAR(recs[k].f_sub_avg_iterate,
                logistic.full_value(sum / static_cast<double>(k + 1)) - ref.f_star, 1e-10);
  }
}

TEST_F(Runner, RecordEveryKeepsLastRow) {
  auto cfg = logistic_config();
  cfg.seeds = {0};
  cfg.iters = 95;
  cfg.record_every = 10;
  const auto recs = sps::run_experiment(cfg).records();
  ASSERT_EQ(recs.size(), 11u);
  EXPECT_EQ(recs.front().k, 0u);
  EXPECT_EQ(recs[9].k, 90u);
  EXPECT_EQ(recs.back().k, 94u);
}

TEST(Aggregate, SampleStdAndCommonRows) {
  const auto agg = sps::aggregate("x", {seed_with(0, {{0, 1.0}, {1, 5.0}}), seed_with(1, {{0, 3.0}})});
  ASSERT_EQ(agg.rows.size(), 1u);
  EXPECT_EQ(agg.rows[0].k, 0u);
  EXPECT_EQ(agg.rows[0].count, 2u);
  EXPECT_DOUBLE_EQ(agg.rows[0].f_sub_mean, 2.0);
  EXPECT_DOUBLE_EQ(agg.rows[0].f_sub_std, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(agg.rows[0].gamma_std, std::sqrt(2.0));

  const auto single = sps::aggregate("y", {seed_with(0, {{0, 1.0}, {3, 2.0}})});
  ASSERT_EQ(single.rows.size(), 2u);
  EXPECT_EQ(single.rows[1].f_sub_std, 0.0);
  EXPECT_TRUE(sps::aggregate("z", {}).rows.empty());
}

TEST_F(Runner, ManifestFields) {
  auto cfg = logistic_config();
  cfg.out_dir = sub("m");
  cfg.label = "trial";
  const auto res = sps::run_experiment(cfg);
  const auto manifest = sps::read_json_file(sub("m/trial.manifest.json"));
  EXPECT_EQ(manifest.at("label"), "trial");
  EXPECT_EQ(manifest.at("problem_hash"), sps::problem_hash(cfg.problem));
  EXPECT_EQ(manifest.at("n"), 60);
  EXPECT_EQ(manifest.at("d"), 8);
  EXPECT_EQ(manifest.at("seeds"), nlohmann::json({0, 1, 2}));
  EXPECT_DOUBLE_EQ(manifest.at("f_star").get<double>(), res.reference.f_star);
  EXPECT_FALSE(manifest.at("version").get<std::string>().empty());
  EXPECT_TRUE(manifest.at("halted").empty());
  EXPECT_EQ(manifest.at("config").at("optimizer"), "decsps");
  EXPECT_TRUE(fs::exists(sub("m/trial.csv")));
  EXPECT_TRUE(fs::exists(sub("m/trial.aggregate.csv")));
  EXPECT_TRUE(fs::exists(sps::reference_cache_path(sub("m"), res.problem_hash)));
}

TEST_F(Runner, JsonLinesOutput) {
  auto cfg = logistic_config();
  cfg.out_dir = sub("j");
  cfg.format = sps::TraceFormat::json_lines;
  const auto res = sps::run_experiment(cfg);
  EXPECT_EQ(sps::read_trace(res.written[0], sps::TraceFormat::json_lines), res.records());
}

TEST_F(Runner, ReferenceCacheIsReused) {
  auto cfg = logistic_config();
  const auto obj = sps::build_problem(cfg.problem);
  const auto first = sps::obtain_reference(obj, cfg.problem, 1e-10, sub("cache"));
  const auto path = sps::reference_cache_path(sub("cache"), sps::problem_hash(cfg.problem));
  ASSERT_TRUE(fs::exists(path));
  // Tamper with the cached value: a reuse must return it unchanged.
  auto j = sps::read_json_file(path);
  j["f_star"] = 123.0;
  sps::write_json(j, path);
  EXPECT_EQ(sps::obtain_reference(obj, cfg.problem, 1e-10, sub("cache")).f_star, 123.0);
  // A stricter tolerance than the cached one forces a fresh solve.
  EXPECT_NEAR(sps::obtain_reference(obj, cfg.problem, 1e-12, sub("cache")).f_star, first.f_star, 1e-12);
}

TEST(ProblemHash, StableAndSensitive) {
  sps::ProblemSpec a;
  a.kind = sps::ProblemKind::quadratic;
  EXPECT_EQ(sps::problem_hash(a), sps::problem_hash(a));
  EXPECT_EQ(sps::problem_hash(a).size(), 16u);
  auto b = a;
  b.seed = 1;
  EXPECT_NE(sps::problem_hash(a), sps::problem_hash(b));
  b = a;
  b.floor = 0.5;
  EXPECT_NE(sps::problem_hash(a), sps::problem_hash(b));
  // Fields the problem ignores leave the hash alone.
  b = a;
  b.lambda = 3.0;
  EXPECT_EQ(sps::problem_hash(a), sps::problem_hash(b));
}

TEST(Trajectory, HaltsWithDiagnostic) {
  const auto obj = sps::AbsoluteObjective::scalar({0.0, 0.0});
  sps::StepperConfig cfg;
  cfg.method = sps::Method::decsps_ns;
  auto rng = sps::batch_stream(0);
  std::size_t calls = 0;
  const auto out = sps::run_trajectory(obj, cfg, 1, 50, sps::Vector::Zero(1), rng,
                                       [&](std::size_t, const sps::Vector&, const sps::StepResult&) { ++calls; });
  EXPECT_TRUE(out.halted);
  EXPECT_EQ(out.steps, 0u);
  EXPECT_EQ(calls, 0u);
  EXPECT_NE(out.diagnostic.find("2 distinct batches at k=0"), std::string::npos) << out.diagnostic;
}

TEST(Trajectory, HoldPolicyKeepsIterating) {
  const auto obj = sps::AbsoluteObjective::scalar({0.0, 0.0});
  sps::StepperConfig cfg;
  cfg.method = sps::Method::decsps;
  auto rng = sps::batch_stream(0);
  std::vector<double> gammas;
  const auto out = sps::run_trajectory(
      obj, cfg, 1, 4, sps::Vector::Zero(1), rng,
      [&](std::size_t, const sps::Vector&, const sps::StepResult& r) { gammas.push_back(r.gamma); },
      sps::ZeroGradientPolicy::hold);
  EXPECT_FALSE(out.halted);
  EXPECT_EQ(out.steps, 4u);
  EXPECT_EQ(out.x_final[0], 0.0);
  ASSERT_EQ(gammas.size(), 4u);
  EXPECT_DOUBLE_EQ(gammas[3], cfg.gamma_b / 2.0);
}

TEST(Trajectory, ResampleSkipsDegenerateBatch) {
  // Component 0 is minimized at x = 0; component 1 is not. Only batch {1} steps.
  const auto obj = sps::AbsoluteObjective::scalar({0.0, 1.0});
  sps::StepperConfig cfg;
  cfg.method = sps::Method::decsps_ns;
  cfg.gamma_b = 0.5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rng = sps::batch_stream(seed);
    sps::Vector first_step;
    const auto out = sps::run_trajectory(obj, cfg, 1, 1, sps::Vector::Zero(1), rng,
                                         [&](std::size_t, const sps::Vector&, const sps::StepResult& r) {
                                           first_step = r.x_next;
                                         });
    EXPECT_FALSE(out.halted);
    EXPECT_DOUBLE_EQ(first_step[0], 0.5);
  }
}

TEST_F(Runner, GridRejectsMismatches) {
  auto a = logistic_config();
  auto b = a;
  b.iters = 10;
  EXPECT_THROW(sps::compare_grid({a, b}), sps::Error);
  b = a;
  b.seeds = {7};
  EXPECT_THROW(sps::compare_grid({a, b}), sps::Error);
  b = a;
  b.problem.n = 61;
  EXPECT_THROW(sps::compare_grid({a, b}), sps::Error);
  EXPECT_THROW(sps::compare_grid({}), sps::Error);
}

TEST_F(Runner, GridSingleCell) {
  const auto grid = sps::compare_grid({logistic_config()}, sub("single"));
  ASSERT_EQ(grid.cells.size(), 1u);
  ASSERT_EQ(grid.summary.size(), 1u);
  EXPECT_EQ(grid.summary[0].final_k, 299u);
  std::ifstream in(sub("single/summary.csv"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 2u);
}

TEST_F(Runner, GridDuplicateLabelsAreDistinct) {
  const auto cfg = logistic_config();
  const auto grid = sps::compare_grid({cfg, cfg}, sub("dup"));
  ASSERT_EQ(grid.cells.size(), 2u);
  EXPECT_NE(grid.cells[0].label, grid.cells[1].label);
  EXPECT_EQ(grid.cells[1].label, grid.cells[0].label + "_1");
}

namespace {

sps::RunConfig sweep_base() {
  sps::RunConfig cfg;
  cfg.problem.kind = sps::ProblemKind::synthetic;
  cfg.problem.n = 500;
  cfg.problem.d = 100;
  cfg.problem.lambda = 1e-4;
  cfg.optimizer.method = sps::Method::decsps;
  cfg.batch_size = 20;
  cfg.iters = 2000;
  cfg.seeds = {0, 1, 2, 3, 4};
  cfg.record_every = 100;
  return cfg;
}

}  // namespace

TEST_F(Runner, C0SweepIsRankedByFinalSuboptimality) {
  std::vector<sps::RunConfig> cfgs;
  for (double c0 : {0.5, 1.0, 2.0, 5.0}) {
    auto c = sweep_base();
    c.optimizer.c0 = c0;
    cfgs.push_back(c);
  }
  const auto grid = sps::compare_grid(cfgs, sub("c0"));
  ASSERT_EQ(grid.summary.size(), 4u);
  for (std::size_t i = 1; i < grid.summary.size(); ++i) {
    EXPECT_LE(grid.summary[i - 1].final_f_sub_mean, grid.summary[i].final_f_sub_mean);
  }
  for (const auto& row : grid.summary) {
    EXPECT_EQ(row.final_k, 1999u);
    EXPECT_GE(row.final_f_sub_2std, 0.0);
  }
  // The largest c0 takes the smallest steps and is slowest from a random start.
  EXPECT_NE(grid.summary.front().label.find("_c00.5_"), std::string::npos);
  EXPECT_NE(grid.summary.back().label.find("_c05_"), std::string::npos);
}

TEST_F(Runner, GammaBSweepNearlyOverlaps) {
  std::vector<sps::RunConfig> cfgs;
  for (double gb : {1.0, 10.0, 100.0, 1000.0}) {
    auto c = sweep_base();
    c.optimizer.gamma_b = gb;
    cfgs.push_back(c);
  }
  const auto grid = sps::compare_grid(cfgs);
  double lo = grid.summary.front().final_f_sub_mean;
  double hi = grid.summary.back().final_f_sub_mean;
  ASSERT_GT(lo, 0.0);
  EXPECT_LE(hi / lo, 2.0);
}

TEST(Config, JsonRoundTrip) {
  auto cfg = logistic_config();
  cfg.optimizer.gamma_ell = 0.02;
  cfg.optimizer.lower_bound = sps::LowerBoundPolicy::constant(0.25);
  cfg.problem.label_sign = sps::LabelSign::as_printed;
  cfg.zero_gradient = sps::ZeroGradientPolicy::hold;
  cfg.format = sps::TraceFormat::json_lines;
  const auto j = sps::config_to_json(cfg);
  const auto back = sps::config_from_json(j);
  EXPECT_EQ(sps::config_to_json(back), j);
  EXPECT_EQ(back.optimizer.lower_bound.kind, sps::LowerBoundPolicy::Kind::constant);
  EXPECT_EQ(back.optimizer.lower_bound.value, 0.25);
  EXPECT_EQ(back.seeds, cfg.seeds);
}

TEST(Config, LaterValuesOverride) {
  sps::RunConfig cfg;
  sps::apply_json(cfg, nlohmann::json::parse(R"({"optimizer": "sps_max", "gamma-b": 3, "seeds": "4"})"));
  sps::apply_json(cfg, nlohmann::json::parse(R"({"gamma_b": 7, "seeds": "2,9"})"));
  EXPECT_EQ(cfg.optimizer.method, sps::Method::sps_max);
  EXPECT_EQ(cfg.optimizer.gamma_b, 7.0);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{2, 9}));
}

TEST(Config, RejectsUnknownAndMalformed) {
  sps::RunConfig cfg;
  EXPECT_THROW(sps::apply_json(cfg, nlohmann::json::parse(R"({"learning_rate": 1})")), sps::Error);
  EXPECT_THROW(sps::apply_json(cfg, nlohmann::json::parse(R"({"iters": "many"})")), sps::Error);
  EXPECT_THROW(sps::apply_json(cfg, nlohmann::json::parse("[1, 2]")), sps::Error);
  EXPECT_THROW(sps::parse_seeds("0"), sps::Error);
  EXPECT_THROW(sps::parse_seeds("1,x"), sps::Error);
  EXPECT_EQ(sps::parse_seeds("3"), (std::vector<std::uint64_t>{0, 1, 2}));
}

TEST_F(Runner, BatchLargerThanDataIsRejected) {
  auto cfg = logistic_config();
  cfg.batch_size = 61;
  EXPECT_THROW(sps::run_experiment(cfg), sps::Error);
}
