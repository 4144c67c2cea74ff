#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "tncap/learn.hpp"

using namespace tncap;

namespace {

oracle::TTCores to_oracle(const TensorTrain& tt) {
  oracle::TTCores o;
  o.r.push_back(1);
  for (const auto& c : tt.cores) {
    o.d.push_back(c.shape()[1]);
    o.r.push_back(c.shape()[2]);
    o.g.emplace_back(c.data().begin(), c.data().end());
  }
  return o;
}

TEST(Target, ShapesAndDeterminism) {
  const auto a = generate_target({4, 4, 4, 4}, 8, 42);
  EXPECT_EQ(a.at("v1").shape(), (Shape{4, 8}));
  EXPECT_EQ(a.at("v2").shape(), (Shape{8, 4, 8}));
  EXPECT_EQ(a.at("v3").shape(), (Shape{8, 4, 8}));
  EXPECT_EQ(a.at("v4").shape(), (Shape{8, 4}));
  EXPECT_EQ(a, generate_target({4, 4, 4, 4}, 8, 42));
  EXPECT_NE(a, generate_target({4, 4, 4, 4}, 8, 43));
  for (const auto& [v, c] : a)
    for (double x : c.data()) {
      EXPECT_GE(x, -1.0);
      EXPECT_LT(x, 1.0);
    }
  const auto r1 = generate_target({3, 3, 3}, 1, 1);
  EXPECT_EQ(r1.at("v1").shape(), (Shape{3, 1}));
  EXPECT_EQ(r1.at("v2").shape(), (Shape{1, 3, 1}));
}

TEST(Dataset, LabelsAreSignsOfTheTarget) {
  const auto g = tt_structure({3, 3, 3}, 2);
  const auto w = generate_target({3, 3, 3}, 2, 5);
  const auto data = generate_dataset(g, w, 50, 9);
  const auto dense = contract(g, w);
  for (const auto& s : data) {
    EXPECT_EQ(s.x.shape(), (Shape{3, 3, 3}));
    EXPECT_EQ(s.y, inner_product(dense, s.x) >= 0 ? 1 : -1);
  }
}

TEST(Dataset, LabelBalance) {
  const auto g = tt_structure({4, 4, 4, 4}, 8);
  const auto data = generate_dataset(g, generate_target({4, 4, 4, 4}, 8, 1), 10000, 2);
  double pos = 0;
  for (const auto& s : data) pos += s.y > 0;
  // binomial(1e4, 1/2): sigma = 50
  EXPECT_LE(std::fabs(pos - 5000.0), 5 * 50.0);
}

TEST(Loss, ZeroMarginGivesLog2) {
  const auto g = tt_structure({2, 2, 2}, 2);
  CoreAssignment zero;
  for (const auto& v : g.vertices()) zero.emplace(v, DenseTensor(g.core_shape(v)));
  std::mt19937_64 rng(1);
  std::vector<LabeledSample> batch;
  for (int i = 0; i < 5; ++i) batch.push_back({DenseTensor({2, 2, 2}, oracle::random_values(8, rng)), i % 2 ? 1 : -1});
  EXPECT_NEAR(loss_and_gradient(g, zero, batch).first, std::log(2.0), 1e-15);
}

TEST(Loss, MatchesDenseOracle) {
  std::mt19937_64 rng(4);
  const auto model = initial_model({3, 2, 3}, 2, 7);
  std::vector<LabeledSample> batch;
  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  for (int i = 0; i < 6; ++i) {
    xs.push_back(oracle::random_values(18, rng));
    ys.push_back(i % 3 ? 1 : -1);
    batch.push_back({DenseTensor({3, 2, 3}, xs.back()), ys.back()});
  }
  std::vector<const LabeledSample*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  EXPECT_NEAR(loss_and_gradient(model, ptrs).loss, oracle::tt_logistic_loss(to_oracle(model), xs, ys), 1e-13);
}

TEST(Gradient, CentralFiniteDifferences) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pdist(2, 4), ddist(2, 3), rdist(1, 3);
  const double h = 1e-5;
  double worst = 0;
  for (int probe = 0; probe < 100; ++probe) {
    std::vector<std::int64_t> shape(static_cast<std::size_t>(pdist(rng)));
    for (auto& d : shape) d = ddist(rng);
    TensorTrain model = initial_model(shape, rdist(rng), rng());
    for (auto& c : model.cores)
      for (auto& x : c.data()) x *= 3.0;  // push margins away from zero
    const std::size_t size = shape_size(model.output_shape());
    std::vector<std::vector<double>> xs{oracle::random_values(size, rng)};
    std::vector<int> ys{probe % 2 ? 1 : -1};
    LabeledSample s{DenseTensor(model.output_shape(), xs[0]), ys[0]};
    const LabeledSample* ptr = &s;
    const auto lg = loss_and_gradient(model, std::span<const LabeledSample* const>(&ptr, 1));

    double num = 0, den = 0;
    for (std::size_t k = 0; k < model.order(); ++k)
      for (std::size_t i = 0; i < model.cores[k].size(); ++i) {
        auto o = to_oracle(model);
        o.g[k][i] += h;
        const double up = oracle::tt_logistic_loss(o, xs, ys);
        o.g[k][i] -= 2 * h;
        const double down = oracle::tt_logistic_loss(o, xs, ys);
        const double fd = (up - down) / (2 * h);
        const double an = lg.gradient.cores[k][i];
        num += (fd - an) * (fd - an);
        den += fd * fd;
      }
    const double rel = std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
    worst = std::max(worst, rel);
    EXPECT_LE(rel, 1e-5) << "probe " << probe;
  }
  RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(Init, UnitMarginScale) {
  // the margin over standard normal inputs should have variance close to one
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  double ss = 0;
  const int models = 200, inputs = 50;
  for (int m = 0; m < models; ++m) {
    const auto model = initial_model({4, 4, 4, 4}, 4, rng());
    std::vector<double> x(256);
    for (int i = 0; i < inputs; ++i) {
      for (auto& v : x) v = normal(rng);
      const double f = tt_inner_product(model, x);
      ss += f * f;
    }
  }
  EXPECT_NEAR(ss / (models * inputs), 1.0, 0.15);
}

TEST(Train, ZeroEpochsAndZeroRate) {
  ExperimentConfig cfg;
  cfg.target_shape = {3, 3, 3};
  cfg.target_rank = 2;
  cfg.model_rank = 2;
  cfg.train_size = 64;
  cfg.epochs = 0;
  const auto init_only = train(cfg, 5);
  const auto init = initial_model(cfg.target_shape, 2, derive_seed(derive_seed(5, kRunTag, std::size_t{0}), kInitTag, std::uint64_t{2}));
  EXPECT_EQ(init_only, to_core_assignment(tt_structure(cfg.target_shape, 2), init));
  cfg.epochs = 5;
  cfg.learning_rate = 0.0;
  EXPECT_EQ(train(cfg, 5), init_only);
  cfg.learning_rate = 1e-2;
  EXPECT_NE(train(cfg, 5), init_only);
}

TEST(Train, DivergenceIsReported) {
  ExperimentConfig cfg;
  cfg.target_shape = {3, 3, 3};
  cfg.target_rank = 2;
  cfg.model_rank = 2;
  cfg.train_size = 64;
  cfg.epochs = 50;
  cfg.learning_rate = 1e300;
  try {
    run_experiment(cfg, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::diverged);
    EXPECT_NE(std::string(e.what()).find("seed"), std::string::npos);
  }
}

TEST(Train, MatchedRankFitsRealizableData) {
  ExperimentConfig cfg;
  cfg.model_rank = cfg.target_rank;
  cfg.train_size = 4000;
  double total = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto model = to_tensor_train(tt_structure(cfg.target_shape, cfg.model_rank), train(cfg, seed));
    ExperimentConfig c = cfg;
    c.seed = seed;
    const auto rd = draw_run(c, 0, cfg.train_size);
    const double risk = zero_one_risk(model, rd.train);
    total += risk;
    EXPECT_LT(risk, 0.2) << "seed " << seed;
  }
  RecordProperty("mean_train_risk", std::to_string(total / 20));
}

TEST(Experiment, UntrainedModelHasNoGap) {
  ExperimentConfig cfg;
  cfg.runs = 1;
  cfg.epochs = 0;
  const auto res = run_experiment(cfg, 1);
  ASSERT_EQ(res.records.size(), 1u);
  // both risks near 1/2; 1000 train and 4000 test draws give sigma about 0.018
  EXPECT_NEAR(res.records[0].train_risk, 0.5, 0.08);
  EXPECT_NEAR(res.records[0].test_risk, 0.5, 0.04);
  EXPECT_LT(std::fabs(res.records[0].gap), 0.1);
}

TEST(Experiment, DeterministicAndSharedAcrossCells) {
  SweepConfig s;
  s.base.target_shape = {3, 3, 3};
  s.base.target_rank = 3;
  s.base.test_size = 200;
  s.base.epochs = 3;
  s.base.runs = 3;
  s.train_sizes = {50, 100};
  s.model_ranks = {1, 2};
  const auto a = run_sweep(s, 1), b = run_sweep(s, 3);
  ASSERT_EQ(a.records.size(), 12u);
  ASSERT_EQ(a.cells.size(), 4u);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].test_risk, b.records[i].test_risk);
    EXPECT_EQ(a.records[i].train_risk, b.records[i].train_risk);
  }
  // same run id, same seed in every cell
  EXPECT_EQ(a.records[0].seed, a.records[3].seed);
  EXPECT_EQ(a.cells[0].n, 50u);
  EXPECT_EQ(a.cells[1].model_rank, 2);
}

TEST(Summary, StatsOverRuns) {
  std::vector<ExperimentRecord> recs(3);
  const double gaps[] = {0.25, 0.5, -0.1};
  for (int i = 0; i < 3; ++i) {
    recs[i].n = 10;
    recs[i].model_rank = 2;
    recs[i].gap = gaps[i];
  }
  const auto c = summarize_cell(recs);
  EXPECT_NEAR(c.mean_gap, 0.65 / 3, 1e-15);
  EXPECT_EQ(c.positive_gap_runs, 2u);
  EXPECT_NEAR(c.mean_log2_gap, -1.5, 1e-15);
  EXPECT_NEAR(c.std_log2_gap, std::sqrt(0.5), 1e-15);
}

TEST(Config, Validation) {
  ExperimentConfig cfg;
  cfg.delta = 1.5;
  EXPECT_THROW(cfg.check(), Error);
  cfg = {};
  cfg.target_shape = {};
  EXPECT_THROW(cfg.check(), Error);
}

}  // namespace
