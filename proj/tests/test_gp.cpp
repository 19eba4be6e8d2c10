#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <json.hpp>

#include "curebo/gp.hpp"
#include "support/datasets.hpp"

using namespace curebo;

using testdata::Dataset;
using testdata::random_dataset;
using testdata::random_queries;

TEST(Matern52, Values) {
  KernelParams p{{1.0}, 1.0};
  EXPECT_DOUBLE_EQ(matern52(DesignPoint({0.3}), DesignPoint({0.3}), p), 1.0);
  const double s5 = std::sqrt(5.0);
  const double expect = (1.0 + s5 + 5.0 / 3.0) * std::exp(-s5);
  EXPECT_NEAR(matern52(DesignPoint({0.0}), DesignPoint({1.0}), p), expect, 1e-15);
  EXPECT_NEAR(expect, 0.5240, 5e-5);
  KernelParams tiny{{1e-3}, 1.0};
  EXPECT_LT(matern52(DesignPoint({0.0}), DesignPoint({1.0}), tiny), 1e-300);
}

TEST(Matern52, ArdScalesEachDimension) {
  KernelParams p{{0.5, 2.0}, 1.0};
  // r_d = sqrt((0.2/0.5)^2 + (0.6/2)^2) = 0.5
  const double r = 0.5, s5 = std::sqrt(5.0);
  const double expect = (1.0 + s5 * r + 5.0 * r * r / 3.0) * std::exp(-s5 * r);
  EXPECT_NEAR(matern52(DesignPoint({0.1, 0.2}), DesignPoint({0.3, 0.8}), p), expect, 1e-15);
}

TEST(GpFit, ConstantOutputs) {
  const std::vector<DesignPoint> x{DesignPoint({0.1}), DesignPoint({0.5}), DesignPoint({0.9})};
  const std::vector<double> y(3, 2.5);
  const auto gp = GpSurrogate::fit(x, y);
  EXPECT_DOUBLE_EQ(gp.mu_hat(), 2.5);
  EXPECT_EQ(gp.sigma2_hat(), 0.0);
  for (double q : {0.0, 0.3, 0.77, 1.0}) EXPECT_DOUBLE_EQ(gp.predict(DesignPoint({q})).mean, 2.5);
}

TEST(GpFit, RejectsBadInputs) {
  const std::vector<DesignPoint> one{DesignPoint({0.1})};
  const std::vector<double> y1{1.0};
  EXPECT_THROW(GpSurrogate::fit(one, y1), DomainError);
  const std::vector<DesignPoint> two{DesignPoint({0.1}), DesignPoint({0.4})};
  const std::vector<double> y3{1.0, 2.0, 3.0};
  EXPECT_THROW(GpSurrogate::fit(two, y3), DomainError);
  const std::vector<double> ynan{1.0, std::nan("")};
  EXPECT_THROW(GpSurrogate::fit(two, ynan), DomainError);
  const std::vector<double> y2{1.0, 2.0};
  const auto gp = GpSurrogate::fit(two, y2);
  EXPECT_THROW((void)gp.predict(DesignPoint({0.1, 0.2})), DomainError);
}

TEST(GpFit, InterpolatesTrainingData) {
  std::mt19937_64 gen(1);
  const auto ds = random_dataset(gen, 15, 2);
  const auto gp = GpSurrogate::fit(ds.x, ds.y);
  const double range = *std::max_element(ds.y.begin(), ds.y.end()) - *std::min_element(ds.y.begin(), ds.y.end());
  for (std::size_t i = 0; i < ds.x.size(); ++i) {
    const auto p = gp.predict(ds.x[i]);
    EXPECT_NEAR(p.mean, ds.y[i], 1e-6 * range);
    EXPECT_LE(p.variance, 1e-6 * gp.sigma2_hat());
  }
}

TEST(GpFit, LeaveOneOutSine) {
  std::vector<DesignPoint> x;
  std::vector<double> y;
  for (int i = 0; i < 5; ++i) {
    const double xi = i / 4.0;
    x.emplace_back(std::vector<double>{xi});
    y.push_back(std::sin(2.0 * std::numbers::pi * xi));
  }
  for (std::size_t k = 0; k < 5; ++k) {
    std::vector<DesignPoint> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < 5; ++i) {
      if (i == k) continue;
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
    const auto gp = GpSurrogate::fit(xs, ys);
    const auto p = gp.predict(x[k]);
    EXPECT_LE(std::abs(p.mean - y[k]), 3.0 * p.stddev()) << "held out " << k;
  }
}

TEST(GpPredict, FarFieldLimit) {
  const std::vector<DesignPoint> x{DesignPoint({0.0}), DesignPoint({0.02})};
  const std::vector<double> y{1.0, 3.0};
  FitSettings s;
  s.optimize = false;
  const auto gp = GpSurrogate::fit(x, y, s);
  const auto p = gp.predict(DesignPoint({1.0}));
  const Eigen::MatrixXd r = gp.correlation();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
  const double q = ones.dot(r.ldlt().solve(ones));
  EXPECT_NEAR(p.mean, gp.mu_hat(), 1e-12);
  EXPECT_NEAR(p.variance, gp.sigma2_hat() * (1.0 + 1.0 / q), 1e-9 * gp.sigma2_hat());
}

TEST(GpPredict, SymmetricMidpoint) {
  const std::vector<DesignPoint> x{DesignPoint({0.25}), DesignPoint({0.75})};
  const std::vector<double> y{-1.0, 4.0};
  const auto gp = GpSurrogate::fit(x, y);
  EXPECT_NEAR(gp.predict(DesignPoint({0.5})).mean, 1.5, 1e-12);
}

TEST(GpPredict, BatchMatchesSingle) {
  std::mt19937_64 gen(5);
  const auto ds = random_dataset(gen, 12, 2);
  const auto gp = GpSurrogate::fit(ds.x, ds.y);
  const auto q = random_queries(gen, 50, 2);
  const auto batch = gp.predict(q);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto one = gp.predict(q[i]);
    EXPECT_EQ(one.mean, batch[i].mean);
    EXPECT_EQ(one.variance, batch[i].variance);
  }
}

TEST(GpFit, FactorReproducesJitteredCorrelation) {
  std::mt19937_64 gen(9);
  const auto ds = random_dataset(gen, 20, 4);
  const auto gp = GpSurrogate::fit(ds.x, ds.y);
  const Eigen::MatrixXd r = gp.correlation();
  for (Eigen::Index i = 0; i < r.rows(); ++i) EXPECT_DOUBLE_EQ(r(i, i), 1.0);
  const Eigen::MatrixXd& l = gp.factor();
  const Eigen::MatrixXd target = r + gp.jitter() * Eigen::MatrixXd::Identity(r.rows(), r.cols());
  EXPECT_LE((l * l.transpose() - target).norm(), 1e-8 * target.norm());
  EXPECT_GE(gp.jitter(), 1e-10);
  EXPECT_LE(gp.jitter(), 1e-4);
}

TEST(GpFit, ProfileEstimatesConsistent) {
  std::mt19937_64 gen(10);
  const auto ds = random_dataset(gen, 18, 2);
  const auto gp = GpSurrogate::fit(ds.x, ds.y);
  // recompute mu and sigma^2 from the stored factor with a separate solve
  const Eigen::MatrixXd& l = gp.factor();
  const Eigen::VectorXd& y = gp.train_y();
  const Eigen::Index n = y.size();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const auto llt = l.triangularView<Eigen::Lower>();
  const Eigen::VectorXd ri1 = llt.transpose().solve(llt.solve(ones));
  const Eigen::VectorXd riy = llt.transpose().solve(llt.solve(y));
  const double mu = ones.dot(riy) / ones.dot(ri1);
  const Eigen::VectorXd res = y - mu * ones;
  const double s2 = res.dot(llt.transpose().solve(llt.solve(res))) / static_cast<double>(n);
  EXPECT_NEAR(gp.mu_hat(), mu, 1e-10 * std::max(1.0, std::abs(mu)));
  EXPECT_NEAR(gp.sigma2_hat(), s2, 1e-10 * s2);
}

TEST(GpFit, LikelihoodNotBelowInitialization) {
  std::mt19937_64 gen(12);
  const auto ds = random_dataset(gen, 25, 2);
  const auto gp = GpSurrogate::fit(ds.x, ds.y);
  EXPECT_GE(gp.log_likelihood(), gp.initial_log_likelihood());
  EXPECT_GT(gp.likelihood_evaluations(), 0u);
  for (double l : gp.kernel().length_scales) {
    EXPECT_GE(l, 1e-3);
    EXPECT_LE(l, 1e3);
  }
}

TEST(GpFit, PermutationInvariant) {
  std::mt19937_64 gen(13);
  auto ds = random_dataset(gen, 20, 2);
  const auto a = GpSurrogate::fit(ds.x, ds.y);
  std::vector<std::size_t> idx(ds.x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), gen);
  Dataset p;
  for (auto i : idx) {
    p.x.push_back(ds.x[i]);
    p.y.push_back(ds.y[i]);
  }
  const auto b = GpSurrogate::fit(p.x, p.y);
  for (const auto& q : random_queries(gen, 100, 2)) {
    const auto pa = a.predict(q), pb = b.predict(q);
    EXPECT_NEAR(pa.mean, pb.mean, 1e-9);
    EXPECT_NEAR(pa.variance, pb.variance, 1e-9);
  }
}

TEST(GpFit, DescribeIsJson) {
  const std::vector<DesignPoint> x{DesignPoint({0.1, 0.2}), DesignPoint({0.5, 0.9}), DesignPoint({0.8, 0.4})};
  const std::vector<double> y{1.0, 0.5, 2.0};
  const auto gp = GpSurrogate::fit(x, y);
  const auto j = nlohmann::json::parse(gp.describe());
  EXPECT_EQ(j.at("length_scales").size(), 2u);
  EXPECT_NEAR(j.at("log_likelihood").get<double>(), gp.log_likelihood(), 1e-9 * std::abs(gp.log_likelihood()) + 1e-12);
}

TEST(NelderMead, MinimizesBoxedQuadratic) {
  NelderMeadSettings s;
  s.max_evaluations = 2000;
  s.lower = -5.0;
  s.upper = 5.0;
  const auto r = nelder_mead([](const std::vector<double>& v) { return std::pow(v[0] - 1.0, 2) + 3.0 * std::pow(v[1] + 2.0, 2); },
                             {0.0, 0.0}, s);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], -2.0, 1e-4);
  const auto edge = nelder_mead([](const std::vector<double>& v) { return -v[0]; }, {0.0}, s);
  EXPECT_NEAR(edge.x[0], 5.0, 1e-9);
}
