#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "strichartz/fit.hpp"

using namespace strichartz;

namespace {

std::vector<GrowthPoint> synth(GrowthModel m, double a, double b, std::vector<double> xs,
                               std::vector<double> noise = {}) {
  std::vector<GrowthPoint> pts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto [f1, f2] = growth_basis(m, xs[i]);
    pts.push_back({xs[i], a * f1 + b * f2 + (i < noise.size() ? noise[i] : 0.0)});
  }
  return pts;
}

}  // namespace

TEST(Fit, RecoversExactCoefficientsForEveryModel) {
  const std::vector<double> xs = {64, 128, 256, 512, 1024, 2048};
  for (GrowthModel m : {GrowthModel::log, GrowthModel::nlogn, GrowthModel::sqrtlog, GrowthModel::log_window}) {
    const GrowthFit f = fit_growth(synth(m, 0.37, -1.25, xs), m);
    EXPECT_NEAR(f.a, 0.37, 1e-10) << to_string(m);
    EXPECT_NEAR(f.b, -1.25, 1e-9) << to_string(m);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    for (double r : f.residuals) EXPECT_LT(std::abs(r), 1e-8);
  }
}

TEST(Fit, AgreesWithQrLeastSquares) {
  const std::vector<double> xs = {16, 32, 64, 128, 256, 512, 1024};
  const auto pts = synth(GrowthModel::log, 0.8, 2.0, xs, {0.05, -0.03, 0.02, 0.07, -0.06, 0.01, -0.02});
  Eigen::MatrixXd A(xs.size(), 2);
  Eigen::VectorXd y(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    A(i, 0) = std::log(xs[i]);
    A(i, 1) = 1.0;
    y[i] = pts[i].value;
  }
  const Eigen::Vector2d sol = A.colPivHouseholderQr().solve(y);
  const GrowthFit f = fit_growth(pts, GrowthModel::log);
  EXPECT_NEAR(f.a, sol[0], 1e-12);
  EXPECT_NEAR(f.b, sol[1], 1e-12);
  const double ss_res = (A * sol - y).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  EXPECT_NEAR(f.r2, 1.0 - ss_res / ss_tot, 1e-12);
  EXPECT_LT(f.r2, 1.0);
}

TEST(Fit, DegenerateInputs) {
  EXPECT_THROW(fit_growth({{1, 1}, {2, 2}}, GrowthModel::log), InvalidParameter);
  EXPECT_THROW(fit_growth({{8, 1}, {8, 2}, {8, 3}}, GrowthModel::log), InvalidParameter);
  EXPECT_THROW(fit_growth({{0, 1}, {2, 2}, {4, 3}}, GrowthModel::log), InvalidParameter);
  const GrowthFit flat = fit_growth({{2, 5}, {4, 5}, {8, 5}}, GrowthModel::log);
  EXPECT_NEAR(flat.a, 0.0, 1e-12);
  EXPECT_EQ(flat.r2, 1.0);
  // log_window accepts T = 0.
  EXPECT_NO_THROW(fit_growth({{0, 1}, {1, 2}, {2, 2.5}}, GrowthModel::log_window));
}

TEST(Fit, R2ClampedForAntiCorrelatedModel) {
  // Forcing the wrong model onto alternating data cannot give negative R^2.
  const GrowthFit f = fit_growth({{2, 1}, {4, -1}, {8, 1}, {16, -1}}, GrowthModel::nlogn);
  EXPECT_GE(f.r2, 0.0);
  EXPECT_LE(f.r2, 1.0);
}

TEST(Fit, SeriesRefitNeedsThreePoints) {
  GrowthSeries s{"q", GrowthModel::log, {{2, 1}, {4, 2}}, {}};
  s.refit();
  EXPECT_FALSE(s.fit.has_value());
  s.points.push_back({8, 3});
  s.refit();
  ASSERT_TRUE(s.fit.has_value());
  EXPECT_NEAR(s.fit->a, 1.0 / std::log(2.0), 1e-12);
}

TEST(Ranks, SpearmanAndMedian) {
  EXPECT_EQ(ranks({3.0, 1.0, 2.0, 1.0}), (std::vector<double>{4.0, 1.5, 3.0, 1.5}));
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {10, 20, 25, 100}), 1.0, 1e-15);
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0, 1e-15);
  EXPECT_NEAR(spearman({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5}), 0.8, 1e-12);
  EXPECT_EQ(median({5.0, 1.0, 3.0}), 3.0);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
}
