#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cstring>
#include <filesystem>

#include "strichartz/lanczos.hpp"
#include "strichartz/parallel.hpp"
#include "strichartz/walk_gram.hpp"
#include "test_support.hpp"

using namespace strichartz;
using strichartz::fixtures::unit_evaluator;

TEST(Walk, AnchoredAndReproducible) {
  const WalkPath a = sample_walk(50, 0.25, 11), b = sample_walk(50, 0.25, 11), c = sample_walk(50, 0.25, 12);
  EXPECT_EQ(a.size(), 101);
  EXPECT_EQ(a.at(0), (Vec2{0.0, 0.0}));
  EXPECT_EQ(a.points, b.points);
  EXPECT_NE(a.points, c.points);
  // Prefix property: a longer walk extends a shorter one.
  const WalkPath d = sample_walk(80, 0.25, 11);
  for (int n = -50; n <= 50; ++n) EXPECT_EQ(a.at(n), d.at(n));
  EXPECT_THROW(sample_walk(-1, 0.25, 1), InvalidParameter);
  EXPECT_THROW(sample_walk(3, 0.0, 1), InvalidParameter);
}

TEST(Walk, IncrementVarianceAndDisplacement) {
  // E|x_{n+m} - x_n|^2 = 2 v m over many seeds.
  const double v = 0.25;
  const int seeds = 400, m = 16;
  double inc = 0.0, disp = 0.0, disp4 = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const WalkPath p = sample_walk(40, v, 100 + s);
    for (int n = -40; n < 40; ++n) inc += norm_sq(p.at(n + 1) - p.at(n));
    const double d = norm_sq(p.at(10) - p.at(10 - m));
    disp += d;
    disp4 += d * d;
  }
  inc /= seeds * 80.0;
  EXPECT_NEAR(inc, 2.0 * v, 5.0 * 2.0 * v / std::sqrt(seeds * 80.0));
  const double mean = disp / seeds;
  const double sd = std::sqrt(disp4 / seeds - mean * mean);
  EXPECT_NEAR(mean, 2.0 * v * m, 4.0 * sd / std::sqrt(seeds));
}

TEST(Gram, StructuralInvariants) {
  const auto& ke = unit_evaluator();
  const GramMatrix g = assemble_gram(sample_walk(40, 0.25, 5), ke);
  ASSERT_EQ(g.dim(), 81);
  EXPECT_EQ((g.M - g.M.adjoint()).cwiseAbs().maxCoeff(), 0.0);
  for (int i = 0; i < g.dim(); ++i) EXPECT_EQ(g.M(i, i), cplx(ke.psi_integral(), 0.0));
  // Entries follow the kernel definition.
  for (auto [i, j] : {std::pair{10, 3}, std::pair{80, 0}, std::pair{41, 40}}) {
    const int n = i - 40, np = j - 40;
    EXPECT_LT(std::abs(g.M(i, j) - ke.eval(n - np, g.path.at(n) - g.path.at(np))), 1e-9);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.M, Eigen::EigenvaluesOnly);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-6 * ke.psi_integral());
}

TEST(Gram, CoincidentPointsGiveRankDeficiency) {
  // Two atoms at the same time and place coincide.
  const auto& ke = unit_evaluator();
  const GramMatrix g = assemble_gram(prescribed_path({{0, 0}, {1, 0}, {2, 1}}), ke);
  EXPECT_EQ(g.dim(), 3);
  EXPECT_THROW(prescribed_path({{0, 0}, {1, 0}}), InvalidParameter);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(3);
  c[1] = 1.0;
  EXPECT_NEAR(quadratic_form(g, c).real(), ke.psi_integral(), 1e-15);
  EXPECT_THROW(quadratic_form(g, Eigen::VectorXcd::Ones(2)), DimensionMismatch);
}

TEST(Lanczos, MatchesDenseEigensolver) {
  const auto& ke = unit_evaluator();
  for (std::uint64_t seed : {1, 2, 3}) {
    const GramMatrix g = assemble_gram(sample_walk(60, 0.25, seed), ke);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.M);
    const EigenPair ep = lambda_max(g);
    const double dense = es.eigenvalues().maxCoeff();
    EXPECT_NEAR(ep.value, dense, 1e-9 * dense);
    EXPECT_LE(ep.residual, 1e-8 * dense);
    EXPECT_NEAR(ep.vector.norm(), 1.0, 1e-12);
    EXPECT_NEAR((g.M * ep.vector - ep.value * ep.vector).norm(), ep.residual, 1e-10);
  }
}

TEST(Lanczos, SmallAndDiagonalOperators) {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(5, 5);
  for (int i = 0; i < 5; ++i) A(i, i) = i + 1.0;
  const EigenPair ep = lanczos_largest(A);
  EXPECT_NEAR(ep.value, 5.0, 1e-12);
  EXPECT_NEAR(std::abs(ep.vector[4]), 1.0, 1e-10);
  EXPECT_THROW(lanczos_largest(Eigen::MatrixXcd(0, 0)), InvalidParameter);
}

TEST(Gram, SchurAndRayleighCertificates) {
  const auto& ke = unit_evaluator();
  const GramMatrix g = assemble_gram(sample_walk(100, 0.25, 8), ke);
  const double lam = lambda_max(g).value;
  EXPECT_LE(g.M.sum().real() / g.dim(), lam);
  EXPECT_LE(lam, max_row_abs_sum(g));
}

TEST(Gram, ApplyMatchesDenseProduct) {
  const auto& ke = unit_evaluator();
  const GramMatrix g = assemble_gram(sample_walk(300, 0.25, 4), ke);
  Eigen::VectorXcd x = Eigen::VectorXcd::Random(g.dim()), y;
  gram_apply(g.M, x, y);
  EXPECT_LT((y - g.M * x).norm(), 1e-12 * y.norm());
}

TEST(Gram, ExpectedQuadraticFormMatchesMonteCarlo) {
  // 200 independent walks at N = 64.
  const auto& ke = unit_evaluator();
  const int N = 64, draws = 200;
  std::vector<double> q(draws);
  for (int s = 0; s < draws; ++s) q[s] = assemble_gram(sample_walk(N, 0.25, 5000 + s), ke).M.sum().real();
  double mean = 0, var = 0;
  for (double x : q) mean += x;
  mean /= draws;
  for (double x : q) var += (x - mean) * (x - mean);
  const double se = std::sqrt(var / (draws - 1) / draws);
  EXPECT_NEAR(mean, expected_quadratic_form(N, 0.25, ke), 3.0 * se);
}

TEST(Gram, ExpectedQuadraticFormSmallCases) {
  const auto& ke = unit_evaluator();
  EXPECT_NEAR(expected_quadratic_form(0, 0.25, ke), ke.psi_integral(), 1e-15);
  const double e1 = expected_quadratic_form(1, 0.25, ke);
  const double want = 3 * ke.psi_integral() + 4 * ke.expected(1, 0.25).real() + 2 * ke.expected(2, 0.25).real();
  EXPECT_NEAR(e1, want, 1e-13);
}

TEST(Gram, AssemblyIsBitIdenticalAcrossThreadCounts) {
  const auto& ke = unit_evaluator();
  const WalkPath p = sample_walk(120, 0.25, 21);
  const int before = thread_count();
  set_thread_count(1);
  const GramMatrix a = assemble_gram(p, ke);
  set_thread_count(4);
  const GramMatrix b = assemble_gram(p, ke);
  set_thread_count(before);
  EXPECT_EQ(std::memcmp(a.M.data(), b.M.data(), sizeof(cplx) * a.M.size()), 0);
}

TEST(Gram, BinaryDumpRoundTrip) {
  const auto& ke = unit_evaluator();
  const GramMatrix g = assemble_gram(sample_walk(7, 0.25, 3), ke);
  const auto path = std::filesystem::temp_directory_path() / "gram_roundtrip.bin";
  write_gram_binary(g, path);
  EXPECT_EQ(std::filesystem::file_size(path), sizeof(cplx) * 15 * 15);
  const Eigen::MatrixXcd back = read_gram_binary(path);
  EXPECT_EQ(back, g.M);
  const auto side = nlohmann::json::parse(std::ifstream(path.string() + ".json"));
  EXPECT_EQ(side.at("dtype"), "complex128");
  EXPECT_EQ(side.at("summary").at("hermitian_defect"), 0.0);
  EXPECT_EQ(to_json(g.path).at("points").size(), 15u);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
}

TEST(CompensatedSum, RecoversCancelledTerms) {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1000.0);
}
