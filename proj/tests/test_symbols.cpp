#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>

#include "strichartz/symbols.hpp"
#include "test_support.hpp"

using namespace strichartz;

namespace {

// Tensor-product Gauss rule over the bounding square of the support.
// Independent of the radial/Bessel route used by the library.
template <class F>
cplx cartesian_integral(F&& f, Vec2 c, double rho, int panels = 24) {
  using rule = boost::math::quadrature::gauss<double, 30>;
  const double h = 2.0 * rho / panels;
  std::vector<double> x, w;
  for (int p = 0; p < panels; ++p) {
    const double mid = c.x - rho + (p + 0.5) * h;
    for (std::size_t i = 0; i < rule::abscissa().size(); ++i)
      for (int s : {-1, 1}) {
        if (i == 0 && s == 1 && rule::abscissa()[0] == 0.0) continue;
        x.push_back(mid + s * 0.5 * h * rule::abscissa()[i]);
        w.push_back(0.5 * h * rule::weights()[i]);
      }
  }
  cplx total{};
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) {
      const Vec2 xi{x[i], c.y - c.x + x[j]};
      total += w[i] * w[j] * f(xi);
    }
  return total;
}

}  // namespace

TEST(Symbol, BumpValuesAndSupport) {
  const Symbol s = make_bump({4.0, 0.0}, 1.0);
  EXPECT_DOUBLE_EQ(s({4.0, 0.0}), 1.0);
  EXPECT_EQ(s({5.0, 0.0}), 0.0);
  EXPECT_EQ(s({2.0, 0.0}), 0.0);
  EXPECT_NEAR(s({4.5, 0.0}), std::exp(1.0 - 1.0 / 0.75), 1e-15);
  EXPECT_THROW(make_bump({0, 0}, 0.0), InvalidParameter);
  EXPECT_THROW(make_bump({0, 0}, -1.0), InvalidParameter);
  EXPECT_THROW(SymbolProduct(s, 0), InvalidParameter);
}

TEST(Symbol, PsiIntegralMatchesCartesianOracle) {
  const SymbolProduct psi = gram_symbol(make_bump({0.0, 0.0}, 1.0));
  const double oracle = cartesian_integral([&](Vec2 xi) { return cplx(psi(xi)); }, {0.0, 0.0}, 1.0).real();
  EXPECT_NEAR(oracle, fixtures::kPsiIntegral, 1e-11);
  EXPECT_NEAR(symbol_integral(psi), fixtures::kPsiIntegral, 1e-13);
  EXPECT_NEAR(symbol_l2_norm_sq(make_bump({3, 1}, 1.0)), fixtures::kPsiIntegral, 1e-13);
}

TEST(Symbol, IntegralScalesWithRadiusSquared) {
  const Symbol a = make_bump({0, 0}, 1.0), b = make_bump({0, 0}, 0.5);
  EXPECT_NEAR(symbol_integral(b), 0.25 * symbol_integral(a), 1e-14);
  const double oracle = cartesian_integral([&](Vec2 xi) { return cplx(b(xi)); }, {0, 0}, 0.5).real();
  EXPECT_NEAR(symbol_integral(b), oracle, 1e-12);
}

TEST(Symbol, RecenteringPreservesNormsAndMovesCenter) {
  const Symbol s = make_bump({4.0, -2.0}, 0.75, "Q");
  const Symbol r = galilean_recenter(s);
  EXPECT_EQ(r.center(), (Vec2{0.0, 0.0}));
  EXPECT_EQ(r.radius(), 0.75);
  EXPECT_EQ(r.label(), "Q");
  EXPECT_DOUBLE_EQ(symbol_l2_norm_sq(s), symbol_l2_norm_sq(r));
  EXPECT_DOUBLE_EQ(s({4.3, -2.1}), r({0.3, -0.1}));
}

class InverseFtProbe : public ::testing::TestWithParam<Vec2> {};

// Slow cartesian quadrature of int psi(xi) e^{2 pi i z.xi} on a 4x4 probe set,
// with an off-origin center to exercise the phase factor.
TEST_P(InverseFtProbe, MatchesCartesianQuadrature) {
  const Vec2 z = GetParam();
  const SymbolProduct psi = gram_symbol(make_bump({0.5, -0.25}, 1.0));
  const cplx oracle = cartesian_integral(
      [&](Vec2 xi) {
        const double ph = 2.0 * kPi * dot(z, xi);
        return psi(xi) * cplx(std::cos(ph), std::sin(ph));
      },
      psi.center(), 1.0);
  const cplx got = inverse_ft_at(psi, z);
  EXPECT_LT(std::abs(got - oracle), 1e-11) << "z = (" << z.x << ", " << z.y << ")";
}

INSTANTIATE_TEST_SUITE_P(Grid4x4, InverseFtProbe, ::testing::ValuesIn([] {
                           std::vector<Vec2> pts;
                           for (double x : {-1.5, -0.2, 0.7, 2.9})
                             for (double y : {-2.2, 0.0, 0.45, 1.8}) pts.push_back({x, y});
                           return pts;
                         }()));

TEST(Symbol, InverseFtAtOriginIsIntegral) {
  const SymbolProduct psi = gram_symbol(make_bump({2.0, 1.0}, 1.0));
  EXPECT_NEAR(inverse_ft_at(psi, {0.0, 0.0}).real(), fixtures::kPsiIntegral, 1e-12);
  EXPECT_NEAR(inverse_ft_at(psi, {0.0, 0.0}).imag(), 0.0, 1e-15);
}

TEST(Symbol, TailBoundDecaysWithBoxSize) {
  const SymbolProduct psi = gram_symbol(make_bump({0, 0}, 1.0));
  const double t16 = inverse_ft_tail_bound(psi, 16.0);
  const double t32 = inverse_ft_tail_bound(psi, 32.0);
  const double t64 = inverse_ft_tail_bound(psi, 64.0);
  EXPECT_GT(t16, t32);
  EXPECT_GT(t32, t64);
  EXPECT_LT(t64, 1e-10);
  // The bound must dominate an independent estimate of the true tail on [W, 2W].
  const double W = 16.0;
  const double direct = quad::composite(
      [&](double k) { return 2.0 * kPi * k * std::abs(inverse_ft_at(psi, {k, 0.0})); }, W, 2 * W, 256);
  EXPECT_GE(t16, direct);
}

TEST(Symbol, TableHonoursTolerance) {
  const SymbolProduct psi = gram_symbol(make_bump({0, 0}, 1.0));
  EXPECT_THROW(inverse_ft_table(psi, 8.0, 32, 1e-10), BoxTooSmall);
  try {
    inverse_ft_table(psi, 8.0, 32, 1e-10);
  } catch (const BoxTooSmall& e) {
    EXPECT_GT(e.tail(), 1e-10);
  }
  EXPECT_THROW(inverse_ft_table(psi, 64.0, 30), InvalidParameter);
  const InverseFtTable t = inverse_ft_table(psi, 64.0, 64);
  EXPECT_LE(t.tail_bound, 1e-10);
  for (int i : {0, 17, 31, 63})
    for (int j : {3, 32, 60}) EXPECT_LT(std::abs(t.at(i, j) - inverse_ft_at(psi, t.point(i, j))), 1e-15);
}

TEST(Symbol, JsonRoundTrip) {
  const Symbol s = make_bump({4.0, 0.5}, 0.8, "P'");
  nlohmann::json j;
  to_json(j, s);
  EXPECT_EQ(symbol_from_json(j), s);
  EXPECT_THROW(symbol_from_json(nlohmann::json{{"center", {1.0}}, {"radius", 1.0}}), InvalidParameter);
  EXPECT_THROW(symbol_from_json(nlohmann::json{{"center", {0.0, 0.0}}, {"radius", -1.0}}), InvalidParameter);
}
