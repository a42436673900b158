#include <gtest/gtest.h>

#include "strichartz/grid_checks.hpp"
#include "strichartz/grid_sim.hpp"
#include "test_support.hpp"

using namespace strichartz;
using strichartz::fixtures::unit_evaluator;

namespace {

GridField gaussian(const GridSpec& gs) {
  GridField f = zero_field(gs);
  for (int i = 0; i < gs.n; ++i)
    for (int j = 0; j < gs.n; ++j)
      f.at(i, j) = std::exp(-kPi * (gs.coord(i) * gs.coord(i) + gs.coord(j) * gs.coord(j)));
  return f;
}

double max_abs_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

}  // namespace

TEST(GridSpec, GeometryAndValidation) {
  const GridSpec gs{32.0, 512};
  EXPECT_DOUBLE_EQ(gs.dx(), 0.0625);
  EXPECT_DOUBLE_EQ(gs.nyquist(), 8.0);
  EXPECT_EQ(gs.wrap(255), 255);
  EXPECT_EQ(gs.wrap(256), -256);
  EXPECT_DOUBLE_EQ(gs.freq(511), -1.0 / 32.0);
  EXPECT_THROW(zero_field(GridSpec{32.0, 500}), InvalidParameter);
  EXPECT_THROW(zero_field(GridSpec{0.0, 512}), InvalidParameter);
}

TEST(Grid, GaussianTransformMatchesClosedForm) {
  // e^{-pi|x|^2} is its own Fourier transform.
  const GridSpec gs{16.0, 128};
  const GridField f = transform(gaussian(gs), Domain::frequency);
  double err = 0.0;
  for (int i = 0; i < gs.n; ++i)
    for (int j = 0; j < gs.n; ++j) {
      const double k2 = gs.freq(i) * gs.freq(i) + gs.freq(j) * gs.freq(j);
      err = std::max(err, std::abs(f.at(i, j) - std::exp(-kPi * k2)));
    }
  EXPECT_LT(err, 1e-13);
}

TEST(Grid, GaussianPropagationMatchesClosedForm) {
  // u(t, x) = pi / (pi + 4 pi^2 i t) exp(-pi^2 |x|^2 / (pi + 4 pi^2 i t)).
  const GridSpec gs{24.0, 256};
  const double t = 0.07;
  const GridField u = propagate(gaussian(gs), t);
  const cplx a(kPi, 4.0 * kPi * kPi * t);
  double err = 0.0;
  for (int i = 0; i < gs.n; ++i)
    for (int j = 0; j < gs.n; ++j) {
      const double r2 = gs.coord(i) * gs.coord(i) + gs.coord(j) * gs.coord(j);
      err = std::max(err, std::abs(u.at(i, j) - kPi / a * std::exp(-kPi * kPi * r2 / a)));
    }
  EXPECT_LT(err, 1e-12);
}

TEST(Grid, MultipliedDiracIsShiftedInverseTransform) {
  const auto& ke = unit_evaluator();
  const GridSpec gs{40.0, 256};
  const Vec2 x{1.5, -2.0};
  const GridField a = apply_multiplier(dirac(gs, x), ke.psi());
  // The grid holds the L-periodization of psi-check; images at distance 40
  // contribute about 2e-11.
  for (Vec2 y : {Vec2{1.5, -2.0}, Vec2{0.0, 0.0}, Vec2{3.3, 1.1}})
    EXPECT_LT(std::abs(sample(a, y) - ke.eval(0, y - x)), 1e-10);
  EXPECT_LT(std::abs(sample(transform(a, Domain::physical), x) - ke.psi_integral()), 1e-10);
}

TEST(Grid, PropagatedAtomMatchesKernel) {
  const auto& ke = unit_evaluator();
  const GridSpec gs{120.0, 512};
  const GridField a = apply_multiplier(dirac(gs, {0.0, 0.0}), ke.psi());
  for (int m : {-3, 2, 3}) {
    const GridField u = propagate(a, m);
    for (Vec2 y : {Vec2{0.5, 0.5}, Vec2{-4.0, 7.0}}) EXPECT_LT(std::abs(sample(u, y) - ke.eval(m, y)), 1e-9);
  }
}

TEST(Grid, UnitarityGroupLawParseval) {
  const GridSpec gs{120.0, 512};
  const GridField f = random_band_limited(gs, make_bump({0, 0}, 1.0), 3, 0);
  EXPECT_NEAR(l2_norm_sq(f), 1.0, 1e-12);
  const GridField a = propagate(f, 1.3), b = propagate(propagate(f, 0.4), 0.9);
  EXPECT_NEAR(l2_norm_sq(a), 1.0, 1e-12);
  EXPECT_LT(max_abs_diff(a, b), 1e-12 * 10);
  const GridField back = propagate(a, -1.3);
  EXPECT_LT(max_abs_diff(back, f), 1e-12);
  EXPECT_NEAR(l2_norm_sq(transform(f, Domain::frequency)), 1.0, 1e-12);
  EXPECT_LT(max_abs_diff(transform(transform(f, Domain::frequency), Domain::physical), f), 1e-14);
  EXPECT_LT(max_abs_diff(propagate(f, 0.0), f), 1e-15);
  EXPECT_NEAR(inner(f, f).real(), 1.0, 1e-12);
}

TEST(Grid, RandomFieldIsDeterministicAndBandLimited) {
  const GridSpec gs{32.0, 256};
  const Symbol s = make_bump({0, 0}, 1.0);
  const GridField a = random_band_limited(gs, s, 9, 4), b = random_band_limited(gs, s, 9, 4);
  const GridField c = random_band_limited(gs, s, 9, 5);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  const GridField fa = transform(a, Domain::frequency);
  for (int i = 0; i < gs.n; ++i)
    for (int j = 0; j < gs.n; ++j)
      if (std::hypot(gs.freq(i), gs.freq(j)) >= 1.0) {
        ASSERT_LT(std::abs(fa.at(i, j)), 1e-14);
      }
}

TEST(Grid, MarginAndTorusGuards) {
  const GridSpec coarse{32.0, 64};  // anti-aliasing ball radius 0
  try {
    apply_multiplier(dirac(coarse, {0, 0}), make_bump({0, 0}, 1.0));
    FAIL() << "expected GridTooCoarse";
  } catch (const GridTooCoarse& e) {
    EXPECT_EQ(e.required_n(), required_grid_n(32.0, 1.0));
    EXPECT_EQ(e.required_n(), 256);
  }
  // An atom propagated far beyond the box wraps around.
  const GridSpec small{20.0, 256};
  const GridField u = transform(propagate(apply_multiplier(dirac(small, {0, 0}), make_bump({0, 0}, 1.0)), 3.0),
                                Domain::physical);
  EXPECT_THROW(check_torus(u, "test"), BoxTooSmall);
  EXPECT_GT(torus_valid_time(GridSpec{120.0, 512}, 1.0, 2.0), 4.0);
}

TEST(Grid, MixedNorms) {
  const GridSpec gs{4.0, 16};
  GridField one = zero_field(gs);
  for (auto& z : one.values) z = 2.0;
  const std::vector<GridField> fields(3, one);
  EXPECT_NEAR(mixed_norm(fields, 2.0, 2.0, 0.5), std::sqrt(3 * 0.5 * 4.0 * 16.0), 1e-12);
  EXPECT_NEAR(mixed_norm(fields, 2.0, INFINITY, 0.5), std::sqrt(3 * 0.5 * 4.0), 1e-12);
  EXPECT_NEAR(mixed_norm(fields, INFINITY, 4.0, 0.5), std::pow(16.0 * 16.0, 0.25), 1e-12);
  EXPECT_THROW(mixed_norm(fields, 0.5, 2.0, 0.1), InvalidParameter);
}

TEST(GridChecks, KernelCrosscheckSmallRange) {
  const auto& ke = unit_evaluator();
  const CrosscheckReport r = crosscheck_kernel(ke, GridSpec{160.0, 1024}, 3);
  EXPECT_LT(r.max_rel_err, 1e-6);
  EXPECT_LT(r.max_outside_ratio, 1e-6);
  EXPECT_EQ(r.rows.size(), 7u * default_probe_points().size());
}

TEST(GridChecks, GramMatchesKernelEngine) {
  const auto& ke = unit_evaluator();
  EXPECT_LT(gram_grid_crosscheck(ke, GridSpec{120.0, 512}, sample_walk(2, 0.25, 1)), 1e-8);
}

TEST(GridChecks, DiscretizationSingleTerm) {
  // T = 0: A is the sup at t = 0 and B integrates over [-1, 1].
  const GridSpec gs{120.0, 512};
  const Symbol P = make_bump({0, 0}, 1.0);
  const GridField f = random_band_limited(gs, P, 2, 0);
  const DiscretizationResult r = discretization_check(f, f, P, P, 0, 16);
  ASSERT_FALSE(r.degenerate);
  EXPECT_GT(r.kappa, 0.0);
  EXPECT_TRUE(std::isfinite(r.kappa));
  const GridField pf = apply_multiplier(f, P);
  double sup0 = 0.0;
  for (cplx z : pf.values) sup0 = std::max(sup0, std::norm(z));
  EXPECT_NEAR(r.A, sup0, 1e-14 * sup0);
  EXPECT_LT(r.B, 2.0 * sup0 * (1 + 1e-12));
  EXPECT_LT(r.refinement_change, 0.01);
}

TEST(GridChecks, LensMatchesDirectPropagation) {
  const GridSpec gs{120.0, 512};
  const Symbol P = make_bump({0, 0}, 1.0);
  const GridField h = transform(apply_multiplier(random_band_limited(gs, P, 4, 1), P), Domain::physical);
  for (double t : {1.5, -1.75}) {
    const double direct = l4_power_at(h, t, 10.0);
    const double lens = l4_power_at(h, t, 0.5);
    EXPECT_NEAR(lens, direct, 1e-9 * direct) << "t = " << t;
  }
}

TEST(GridChecks, L4RatioShape) {
  const GridSpec gs{120.0, 512};
  const L4Result r = l4_strichartz_ratio(gs, make_bump({0, 0}, 1.0), {1, 2, 4}, 2, 7, 4);
  ASSERT_EQ(r.ratios.size(), 2u);
  ASSERT_EQ(r.series.points.size(), 3u);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_GE(r.series.points[t].value, r.ratios[0][t]);
    if (t > 0) {
      EXPECT_GE(r.ratios[0][t], r.ratios[0][t - 1]);
    }
  }
  EXPECT_THROW(l4_strichartz_ratio(gs, make_bump({0, 0}, 1.0), {0, 2}, 1, 7), InvalidParameter);
}

TEST(GridChecks, EndpointConstantSmallWindows) {
  const auto& ke = unit_evaluator();
  const EndpointConstantResult r = direct_endpoint_constant(ke, {0, 1, 2, 4}, 3, 1);
  ASSERT_EQ(r.steps.size(), 4u);
  EXPECT_NEAR(r.steps[0].c2, ke.psi_integral(), 1e-10);
  for (std::size_t i = 1; i < r.steps.size(); ++i) EXPECT_GE(r.steps[i].c2, r.steps[i - 1].c2);
  EXPECT_EQ(r.points.size(), 9u);
  for (const auto& s : r.steps) EXPECT_LE(s.iterations, 3);
}
