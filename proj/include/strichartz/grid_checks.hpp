#pragma once

// Grid-side measurements: oracle equivalence with the kernel engine, the
// discretization statement, the bounded L4 constant, and the endpoint
// constant over unit-spaced time windows.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "strichartz/error.hpp"
#include "strichartz/fit.hpp"
#include "strichartz/grid_sim.hpp"
#include "strichartz/kernels.hpp"
#include "strichartz/parallel.hpp"
#include "strichartz/walk_gram.hpp"

namespace strichartz {

// ---------------------------------------------------------------------------
// Kernel engine vs grid.

struct CrosscheckRow {
  int m = 0;
  Vec2 y;
  cplx grid;
  cplx engine;
  double rel_err = 0.0;
};

struct CrosscheckReport {
  double max_rel_err = 0.0;
  double max_outside_ratio = 0.0;  ///< |K_m| beyond R_max(m) over sup |K_m|
  double max_boundary_mass = 0.0;
  std::vector<CrosscheckRow> rows;
};

/// Probes for the decay check sit this far beyond R_max(m); at R_max itself
/// |K_1| is still about 6e-6 of its sup.
inline constexpr double kOutsideProbeFactor = 1.3;

/// Places a unit Dirac at the origin, applies the multiplier psi and exact
/// propagation by m for |m| <= m_max, and compares samples with the engine.
inline CrosscheckReport crosscheck_kernel(const KernelEvaluator& ke, const GridSpec& gs, int m_max,
                                          std::vector<Vec2> probes = default_probe_points()) {
  require(m_max >= 0, "crosscheck_kernel: m_max must be nonnegative");
  const GridField base = apply_multiplier(dirac(gs, {0.0, 0.0}), ke.psi());
  CrosscheckReport rep;
  for (int m = -m_max; m <= m_max; ++m) {
    const GridField u = propagate(base, m);
    const GridField phys = transform(u, Domain::physical);
    const double frac = boundary_mass_fraction(phys);
    rep.max_boundary_mass = std::max(rep.max_boundary_mass, frac);
    if (frac > kTorusMassTolerance)
      throw BoxTooSmall("crosscheck_kernel: wraparound at m = " + std::to_string(m), frac);
    for (Vec2 y : probes) {
      CrosscheckRow row{m, y, sample(u, y), ke.eval(m, y), 0.0};
      row.rel_err = std::abs(row.grid - row.engine) / std::abs(row.engine);
      rep.max_rel_err = std::max(rep.max_rel_err, row.rel_err);
      rep.rows.push_back(row);
    }
    if (m != 0) {
      const double r_out = kOutsideProbeFactor * ke.sup_search_radius(m);
      if (r_out < gs.L / 2.0 - 2.0 * gs.dx()) {
        const double ratio = std::abs(sample(u, {r_out, 0.0})) / ke.sup_norm(m);
        rep.max_outside_ratio = std::max(rep.max_outside_ratio, ratio);
      }
    }
  }
  return rep;
}

/// Gram matrix of the atoms P* exp(-i n Delta) delta_{x_n} computed from grid
/// inner products, with M[n, n'] = <a_{n'}, a_n>.
inline Eigen::MatrixXcd grid_gram(const KernelEvaluator& ke, const GridSpec& gs, const WalkPath& path) {
  const Symbol& phi = ke.psi().base();
  std::vector<GridField> atoms;
  for (int n = -path.N; n <= path.N; ++n) {
    GridField a = transform(propagate(apply_multiplier(dirac(gs, path.at(n)), phi), -n), Domain::physical);
    check_torus(a, "grid_gram atom");
    atoms.push_back(std::move(a));
  }
  const int dim = path.size();
  Eigen::MatrixXcd M(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) M(i, j) = inner(atoms[j], atoms[i]);
  return M;
}

/// max |M_grid - M_engine| / max |M_engine|.
inline double gram_grid_crosscheck(const KernelEvaluator& ke, const GridSpec& gs, const WalkPath& path) {
  const Eigen::MatrixXcd engine = assemble_gram(path, ke).M;
  const Eigen::MatrixXcd grid = grid_gram(ke, gs, path);
  return (grid - engine).cwiseAbs().maxCoeff() / engine.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Discretization statement.

struct DiscretizationResult {
  double A = 0.0;          ///< sum over integer |n| <= T of sup |u v|
  double B = 0.0;          ///< trapezoid integral of sup |u v| at the given rate
  double B_refined = 0.0;  ///< same at twice the rate
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double refinement_change = 0.0;  ///< |B_refined - B| / B_refined
  bool degenerate = false;
};

/// u = exp(i t Delta) P f, v = exp(i t Delta) P' g sampled over
/// t in [-T-1, T+1] at 2 * samples_per_unit per unit time.
template <class S1, class S2>
DiscretizationResult discretization_check(const GridField& f, const GridField& g, const S1& P, const S2& Pp,
                                          int T, int samples_per_unit) {
  require(T >= 0, "discretization_check: T must be nonnegative");
  require(samples_per_unit >= 1, "discretization_check: samples_per_unit must be positive");
  const GridField pf = apply_multiplier(transform(f, Domain::frequency), P);
  const GridField pg = apply_multiplier(transform(g, Domain::frequency), Pp);
  const int fine = 2 * samples_per_unit;
  const int K = (2 * T + 2) * fine;
  std::vector<double> sup(static_cast<std::size_t>(K + 1), 0.0);
  parallel_for(0, K + 1, [&](std::ptrdiff_t k) {
    const double t = -(T + 1) + static_cast<double>(k) / fine;
    const GridField u = transform(propagate(pf, t), Domain::physical);
    const GridField v = transform(propagate(pg, t), Domain::physical);
    check_torus(u, "discretization_check");
    check_torus(v, "discretization_check");
    double m = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) m = std::max(m, std::abs(u.values[i] * v.values[i]));
    sup[k] = m;
  });

  DiscretizationResult r;
  for (int n = -T; n <= T; ++n) r.A += sup[static_cast<std::size_t>((n + T + 1) * fine)];
  auto trapezoid = [&](int stride) {
    double s = 0.0;
    for (int k = 0; k <= K; k += stride) s += (k == 0 || k == K ? 0.5 : 1.0) * sup[k];
    return s * stride / fine;
  };
  r.B = trapezoid(2);
  r.B_refined = trapezoid(1);
  if (r.B <= 0.0) {
    r.degenerate = true;
    return r;
  }
  r.kappa = r.A / r.B;
  r.refinement_change = std::abs(r.B_refined - r.B) / r.B_refined;
  return r;
}

// ---------------------------------------------------------------------------
// L4 Strichartz ratio.

struct L4Result {
  GrowthSeries series;                      ///< max ratio over trials, per T
  std::vector<std::vector<double>> ratios;  ///< [trial][T index]
};

/// int |exp(i t Delta) h|^4 dx for h held in physical form. Small |t| is
/// propagated on the grid; larger |t| uses the exact lens identity
///   exp(i t Delta) h(x) = (4 pi i t)^{-1} e^{i|x|^2/(4t)} G_t-hat(x / (4 pi t)),
///   G_t(y) = e^{i|y|^2/(4t)} h(y),
/// so that ||u(t)||_4^4 = (4 pi |t|)^{-2} int |G_t-hat|^4.
inline double l4_power_at(const GridField& h_phys, double t, double t_switch) {
  const GridSpec& gs = h_phys.spec;
  if (std::abs(t) <= t_switch) {
    const GridField u = transform(propagate(h_phys, t), Domain::physical);
    check_torus(u, "l4 direct propagation");
    double s = 0.0;
    for (cplx z : u.values) s += std::norm(z) * std::norm(z);
    return s * gs.dx() * gs.dx();
  }
  GridField G = h_phys;
  for (int i = 0; i < gs.n; ++i)
    for (int j = 0; j < gs.n; ++j) {
      const double r2 = gs.coord(i) * gs.coord(i) + gs.coord(j) * gs.coord(j);
      G.at(i, j) *= std::polar(1.0, r2 / (4.0 * t));
    }
  G = transform(std::move(G), Domain::frequency);
  const double frac = boundary_mass_fraction(G);
  if (frac > kTorusMassTolerance)
    throw GridTooCoarse("l4 lens transform aliases at t = " + std::to_string(t), 2 * gs.n);
  double s = 0.0;
  for (cplx z : G.values) s += std::norm(z) * std::norm(z);
  const double scale = 4.0 * kPi * std::abs(t);
  return s / (gs.L * gs.L) / (scale * scale);
}

/// ||exp(i t Delta) P f||_{L4([-T, T] x R^2)} / ||f|| with midpoint sampling at
/// samples_per_unit; trial 0 is the single atom P* delta_0.
inline L4Result l4_strichartz_ratio(const GridSpec& gs, const Symbol& s, const std::vector<int>& T_list,
                                    int trials, std::uint64_t seed, int samples_per_unit = 8,
                                    double t_switch = 2.0) {
  require(!T_list.empty() && std::is_sorted(T_list.begin(), T_list.end()) && T_list.front() > 0,
          "l4_strichartz_ratio: T list must be ascending and positive");
  require(trials >= 1, "l4_strichartz_ratio: need at least one trial");
  const Symbol phi = galilean_recenter(s);
  const int T_max = T_list.back();
  const int half = T_max * samples_per_unit;

  L4Result out;
  out.ratios.assign(static_cast<std::size_t>(trials), std::vector<double>(T_list.size(), 0.0));
  for (int trial = 0; trial < trials; ++trial) {
    GridField f = trial == 0 ? apply_multiplier(dirac(gs, {0.0, 0.0}), phi)
                             : random_band_limited(gs, phi, seed, trial);
    const double f_norm = std::sqrt(l2_norm_sq(f));
    const GridField h = transform(apply_multiplier(f, phi), Domain::physical);
    // power[j] for t = +-(j + 1/2) / samples_per_unit
    std::vector<double> pos(static_cast<std::size_t>(half)), neg(static_cast<std::size_t>(half));
    parallel_for(0, 2 * half, [&](std::ptrdiff_t k) {
      const auto j = static_cast<std::size_t>(k / 2);
      const double t = (static_cast<double>(j) + 0.5) / samples_per_unit;
      if (k % 2 == 0) pos[j] = l4_power_at(h, t, t_switch);
      else neg[j] = l4_power_at(h, -t, t_switch);
    });
    for (std::size_t ti = 0; ti < T_list.size(); ++ti) {
      CompensatedSum acc;
      for (int j = 0; j < T_list[ti] * samples_per_unit; ++j) {
        acc.add(pos[j]);
        acc.add(neg[j]);
      }
      out.ratios[trial][ti] = std::pow(acc.value() / samples_per_unit, 0.25) / f_norm;
    }
  }
  out.series = {"l4_ratio_max", GrowthModel::log_window, {}, {}};
  for (std::size_t ti = 0; ti < T_list.size(); ++ti) {
    double best = 0.0;
    for (const auto& row : out.ratios) best = std::max(best, row[ti]);
    out.series.points.push_back({static_cast<double>(T_list[ti]), best});
  }
  out.series.refit();
  return out;
}

// ---------------------------------------------------------------------------
// Endpoint constant over unit-spaced windows.

struct EndpointConstantStep {
  int T = 0;
  double c2 = 0.0;  ///< C(T)^2
  int iterations = 0;  ///< Gram eigen-solves used
};

struct EndpointConstantResult {
  GrowthSeries series;
  std::vector<EndpointConstantStep> steps;
  std::vector<Vec2> points;  ///< maximizing points for the largest window
};

namespace detail {

/// Moves each x_t towards a maximizer of |exp(i t Delta) P f(x)| for the
/// fixed f = sum_s c_s P* exp(-i s Delta) delta_{x_s}.
inline std::vector<Vec2> refine_points(const KernelEvaluator& ke, const std::vector<Vec2>& pts,
                                       const Eigen::VectorXcd& c) {
  const int dim = static_cast<int>(pts.size());
  const int T = dim / 2;
  double spread = 0.0;
  for (Vec2 a : pts)
    for (Vec2 b : pts) spread = std::max(spread, norm(a - b));
  std::vector<std::optional<RadialKernelTable>> tables(static_cast<std::size_t>(dim));
  parallel_for(0, dim, [&](std::ptrdiff_t m) { tables[m].emplace(ke.radial_table(static_cast<int>(m), spread + 8.0)); });
  auto kernel = [&](int m, double r) -> cplx {
    const auto& tab = *tables[static_cast<std::size_t>(std::abs(m))];
    const cplx k = tab.covers(r) ? tab(r) : ke.eval_radial(std::abs(m), r);
    return m < 0 ? std::conj(k) : k;
  };
  std::vector<Vec2> out(pts);
  parallel_for(0, dim, [&](std::ptrdiff_t ti) {
    const int t = static_cast<int>(ti) - T;
    auto objective = [&](Vec2 x) {
      cplx s{};
      for (int j = 0; j < dim; ++j) s += c[j] * kernel(t - (j - T), norm(x - pts[j]));
      return std::norm(s);
    };
    Vec2 x = pts[ti];
    double best = objective(x);
    double h = 0.5;
    for (int evals = 0; h > 1e-4 && evals < 400;) {
      Vec2 cand_best = x;
      double val_best = best;
      for (int dxi = -1; dxi <= 1; ++dxi)
        for (int dyi = -1; dyi <= 1; ++dyi) {
          if (dxi == 0 && dyi == 0) continue;
          const Vec2 cand = x + Vec2{dxi * h, dyi * h};
          const double v = objective(cand);
          ++evals;
          if (v > val_best) { val_best = v; cand_best = cand; }
        }
      if (val_best > best) { best = val_best; x = cand_best; }
      else h *= 0.5;
    }
    out[ti] = x;
  });
  return out;
}

}  // namespace detail

/// C(T)^2 = sup over f and points of sum_{|t| <= T} |exp(i t Delta) P f(x_t)|^2 / ||f||^2,
/// estimated by alternating between the top eigenvector of the Gram matrix of
/// the points and pointwise maximization. Windows are processed in ascending
/// order and warm-started, so the estimates are nondecreasing in T.
inline EndpointConstantResult direct_endpoint_constant(const KernelEvaluator& ke, const std::vector<int>& T_list,
                                                       int iters, std::uint64_t seed, double v = 0.25) {
  require(!T_list.empty() && std::is_sorted(T_list.begin(), T_list.end()) && T_list.front() >= 0,
          "direct_endpoint_constant: T list must be ascending and nonnegative");
  require(iters >= 1, "direct_endpoint_constant: iters must be positive");
  const WalkPath walk = sample_walk(T_list.back(), v, seed);

  EndpointConstantResult out;
  out.series = {"endpoint_constant_sq", GrowthModel::log_window, {}, {}};
  std::vector<Vec2> pts{walk.at(0)};
  int T_prev = 0;
  for (int T : T_list) {
    // Extend the window, continuing the walk's increments from the refined ends.
    std::vector<Vec2> ext(static_cast<std::size_t>(2 * T + 1));
    for (int t = -T_prev; t <= T_prev; ++t) ext[t + T] = pts[t + T_prev];
    for (int t = T_prev + 1; t <= T; ++t) {
      ext[t + T] = ext[t - 1 + T] + (walk.at(t) - walk.at(t - 1));
      ext[-t + T] = ext[-t + 1 + T] + (walk.at(-t) - walk.at(-t + 1));
    }
    pts = std::move(ext);
    T_prev = T;

    double best = -1.0;
    std::vector<Vec2> best_pts = pts;
    int evaluations = 0;
    for (int it = 0; it < iters; ++it) {
      const GramMatrix g = assemble_gram(prescribed_path(pts), ke);
      const EigenPair ep = lambda_max(g);
      ++evaluations;
      if (ep.value <= best) break;
      const double gain = best > 0.0 ? (ep.value - best) / best : 1.0;
      best = ep.value;
      best_pts = pts;
      if (gain < 1e-4 || T == 0) break;
      pts = detail::refine_points(ke, pts, ep.vector);
    }
    pts = best_pts;
    out.steps.push_back({T, best, evaluations});
    out.series.points.push_back({static_cast<double>(T), best});
  }
  out.points = pts;
  out.series.refit();
  return out;
}

}  // namespace strichartz
