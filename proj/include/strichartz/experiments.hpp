#pragma once

// Growth of the discrete endpoint constant, the N log N divergence of the
// expected quadratic form, and the randomized-sign bilinear construction.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "strichartz/error.hpp"
#include "strichartz/fit.hpp"
#include "strichartz/kernels.hpp"
#include "strichartz/philox.hpp"
#include "strichartz/walk_gram.hpp"

namespace strichartz {

enum class AtomSide { p, p_prime };

/// f = sum_n c_n P* exp(-i n Delta) delta_{x_n} (or with P').
struct AtomField {
  WalkPath path;
  AtomSide which = AtomSide::p;
  Eigen::VectorXcd coefficients;
  double lambda = 0.0;  ///< eigenvalue the coefficients belong to, if any

  /// ||f||^2 = c* M c for the matching Gram matrix.
  double norm_sq(const GramMatrix& g) const { return quadratic_form(g, coefficients).real(); }
};

/// f from the top eigenvector of M, so that u = M c = lambda c.
inline AtomField build_counterexample_f(const GramMatrix& g, const LanczosOptions& opt = {}) {
  const EigenPair ep = lambda_max(g, opt);
  return {g.path, AtomSide::p, ep.vector, ep.value};
}

// ---------------------------------------------------------------------------
// Endpoint sandwich.

struct EndpointCell {
  int N = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  double residual = 0.0;        ///< ||M c - lambda c||
  double rayleigh_ones = 0.0;   ///< 1* M 1 / (2N + 1)
  double schur_row = 0.0;       ///< max row absolute sum of M
};

/// lambda_max and its per-instance certificates for one walk.
inline EndpointCell endpoint_cell(const GramMatrix& g, const EigenPair& ep) {
  EndpointCell c;
  c.N = g.path.N;
  c.seed = g.path.seed;
  c.lambda = ep.value;
  c.residual = ep.residual;
  c.rayleigh_ones = g.M.sum().real() / g.dim();
  c.schur_row = max_row_abs_sum(g);
  return c;
}

/// int psi + 2 sum_{m=1}^{2N} sup |K_m|.
inline double schur_upper_bound(int N, const KernelEvaluator& ke) {
  std::vector<double> sups(static_cast<std::size_t>(2 * N + 1), 0.0);
  parallel_for(1, 2 * N + 1, [&](std::ptrdiff_t m) { sups[m] = ke.sup_norm(static_cast<int>(m)); });
  CompensatedSum s;
  s.add(ke.psi_integral());
  for (int m = 1; m <= 2 * N; ++m) s.add(2.0 * sups[m]);
  return s.value();
}

struct EndpointGrowth {
  GrowthSeries lower;  ///< median over seeds of lambda_max
  GrowthSeries upper;  ///< deterministic Schur bound
  std::vector<EndpointCell> cells;
};

inline EndpointGrowth endpoint_growth(const std::vector<int>& N_list, double v,
                                      const std::vector<std::uint64_t>& seeds,
                                      const KernelEvaluator& ke) {
  require(!N_list.empty(), "endpoint_growth: empty N list");
  require(std::is_sorted(N_list.begin(), N_list.end()), "endpoint_growth: N list must be ascending");
  require(!seeds.empty(), "endpoint_growth: no seeds");
  EndpointGrowth out;
  out.lower = {"lambda_max_median", GrowthModel::log, {}, {}};
  out.upper = {"schur_upper", GrowthModel::log, {}, {}};
  for (int N : N_list) {
    std::vector<double> lams;
    for (std::uint64_t seed : seeds) {
      const GramMatrix g = assemble_gram(sample_walk(N, v, seed), ke);
      const EndpointCell cell = endpoint_cell(g, lambda_max(g));
      lams.push_back(cell.lambda);
      out.cells.push_back(cell);
    }
    out.lower.points.push_back({static_cast<double>(N), median(lams)});
    out.upper.points.push_back({static_cast<double>(N), schur_upper_bound(N, ke)});
  }
  if (N_list.front() > 0) {
    out.lower.refit();
    out.upper.refit();
  }
  return out;
}

// ---------------------------------------------------------------------------
// N log N divergence.

inline GrowthSeries nlogn_divergence(const std::vector<int>& N_list, double v, const KernelEvaluator& ke) {
  require(std::is_sorted(N_list.begin(), N_list.end()), "nlogn_divergence: N list must be ascending");
  require(N_list.empty() || N_list.back() <= (1 << 16), "nlogn_divergence: N above 2^16");
  GrowthSeries s{"expected_quadratic_form", GrowthModel::nlogn, {}, {}};
  for (int N : N_list) s.points.push_back({static_cast<double>(N), expected_quadratic_form(N, v, ke)});
  if (!N_list.empty() && N_list.front() > 0) s.refit();
  return s;
}

// ---------------------------------------------------------------------------
// Khinchine step.

struct KhinchineReport {
  double exact = 0.0;      ///< sum_n w_n^2 M'[n, n]
  double mc_mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
  bool within_band = false;  ///< |mc_mean - exact| <= 3 std_error
};

/// Sign vector entry n of draw t; 128 signs per counter block.
inline double sign_draw(const rng::CounterRng& gen, std::int64_t t, int n) {
  const rng::Counter c = gen.raw(t, static_cast<std::uint32_t>(n / 128));
  const int bit = n % 128;
  return (c[bit / 32] >> (bit % 32)) & 1u ? 1.0 : -1.0;
}

inline KhinchineReport khinchine_check(const GramMatrix& gprime, const Eigen::VectorXd& w, int trials,
                                       std::uint64_t seed) {
  if (w.size() != gprime.dim()) throw DimensionMismatch("khinchine_check: weight length != dim");
  require((w.array() >= 0.0).all(), "khinchine_check: weights must be nonnegative");
  require(trials >= 2, "khinchine_check: need at least 2 trials");
  KhinchineReport r;
  r.trials = trials;
  for (int n = 0; n < gprime.dim(); ++n) r.exact += w[n] * w[n] * gprime.M(n, n).real();

  const rng::CounterRng gen(seed, rng::Stream::signs);
  std::vector<double> vals(static_cast<std::size_t>(trials));
  parallel_for(0, trials, [&](std::ptrdiff_t t) {
    Eigen::VectorXcd d(gprime.dim());
    for (int n = 0; n < gprime.dim(); ++n) d[n] = w[n] * sign_draw(gen, t, n);
    vals[t] = d.dot(gprime.M * d).real();
  });
  CompensatedSum s;
  for (double x : vals) s.add(x);
  r.mc_mean = s.value() / trials;
  CompensatedSum ss;
  for (double x : vals) ss.add((x - r.mc_mean) * (x - r.mc_mean));
  r.std_error = std::sqrt(ss.value() / (trials - 1) / trials);
  r.within_band = std::abs(r.mc_mean - r.exact) <= 3.0 * r.std_error + 1e-12 * std::abs(r.exact);
  return r;
}

// ---------------------------------------------------------------------------
// Bilinear ratio.

enum class SignMode { complex_phase, plus_minus };

inline const char* to_string(SignMode m) {
  return m == SignMode::complex_phase ? "complex-sign" : "pm1-sign";
}

struct BilinearResult {
  double ratio = 0.0;         ///< best R, recomputed from the witnesses
  double lambda = 0.0;        ///< lambda_max(M)
  double sign_bound = 0.0;    ///< sqrt(int psi' * lambda)
  double best_random = 0.0;   ///< best R among the random draws alone
  int best_trial = -1;
  SignMode mode = SignMode::complex_phase;
  Eigen::VectorXcd c;  ///< coefficients of f
  Eigen::VectorXcd d;  ///< coefficients of g
};

/// R = sum_n |u_n| |(M' d)_n| / (||f|| sqrt(d* M' d)) with u = M c.
inline double bilinear_value(const GramMatrix& g, const GramMatrix& gprime, const Eigen::VectorXcd& c,
                             const Eigen::VectorXcd& d) {
  Eigen::VectorXcd u, y;
  gram_apply(g.M, c, u);
  gram_apply(gprime.M, d, y);
  const double f_norm = std::sqrt(std::max(0.0, c.dot(u).real()));
  const double g_norm = std::sqrt(std::max(0.0, d.dot(y).real()));
  if (f_norm == 0.0 || g_norm == 0.0) throw DegenerateInput("bilinear_value: zero field");
  return (u.cwiseAbs().array() * y.cwiseAbs().array()).sum() / (f_norm * g_norm);
}

inline BilinearResult bilinear_ratio(const GramMatrix& g, const GramMatrix& gprime, int trials,
                                     std::uint64_t seed, SignMode mode = SignMode::complex_phase,
                                     int sweeps = 30) {
  if (g.dim() != gprime.dim()) throw DimensionMismatch("bilinear_ratio: Gram dimensions differ");
  if (g.path.points != gprime.path.points)
    throw InvalidParameter("bilinear_ratio: Gram matrices built on different paths");
  require(trials >= 1, "bilinear_ratio: need at least one trial");

  BilinearResult res;
  res.mode = mode;
  const AtomField f = build_counterexample_f(g);
  res.c = f.coefficients;
  res.lambda = f.lambda;
  Eigen::VectorXcd u;
  gram_apply(g.M, res.c, u);
  const Eigen::VectorXd w = u.cwiseAbs();
  if (!(w.maxCoeff() > 0.0)) throw DegenerateInput("bilinear_ratio: weights vanish");
  const double f_norm = std::sqrt(std::max(0.0, res.c.dot(u).real()));
  res.sign_bound = std::sqrt(gprime.M(0, 0).real() * res.lambda);

  const int dim = g.dim();
  auto score = [&](const Eigen::VectorXcd& d, Eigen::VectorXcd& y) {
    gram_apply(gprime.M, d, y);
    const double gn = std::sqrt(std::max(0.0, d.dot(y).real()));
    if (gn == 0.0) return 0.0;
    return w.dot(y.cwiseAbs()) / (f_norm * gn);
  };
  auto unit = [mode](cplx z) -> cplx {
    if (mode == SignMode::plus_minus) return z.real() >= 0.0 ? 1.0 : -1.0;
    const double a = std::abs(z);
    return a > 0.0 ? z / a : cplx(1.0);
  };

  const rng::CounterRng gen(seed, rng::Stream::signs);
  Eigen::VectorXcd eta(dim), best_eta, y;
  double best = -1.0;
  for (int t = 0; t < trials; ++t) {
    for (int n = 0; n < dim; ++n) {
      if (mode == SignMode::plus_minus) {
        eta[n] = sign_draw(gen, t, n);
      } else {
        const auto [u1, u2] = gen.uniform2(t, static_cast<std::uint32_t>(n));
        (void)u2;
        eta[n] = std::polar(1.0, 2.0 * kPi * u1);
      }
    }
    const double r = score(w.cast<cplx>().cwiseProduct(eta), y);
    if (r > best) { best = r; best_eta = eta; res.best_trial = t; }
  }
  res.best_random = best;

  // Local iteration eta_n <- phase of (M' (w o eta))_n from the best draw.
  eta = best_eta;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    gram_apply(gprime.M, w.cast<cplx>().cwiseProduct(eta), y);
    for (int n = 0; n < dim; ++n) eta[n] = unit(y[n]);
    const double r = score(w.cast<cplx>().cwiseProduct(eta), y);
    if (r > best) { best = r; best_eta = eta; }
  }
  res.d = w.cast<cplx>().cwiseProduct(best_eta);
  res.ratio = bilinear_value(g, gprime, res.c, res.d);
  return res;
}

}  // namespace strichartz
