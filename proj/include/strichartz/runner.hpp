#pragma once

// Binds an ExperimentConfig to the experiment families and assembles the
// report. A failure inside one experiment is recorded and the others run.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "strichartz/config.hpp"
#include "strichartz/experiments.hpp"
#include "strichartz/fit.hpp"
#include "strichartz/grid_checks.hpp"
#include "strichartz/grid_sim.hpp"
#include "strichartz/kernels.hpp"
#include "strichartz/parallel.hpp"
#include "strichartz/report.hpp"
#include "strichartz/walk_gram.hpp"

namespace strichartz {

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

inline KernelEvaluator::Options kernel_options(const ExperimentConfig& c) {
  KernelEvaluator::Options o;
  o.half_width = c.table_half_width;
  o.table_tolerance = c.table_tolerance;
  o.tolerance = c.kernel_tolerance;
  o.direct_cutoff = c.direct_cutoff;
  return o;
}

/// Per-run shared state: kernel evaluators are built on first use, and the
/// walk cells feeding both the sandwich and bilinear experiments are
/// computed once.
class RunContext {
public:
  explicit RunContext(const ExperimentConfig& cfg) : cfg_(cfg) {}

  const ExperimentConfig& cfg() const { return cfg_; }

  const KernelEvaluator& ke() {
    if (!ke_) ke_ = std::make_unique<KernelEvaluator>(gram_symbol(cfg_.P), kernel_options(cfg_));
    return *ke_;
  }

  /// P' side; shares the P evaluator when recentering makes them equal.
  const KernelEvaluator& ke_prime() {
    if (same_recentered()) return ke();
    if (!ke_prime_) ke_prime_ = std::make_unique<KernelEvaluator>(gram_symbol(cfg_.P_prime), kernel_options(cfg_));
    return *ke_prime_;
  }

  bool same_recentered() const { return cfg_.P.radius() == cfg_.P_prime.radius(); }

  struct WalkCell {
    EndpointCell endpoint;
    std::optional<BilinearResult> bilinear;
  };

  /// One cell per (N, seed) over the eigen schedule.
  const std::vector<WalkCell>& walk_cells(bool with_bilinear) {
    if (cells_computed_ && (!with_bilinear || cells_have_bilinear_)) return cells_;
    cells_.clear();
    for (int N : cfg_.eigen_schedule())
      for (std::uint64_t seed : cfg_.seeds) {
        const WalkPath path = sample_walk(N, cfg_.v, seed);
        const GramMatrix g = assemble_gram(path, ke());
        WalkCell cell;
        cell.endpoint = endpoint_cell(g, lambda_max(g));
        if (with_bilinear) {
          if (same_recentered()) {
            cell.bilinear = bilinear_ratio(g, g, cfg_.bilinear_trials, seed);
          } else {
            const GramMatrix gp = assemble_gram(path, ke_prime());
            cell.bilinear = bilinear_ratio(g, gp, cfg_.bilinear_trials, seed);
          }
        }
        cells_.push_back(std::move(cell));
      }
    cells_computed_ = true;
    cells_have_bilinear_ = with_bilinear;
    return cells_;
  }

  const EndpointConstantResult& endpoint_constant() {
    if (!endpoint_) endpoint_ = direct_endpoint_constant(ke(), cfg_.T_schedule, cfg_.endpoint_iters, cfg_.seeds.front(), cfg_.v);
    return *endpoint_;
  }

private:
  const ExperimentConfig& cfg_;
  std::unique_ptr<KernelEvaluator> ke_, ke_prime_;
  std::vector<WalkCell> cells_;
  bool cells_computed_ = false;
  bool cells_have_bilinear_ = false;
  std::optional<EndpointConstantResult> endpoint_;
};

// ---------------------------------------------------------------------------

inline void run_validate(RunContext& ctx, ExperimentReport& rep) {
  const std::string E = "validate";
  const auto& cfg = ctx.cfg();
  const KernelEvaluator& ke = ctx.ke();
  const double ipsi = ke.psi_integral();

  // Recentering.
  rep.summaries[E]["original_center_P"] = {cfg.P.center().x, cfg.P.center().y};
  rep.summaries[E]["original_center_P_prime"] = {cfg.P_prime.center().x, cfg.P_prime.center().y};
  {
    const double a = symbol_l2_norm_sq(cfg.P_prime), b = symbol_l2_norm_sq(galilean_recenter(cfg.P_prime));
    rep.check(E, "recentering_preserves_l2", std::abs(a - b) <= 1e-9 * a, "l2 " + fmt(a) + " vs " + fmt(b));
  }

  // Kernel engine: cross-method, conjugation, unitarity bound, decay.
  {
    const std::vector<int> ms = {1, 5, 40};
    const auto probes = default_probe_points();
    double worst = 0.0;
    for (const auto& row : cross_method_probe(ke, ms, probes)) {
      worst = std::max(worst, row.abs_err);
      if (row.method == KernelMethod::direct)
        rep.add_row({E, row.m, std::nullopt, "cross_method_abs_err", row.abs_err, ke.error_bound(row.m)});
    }
    rep.check(E, "kernel_cross_method", worst <= 1e-6, "max |direct - convolution| = " + fmt(worst));
  }
  {
    double worst = 0.0, worst_bound = 0.0;
    for (int m : {1, 3, 8, 9, 40, 200})
      for (Vec2 y : {Vec2{0.3, -1.1}, Vec2{2.0, 0.7}, Vec2{-4.5, 3.0}, Vec2{0.0, 0.0}}) {
        const cplx a = ke.eval(m, y), b = ke.eval(-m, -y);
        worst = std::max(worst, std::abs(std::conj(a) - b));
        worst_bound = std::max(worst_bound, std::abs(a) - ipsi);
      }
    rep.check(E, "kernel_conjugation_symmetry", worst <= 1e-9, "max defect " + fmt(worst));
    rep.check(E, "kernel_bounded_by_integral", worst_bound <= 0.0, "max |K| - int psi = " + fmt(worst_bound));
  }
  {
    std::vector<double> prods;
    for (int m = 8; m <= 256; m *= 2) {
      const double p = (1.0 + m) * ke.sup_norm(m);
      prods.push_back(p);
      rep.add_row({E, m, std::nullopt, "one_plus_m_sup_norm", p, (1.0 + m) * cfg.sup_tolerance});
    }
    const double med = median(prods);
    const bool ok = std::all_of(prods.begin(), prods.end(), [&](double p) { return p <= 2.0 * med && p >= 0.5 * med; });
    rep.check(E, "kernel_decay_factor2", ok,
              "(1+m) sup over m=8..256 in [" + fmt(*std::min_element(prods.begin(), prods.end())) + ", " +
                  fmt(*std::max_element(prods.begin(), prods.end())) + "], median " + fmt(med));
  }

  // Kernel engine against the grid.
  {
    const CrosscheckReport cr = crosscheck_kernel(ke, cfg.crosscheck_grid, 8);
    for (const auto& row : cr.rows)
      rep.add_row({E, row.m, std::nullopt, "grid_kernel_rel_err", row.rel_err, 0.0});
    rep.check(E, "grid_kernel_oracle", cr.max_rel_err <= 1e-4, "max relative error " + fmt(cr.max_rel_err));
    rep.check(E, "grid_kernel_outside_decay", cr.max_outside_ratio <= 1e-6,
              "max |K| beyond R_max over sup " + fmt(cr.max_outside_ratio));
    const double g5 = gram_grid_crosscheck(ke, cfg.lemma_grid, sample_walk(2, cfg.v, cfg.seeds.front()));
    rep.add_row({E, 2, cfg.seeds.front(), "grid_gram5_rel_err", g5, 0.0});
    rep.check(E, "grid_gram5_oracle", g5 <= 1e-4, "max relative deviation " + fmt(g5));
  }

  // Grid invariants.
  {
    const GridSpec& gs = cfg.lemma_grid;
    const Symbol phi = galilean_recenter(cfg.P);
    const GridField f = random_band_limited(gs, phi, cfg.seeds.front(), 0);
    const double n0 = l2_norm_sq(f);
    const GridField a = propagate(f, 0.7), b = propagate(propagate(f, 0.3), 0.4);
    double unit = std::abs(std::sqrt(l2_norm_sq(a)) - std::sqrt(n0)) / std::sqrt(n0);
    double group = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      group = std::max(group, std::abs(a.values[i] - b.values[i]));
      scale = std::max(scale, std::abs(a.values[i]));
    }
    group /= scale;
    const GridField fr = transform(f, Domain::frequency);
    const double pars = std::abs(l2_norm_sq(fr) - n0) / n0;
    const GridField back = transform(fr, Domain::physical);
    double round = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) round = std::max(round, std::abs(back.values[i] - f.values[i]));
    round /= scale;
    rep.check(E, "grid_unitarity", unit <= 1e-12, "relative norm change " + fmt(unit));
    rep.check(E, "grid_group_law", group <= 1e-12, "max deviation " + fmt(group));
    rep.check(E, "grid_parseval_roundtrip", pars <= 1e-10 && round <= 1e-10,
              "parseval " + fmt(pars) + ", round trip " + fmt(round));
    // Separated supports on a grid wide enough in frequency for both.
    const GridSpec wide{32.0, 512};
    const GridField h = apply_multiplier(apply_multiplier(random_band_limited(wide, cfg.P, cfg.seeds.front(), 1), cfg.P),
                                         cfg.P_prime);
    double disjoint = 0.0;
    for (cplx z : h.values) disjoint = std::max(disjoint, std::abs(z));
    const double gap = norm(cfg.P.center() - cfg.P_prime.center()) - cfg.P.radius() - cfg.P_prime.radius();
    if (gap > 0.0) rep.check(E, "grid_disjoint_supports", disjoint <= 1e-12, "max |P' P f| = " + fmt(disjoint));
  }

  // Gram invariants, certificates, and the expectation oracle.
  {
    bool herm = true, diag = true, psd = true, sandwich = true, resid = true, reproducible = true;
    std::string detail;
    for (std::uint64_t seed : cfg.seeds) {
      const GramMatrix g = assemble_gram(sample_walk(cfg.invariant_N, cfg.v, seed), ke);
      const GramMatrix g2 = assemble_gram(sample_walk(cfg.invariant_N, cfg.v, seed), ke);
      reproducible = reproducible && std::memcmp(g.M.data(), g2.M.data(), sizeof(cplx) * g.M.size()) == 0;
      herm = herm && (g.M - g.M.adjoint()).cwiseAbs().maxCoeff() == 0.0;
      diag = diag && (g.M.diagonal().array() - ipsi).abs().maxCoeff() <= 1e-8;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.M, Eigen::EigenvaluesOnly);
      psd = psd && es.eigenvalues().minCoeff() >= -1e-6 * ipsi;
      const EigenPair ep = lambda_max(g);
      const EndpointCell cell = endpoint_cell(g, ep);
      sandwich = sandwich && cell.rayleigh_ones <= ep.value * (1 + 1e-12) && ep.value <= cell.schur_row * (1 + 1e-12);
      resid = resid && ep.residual <= 1e-6 * ep.value &&
              std::abs(ep.value - es.eigenvalues().maxCoeff()) <= 1e-8 * ep.value;
      rep.add_row({E, cfg.invariant_N, seed, "min_eigenvalue", es.eigenvalues().minCoeff(), 0.0});
    }
    rep.check(E, "gram_hermitian_exact", herm, "max |M - M*| == 0");
    rep.check(E, "gram_constant_diagonal", diag, "|M_nn - int psi| <= 1e-8");
    rep.check(E, "gram_psd", psd, "min eigenvalue >= -1e-6 int psi");
    rep.check(E, "gram_rayleigh_schur", sandwich, "Q/(2N+1) <= lambda_max <= max row sum");
    rep.check(E, "gram_eigen_residual", resid, "||Mc - lambda c|| <= 1e-6 lambda, matches dense solver to 1e-8");
    rep.check(E, "gram_bit_reproducible", reproducible, "repeated assembly is bitwise identical");

    const int N = cfg.invariant_N;
    const int draws = 200;
    std::vector<double> q(draws);
    parallel_for(0, draws, [&](std::ptrdiff_t s) {
      q[s] = assemble_gram(sample_walk(N, cfg.v, 1000 + s), ke).M.sum().real();
    });
    double mean = 0.0, var = 0.0;
    for (double x : q) mean += x;
    mean /= draws;
    for (double x : q) var += (x - mean) * (x - mean);
    const double se = std::sqrt(var / (draws - 1) / draws);
    const double exact = expected_quadratic_form(N, cfg.v, ke);
    rep.add_row({E, N, std::nullopt, "expected_quadratic_form", exact, 0.0});
    rep.add_row({E, N, std::nullopt, "monte_carlo_quadratic_form", mean, se});
    rep.check(E, "expectation_monte_carlo", std::abs(mean - exact) <= 3.0 * se,
              "exact " + fmt(exact) + ", Monte Carlo " + fmt(mean) + " +- " + fmt(se));
  }

  // Discretization statement.
  {
    const GridSpec& gs = cfg.lemma_grid;
    const Symbol P = galilean_recenter(cfg.P), Pp = galilean_recenter(cfg.P_prime);
    std::vector<DiscretizationResult> res(static_cast<std::size_t>(cfg.lemma_pairs));
    for (int p = 0; p < cfg.lemma_pairs; ++p) {
      const GridField f = random_band_limited(gs, P, cfg.seeds.front(), 2 * p);
      const GridField g = random_band_limited(gs, Pp, cfg.seeds.front(), 2 * p + 1);
      res[p] = discretization_check(f, g, P, Pp, cfg.lemma_T, cfg.lemma_samples_per_unit);
    }
    double kmin = 1e300, kmax = 0.0, change = 0.0;
    bool finite = true;
    for (int p = 0; p < cfg.lemma_pairs; ++p) {
      const auto& r = res[p];
      finite = finite && !r.degenerate && std::isfinite(r.kappa);
      kmin = std::min(kmin, r.kappa);
      kmax = std::max(kmax, r.kappa);
      change = std::max(change, r.refinement_change);
      rep.add_row({E, p, cfg.seeds.front(), "lemma_kappa", r.kappa, r.refinement_change * r.kappa});
    }
    rep.summaries[E]["lemma"] = {{"kappa_min", kmin}, {"kappa_max", kmax}, {"max_refinement_change", change}};
    rep.check(E, "lemma_kappa_spread", finite && kmax / kmin < 50.0, "max/min kappa = " + fmt(kmax / kmin));
    rep.check(E, "lemma_time_refinement", change < 0.01, "max change in B from doubling the rate " + fmt(change));
  }

  // Khinchine step.
  {
    const KernelEvaluator& kp = ctx.ke_prime();
    const GramMatrix gp = assemble_gram(sample_walk(cfg.khinchine_N, cfg.v, cfg.seeds.front()), kp);
    const rng::CounterRng wgen(cfg.seeds.front(), rng::Stream::weights);
    bool ok = true;
    for (int k = 0; k < cfg.khinchine_vectors; ++k) {
      Eigen::VectorXd w(gp.dim());
      for (int n = 0; n < gp.dim(); ++n) w[n] = wgen.uniform2(n, static_cast<std::uint32_t>(k)).first;
      const KhinchineReport kr = khinchine_check(gp, w, cfg.khinchine_trials, cfg.seeds.front() + k);
      ok = ok && kr.within_band;
      rep.add_row({E, cfg.khinchine_N, static_cast<std::uint64_t>(k), "khinchine_exact", kr.exact, 0.0});
      rep.add_row({E, cfg.khinchine_N, static_cast<std::uint64_t>(k), "khinchine_monte_carlo", kr.mc_mean, kr.std_error});
    }
    Eigen::VectorXd e = Eigen::VectorXd::Zero(gp.dim());
    e[gp.dim() / 2] = 1.0;
    const KhinchineReport single = khinchine_check(gp, e, 16, cfg.seeds.front());
    ok = ok && std::abs(single.exact - kp.psi_integral()) <= 1e-12 && single.std_error == 0.0;
    rep.check(E, "khinchine_identity", ok, "exact vs Monte Carlo within 3 standard errors for every weight vector");
  }
}

inline void run_nlogn(RunContext& ctx, ExperimentReport& rep) {
  const std::string E = "nlogn";
  const auto& cfg = ctx.cfg();
  const KernelEvaluator& ke = ctx.ke();
  const GrowthSeries s = nlogn_divergence(cfg.N_expectation, cfg.v, ke);
  rep.add_series(E, s);
  if (s.fit) {
    double worst = 0.0;
    for (std::size_t i = 0; i < s.points.size(); ++i) worst = std::max(worst, std::abs(s.fit->residuals[i]) / s.points[i].x);
    rep.summaries[E]["max_abs_residual_over_N"] = worst;
    rep.check(E, "nlogn_fit", s.fit->a > 0.0 && s.fit->r2 >= 0.999,
              "a = " + fmt(s.fit->a) + ", R2 = " + fmt(s.fit->r2));
  }

  // Expected-kernel asymptotics at v: m Re E[K_m] -> psi(0) v / (2 pi (v^2 + 4)).
  const double v = cfg.v;
  const double target = ke.psi().radial(0.0) * v / (2.0 * kPi * (v * v + 4.0));
  const int m_hi = cfg.N_expectation.empty() ? 4096 : std::max(4096, 2 * cfg.N_expectation.back());
  std::vector<double> re(static_cast<std::size_t>(m_hi + 1), 0.0);
  parallel_for(32, m_hi + 1, [&](std::ptrdiff_t m) { re[m] = ke.expected(static_cast<int>(m), v).real(); });
  bool positive = true;
  for (int m = 32; m <= m_hi; ++m) positive = positive && re[m] > 0.0;
  for (int m = 32; m <= m_hi; m *= 2) rep.add_row({E, m, std::nullopt, "m_re_expected_kernel", m * re[m], 0.0});
  const double at4096 = 4096.0 * re[4096];
  rep.summaries[E]["expected_kernel_target"] = target;
  rep.check(E, "expected_kernel_asymptote", std::abs(at4096 - target) <= 0.03 * target,
            "m Re E at m=4096: " + fmt(at4096) + " vs " + fmt(target));
  rep.check(E, "expected_kernel_positive", positive, "Re E[K_m] > 0 for 32 <= m <= " + std::to_string(m_hi));
}

inline void run_sandwich(RunContext& ctx, ExperimentReport& rep) {
  const std::string E = "sandwich";
  const auto& cfg = ctx.cfg();
  const KernelEvaluator& ke = ctx.ke();
  const auto& cells = ctx.walk_cells(cfg.selected("bilinear"));
  GrowthSeries lower{"lambda_max_median", GrowthModel::log, {}, {}};
  GrowthSeries upper{"schur_upper", GrowthModel::log, {}, {}};
  bool pointwise = true;
  for (int N : cfg.eigen_schedule()) {
    std::vector<double> lams;
    const double up = schur_upper_bound(N, ke);
    for (const auto& c : cells) {
      if (c.endpoint.N != N) continue;
      lams.push_back(c.endpoint.lambda);
      pointwise = pointwise && c.endpoint.lambda <= up && c.endpoint.lambda <= c.endpoint.schur_row * (1 + 1e-12);
      rep.add_row({E, N, c.endpoint.seed, "lambda_max", c.endpoint.lambda, c.endpoint.residual});
      rep.add_row({E, N, c.endpoint.seed, "rayleigh_ones", c.endpoint.rayleigh_ones, 0.0});
      rep.add_row({E, N, c.endpoint.seed, "schur_row", c.endpoint.schur_row, 0.0});
    }
    lower.points.push_back({static_cast<double>(N), median(lams)});
    upper.points.push_back({static_cast<double>(N), up});
  }
  if (lower.points.front().x > 0.0) {
    lower.refit();
    upper.refit();
  }
  rep.add_series(E, lower);
  rep.add_series(E, upper);
  rep.check(E, "sandwich_pointwise", pointwise, "lambda_max <= Schur bounds for every N and seed");
  if (lower.fit)
    rep.check(E, "lower_log_fit", lower.fit->a > 0.0 && lower.fit->r2 >= 0.95,
              "a = " + fmt(lower.fit->a) + ", R2 = " + fmt(lower.fit->r2));
  if (upper.fit)
    rep.check(E, "upper_log_fit", upper.fit->a > 0.0 && upper.fit->r2 >= 0.99,
              "a = " + fmt(upper.fit->a) + ", R2 = " + fmt(upper.fit->r2));
}

inline void run_bilinear(RunContext& ctx, ExperimentReport& rep) {
  const std::string E = "bilinear";
  const auto& cfg = ctx.cfg();
  const auto& cells = ctx.walk_cells(true);
  GrowthSeries s{"bilinear_ratio_median", GrowthModel::sqrtlog, {}, {}};
  bool bound = true;
  rep.summaries[E]["mode"] = to_string(SignMode::complex_phase);
  rep.summaries[E]["P_prime_shares_P_kernel"] = ctx.same_recentered();
  for (int N : cfg.eigen_schedule()) {
    std::vector<double> rs;
    for (const auto& c : cells) {
      if (c.endpoint.N != N || !c.bilinear) continue;
      const auto& b = *c.bilinear;
      rs.push_back(b.ratio);
      bound = bound && b.ratio >= 0.9 * b.sign_bound;
      rep.add_row({E, N, c.endpoint.seed, "bilinear_ratio", b.ratio, 0.0});
      rep.add_row({E, N, c.endpoint.seed, "sign_bound", b.sign_bound, 0.0});
    }
    s.points.push_back({static_cast<double>(N), median(rs)});
  }
  if (s.points.front().x > 1.0) s.refit();
  rep.add_series(E, s);
  rep.check(E, "sign_search_bound", bound, "R >= 0.9 sqrt(int psi' lambda_max) for every cell");
  if (s.fit)
    rep.check(E, "sqrtlog_fit", s.fit->a > 0.0 && s.fit->r2 >= 0.95, "a = " + fmt(s.fit->a) + ", R2 = " + fmt(s.fit->r2));
  if (s.points.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& p : s.points) {
      xs.push_back(p.x);
      ys.push_back(p.value);
    }
    const double rho = spearman(xs, ys);
    rep.summaries[E]["spearman"] = rho;
    rep.check(E, "monotone_trend", rho >= 0.9, "Spearman rank correlation " + fmt(rho));
  }
}

inline void run_proposition(RunContext& ctx, ExperimentReport& rep) {
  const std::string E = "proposition";
  const auto& cfg = ctx.cfg();
  const EndpointConstantResult& r = ctx.endpoint_constant();
  rep.add_series(E, r.series);
  for (const auto& st : r.steps) rep.add_row({E, st.T, cfg.seeds.front(), "eigen_solves", static_cast<double>(st.iterations), 0.0});
  bool monotone = true;
  for (std::size_t i = 1; i < r.steps.size(); ++i) monotone = monotone && r.steps[i].c2 >= r.steps[i - 1].c2;
  rep.check(E, "window_monotone", monotone, "C(T)^2 nondecreasing in T");
  if (!r.steps.empty() && r.steps.front().T == 0) {
    const double l2 = symbol_l2_norm_sq(cfg.P);
    rep.check(E, "single_time_plancherel", std::abs(r.steps.front().c2 - l2) <= 1e-8 * l2,
              "C(0)^2 = " + fmt(r.steps.front().c2) + " vs int phi^2 = " + fmt(l2));
  }
  if (r.series.fit) {
    double worst = 0.0;
    for (std::size_t i = 0; i < r.series.points.size(); ++i)
      worst = std::max(worst, std::abs(r.series.fit->residuals[i]) / r.series.points[i].value);
    rep.check(E, "log_window_fit", r.series.fit->a > 0.0 && worst <= 0.15,
              "a = " + fmt(r.series.fit->a) + ", max relative residual " + fmt(worst));
  }
}

inline void run_contrast(RunContext& ctx, ExperimentReport& rep) {
  const std::string E = "contrast";
  const auto& cfg = ctx.cfg();
  std::vector<int> Ts;
  for (int T : cfg.T_schedule)
    if (T > 0) Ts.push_back(T);
  const L4Result l4 = l4_strichartz_ratio(cfg.contrast_grid, cfg.P, Ts, cfg.l4_trials, cfg.seeds.front());
  rep.add_series(E, l4.series);
  for (std::size_t ti = 0; ti < Ts.size(); ++ti)
    for (std::size_t tr = 0; tr < l4.ratios.size(); ++tr)
      rep.add_row({E, Ts[ti], static_cast<std::uint64_t>(tr), "l4_ratio_trial", l4.ratios[tr][ti], 0.0});
  bool atom_ok = true;
  for (std::size_t ti = 0; ti < Ts.size(); ++ti) atom_ok = atom_ok && l4.ratios[0][ti] <= l4.series.points[ti].value;
  rep.check(E, "l4_atom_below_max", atom_ok, "single-atom ratio <= max over trials");
  if (Ts.size() >= 2) {
    const double a = l4.series.points[Ts.size() - 2].value, b = l4.series.points.back().value;
    const double change = std::abs(b - a) / a;
    rep.check(E, "l4_saturates", change < 0.10,
              "T=" + std::to_string(Ts[Ts.size() - 2]) + " -> " + std::to_string(Ts.back()) + ": relative change " + fmt(change));
    const EndpointConstantResult& ep = ctx.endpoint_constant();
    const auto& st = ep.steps;
    const bool grows = st.size() >= 2 && st.back().c2 > st[st.size() - 2].c2 && ep.series.fit && ep.series.fit->a > 0.0;
    rep.check(E, "endpoint_grows_on_same_windows", grows,
              "C(T)^2 on the top two windows: " + (st.size() >= 2 ? fmt(st[st.size() - 2].c2) + " -> " + fmt(st.back().c2) : "n/a"));
  }
}

}  // namespace detail

/// Runs the selected experiments in a fixed order and returns the report.
inline ExperimentReport run(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.threads > 0) set_thread_count(cfg.threads);
  ExperimentReport rep;
  rep.config = to_json(cfg);
  rep.config_hash = config_hash(cfg);
  detail::RunContext ctx(cfg);
  const std::vector<std::pair<std::string, std::function<void(detail::RunContext&, ExperimentReport&)>>> table = {
      {"validate", detail::run_validate},       {"nlogn", detail::run_nlogn},
      {"sandwich", detail::run_sandwich},       {"bilinear", detail::run_bilinear},
      {"proposition", detail::run_proposition}, {"contrast", detail::run_contrast}};
  for (const auto& [name, fn] : table) {
    if (!cfg.selected(name)) continue;
    rep.experiments.push_back(name);
    rep.summaries[name]["status"] = "ok";
    try {
      fn(ctx, rep);
    } catch (const std::exception& e) {
      rep.errors[name] = e.what();
      rep.summaries[name]["status"] = "error";
    }
  }
  return rep;
}

}  // namespace strichartz
