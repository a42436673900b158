#pragma once

// Oscillatory kernels of the frequency-localized Schrodinger propagator,
//
//     K_m(y) = int psi(xi) exp(-4 pi^2 i m |xi|^2) exp(2 pi i y.xi) dxi,
//
// for a recentered radial symbol psi. Radial symmetry reduces every kernel
// to a one-dimensional Hankel-type integral in |y|.
//
// Two independent routes are provided:
//  * direct      quadrature of the frequency-side integral, phase resolved;
//  * convolution the spatial identity K_m = (free kernel at time m) * psi-check,
//                integrated over the disk of radius W carrying psi-check.
// Small |m| uses the direct route, larger |m| the convolution route, whose
// phase variation shrinks like 1/m.

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "strichartz/error.hpp"
#include "strichartz/quadrature.hpp"
#include "strichartz/symbols.hpp"
#include "strichartz/vec2.hpp"

namespace strichartz {

/// Kernel of exp(i t Delta): (4 pi i t)^{-1} exp(i |x|^2 / (4 t)).
inline cplx free_kernel(double t, Vec2 x) {
  if (t == 0.0) throw InvalidParameter("free_kernel: t = 0 is a Dirac mass, not a function");
  const double phase = norm_sq(x) / (4.0 * t);
  return cplx(std::cos(phase), std::sin(phase)) / cplx(0.0, 4.0 * kPi * t);
}

enum class KernelMethod { table, direct, convolution };

inline const char* to_string(KernelMethod m) {
  switch (m) {
    case KernelMethod::table: return "table";
    case KernelMethod::direct: return "direct";
    case KernelMethod::convolution: return "convolution";
  }
  return "?";
}

/// Chebyshev tabulation of r -> K_m(r) on [0, r_max] for one m >= 0, in
/// chunks of fixed width. For m above the direct cutoff the tabulated
/// function is the chirp-free envelope exp(-i r^2/(4m)) K_m(r).
class RadialKernelTable {
public:
  RadialKernelTable(int m, bool envelope, double chunk_width,
                    std::vector<std::shared_ptr<const quad::Chebyshev>> chunks)
      : m_(m), envelope_(envelope), width_(chunk_width), chunks_(std::move(chunks)) {}

  int m() const noexcept { return m_; }
  double r_max() const noexcept { return width_ * static_cast<double>(chunks_.size()); }
  bool covers(double r) const noexcept { return r >= 0.0 && r < r_max(); }

  /// K_m(r) for 0 <= r < r_max().
  cplx operator()(double r) const {
    const auto idx = static_cast<std::size_t>(r / width_);
    const cplx v = (*chunks_[std::min(idx, chunks_.size() - 1)])(r);
    if (!envelope_) return v;
    const double phase = r * r / (4.0 * m_);
    return v * cplx(std::cos(phase), std::sin(phase));
  }

private:
  int m_;
  bool envelope_;
  double width_;
  std::vector<std::shared_ptr<const quad::Chebyshev>> chunks_;
};

class KernelEvaluator {
public:
  struct Options {
    double half_width = 48.0;    ///< box [-W, W]^2 carrying psi-check
    int table_samples = 64;      ///< samples per side of the cached psi-check table
    int direct_cutoff = 8;       ///< |m| <= cutoff uses direct quadrature
    double tolerance = 1e-8;     ///< target absolute kernel error
    double table_tolerance = 1e-9;  ///< admissible psi-check tail mass
    int chebyshev_degree = 24;
  };

  explicit KernelEvaluator(const SymbolProduct& psi) : KernelEvaluator(psi, Options{}) {}

  KernelEvaluator(const SymbolProduct& psi, Options opt)
      : original_center_(psi.center()), psi_(galilean_recenter(psi)), opt_(opt),
        table_(inverse_ft_table(psi_, opt.half_width, opt.table_samples, opt.table_tolerance)),
        integral_(symbol_integral(psi_)) {
    require(opt.direct_cutoff >= 0, "direct_cutoff must be nonnegative");
    require(opt.tolerance > 0.0, "tolerance must be positive");
    const double achievable = convolution_error(opt.direct_cutoff + 1);
    if (achievable > opt.tolerance)
      throw AccuracyError("kernel tolerance unattainable with the configured table", achievable);
  }

  KernelEvaluator(const KernelEvaluator&) = delete;
  KernelEvaluator& operator=(const KernelEvaluator&) = delete;

  const SymbolProduct& psi() const noexcept { return psi_; }
  Vec2 original_center() const noexcept { return original_center_; }
  const InverseFtTable& table() const noexcept { return table_; }
  const Options& options() const noexcept { return opt_; }
  int direct_cutoff() const noexcept { return opt_.direct_cutoff; }
  double tolerance() const noexcept { return opt_.tolerance; }
  double tail_bound() const noexcept { return table_.tail_bound; }

  /// int psi, the value of every kernel at m = 0, y = 0.
  double psi_integral() const noexcept { return integral_; }

  /// Truncation error of the convolution route at time m:
  /// |free kernel amplitude| times the tail bound.
  double convolution_error(int m) const noexcept {
    return table_.tail_bound / (4.0 * kPi * std::max(1, std::abs(m)));
  }

  /// Error contract for kernel_eval at time m.
  double error_bound(int m) const noexcept {
    return std::abs(m) > opt_.direct_cutoff ? opt_.tolerance + convolution_error(m) : opt_.tolerance;
  }

  KernelMethod method_for(int m) const noexcept {
    if (m == 0) return KernelMethod::table;
    return std::abs(m) <= opt_.direct_cutoff ? KernelMethod::direct : KernelMethod::convolution;
  }

  /// K_m(y) via the method selected for m.
  cplx eval(int m, Vec2 y) const { return eval_radial(m, norm(y)); }

  cplx eval_radial(int m, double r) const {
    switch (method_for(m)) {
      case KernelMethod::table: return psi_check(r);
      case KernelMethod::direct: return direct(m, r);
      case KernelMethod::convolution: return convolution(m, r);
    }
    return {};
  }

  /// psi-check at radius r, by the radial transform that fills the table.
  cplx psi_check(double r) const {
    return detail::bump_power_hankel(psi_.power(), psi_.radius(), r);
  }

  /// Frequency-side quadrature:
  ///   2 pi int_0^rho psi(s) exp(-4 pi^2 i m s^2) J0(2 pi s r) s ds.
  cplx direct(int m, double r) const {
    const double rho = psi_.radius();
    const double q = psi_.power();
    const double a = 4.0 * kPi * kPi * m;
    const double rate = 2.0 * std::abs(a) * rho + 2.0 * kPi * r;
    const int panels = quad::panels_for(rho, rate, 8.0, 16);
    const cplx total = quad::composite(
        [&](double s) {
          const double amp = detail::bump_of_u(s * s / (rho * rho), q) * ::j0(2.0 * kPi * s * r) * s;
          const double ph = -a * s * s;
          return amp * cplx(std::cos(ph), std::sin(ph));
        },
        0.0, rho, panels);
    return 2.0 * kPi * total;
  }

  /// Spatial convolution of the free kernel with psi-check, in radial form:
  ///   K_m(r) = (2 i m)^{-1} e^{i r^2/(4m)} int_0^W psicheck(k) e^{i k^2/(4m)} J0(k r/(2m)) k dk.
  cplx convolution(int m, double r) const {
    if (m == 0) throw InvalidParameter("convolution route needs m != 0");
    if (m < 0) return std::conj(convolution(-m, r));
    const double phase = r * r / (4.0 * m);
    return envelope(m, r) * cplx(std::cos(phase), std::sin(phase));
  }

  /// exp(-i r^2/(4m)) K_m(r) by the convolution route, m > 0.
  cplx envelope(int m, double r) const {
    const auto& nodes = conv_nodes(m, r);
    const double inv2m = 1.0 / (2.0 * m);
    cplx total{};
    for (std::size_t i = 0; i < nodes.k.size(); ++i) {
      const double k = nodes.k[i];
      const double ph = k * k * 0.5 * inv2m;
      total += nodes.weight[i] * ::j0(k * r * inv2m) * cplx(std::cos(ph), std::sin(ph));
    }
    return total / cplx(0.0, 2.0 * m);
  }

  /// Expected kernel over y ~ centered isotropic Gaussian with per-coordinate
  /// variance |m| v:
  ///   int psi(xi) exp(-4 pi^2 i m |xi|^2) exp(-2 pi^2 |m| v |xi|^2) dxi.
  cplx expected(int m, double v) const {
    require(v >= 0.0, "variance must be nonnegative");
    const double rho = psi_.radius();
    const double q = psi_.power();
    const double am = std::abs(static_cast<double>(m));
    // pi rho^2 int_0^1 bump^q(u) exp(-beta rho^2 u) du
    const double damp = 2.0 * kPi * kPi * am * v * rho * rho;
    const double freq = 4.0 * kPi * kPi * m * rho * rho;
    const double upper = damp > 40.0 ? 40.0 / damp : 1.0;
    const int panels = quad::panels_for(upper, std::abs(freq), 6.0, 16);
    const cplx total = quad::composite(
        [&](double u) {
          const double amp = detail::bump_of_u(u, q) * std::exp(-damp * u);
          return amp * cplx(std::cos(freq * u), -std::sin(freq * u));
        },
        0.0, upper, panels);
    return kPi * rho * rho * total;
  }

  /// Search radius outside which the phase has no stationary point.
  double sup_search_radius(int m) const noexcept {
    return 4.0 * kPi * std::abs(m) * psi_.radius() + 10.0;
  }

  /// max_y |K_m(y)|: coarse search over 64 radii in [0, R_max(m)] followed by
  /// 20 steps of local refinement. The kernel is radial, so the angular
  /// direction of the search is redundant.
  double sup_norm(int m) const {
    const int key = std::abs(m);
    {
      std::lock_guard lock(mutex_);
      if (auto it = sup_cache_.find(key); it != sup_cache_.end()) return it->second;
    }
    double best = 0.0;
    if (key == 0) {
      best = integral_;
    } else {
      const double R = sup_search_radius(key);
      const int coarse = 64;
      const double h0 = R / (coarse - 1);
      double best_r = 0.0;
      for (int i = 0; i < coarse; ++i) {
        const double r = i * h0;
        const double v = std::abs(eval_radial(key, r));
        if (v > best) { best = v; best_r = r; }
      }
      double h = 0.5 * h0;
      for (int step = 0; step < 20; ++step) {
        bool moved = false;
        for (double cand : {best_r - h, best_r + h}) {
          if (cand < 0.0 || cand > R) continue;
          const double v = std::abs(eval_radial(key, cand));
          if (v > best) { best = v; best_r = cand; moved = true; }
        }
        if (!moved) h *= 0.5;
      }
    }
    std::lock_guard lock(mutex_);
    sup_cache_.emplace(key, best);
    return best;
  }

  /// Chebyshev view of r -> K_m(r) covering at least [0, r_max]; chunks are
  /// built once and shared between views.
  RadialKernelTable radial_table(int m, double r_max) const {
    const int key = std::abs(m);
    const bool env = key > opt_.direct_cutoff;
    const double rho = psi_.radius();
    const double width = env ? 0.4 * key * rho : 1.0 / rho;
    const auto needed = static_cast<std::size_t>(std::floor(std::max(r_max, 0.0) / width)) + 1;

    std::vector<std::shared_ptr<const quad::Chebyshev>> chunks;
    std::vector<std::size_t> missing;
    {
      std::lock_guard lock(mutex_);
      auto& slot = chunk_cache_[key];
      if (slot.size() < needed) slot.resize(needed);
      chunks.assign(slot.begin(), slot.begin() + static_cast<std::ptrdiff_t>(needed));
    }
    for (std::size_t c = 0; c < needed; ++c)
      if (!chunks[c]) missing.push_back(c);
    for (std::size_t c : missing) {
      const double lo = c * width, hi = (c + 1) * width;
      auto fn = [&](double r) -> cplx {
        if (key == 0) return psi_check(r);
        return env ? envelope(key, r) : direct(key, r);
      };
      chunks[c] = std::make_shared<const quad::Chebyshev>(lo, hi, opt_.chebyshev_degree, fn);
    }
    if (!missing.empty()) {
      std::lock_guard lock(mutex_);
      auto& slot = chunk_cache_[key];
      for (std::size_t c : missing)
        if (!slot[c]) slot[c] = chunks[c];
        else chunks[c] = slot[c];
    }
    return RadialKernelTable(key, env, width, std::move(chunks));
  }

private:
  struct ConvNodes {
    std::vector<double> k;
    std::vector<double> weight;  // GL weight * psi-check(k) * k
  };

  /// Node sets for the convolution route are keyed by a power-of-two panel
  /// count so that psi-check is sampled once per set.
  const ConvNodes& conv_nodes(int m, double r) const {
    const double W = opt_.half_width;
    const double rho = psi_.radius();
    const double rate = 2.0 * kPi * rho + r / (2.0 * m) + W / (2.0 * m);
    int panels = 16;
    while (panels < quad::panels_for(W, rate, 8.0, 16)) panels *= 2;
    std::lock_guard lock(mutex_);
    auto it = conv_cache_.find(panels);
    if (it != conv_cache_.end()) return *it->second;
    auto ns = quad::composite_nodes(0.0, W, panels);
    auto nodes = std::make_unique<ConvNodes>();
    nodes->k = ns.x;
    nodes->weight.resize(ns.x.size());
    for (std::size_t i = 0; i < ns.x.size(); ++i)
      nodes->weight[i] = ns.w[i] * psi_check(ns.x[i]).real() * ns.x[i];
    return *conv_cache_.emplace(panels, std::move(nodes)).first->second;
  }

  Vec2 original_center_;
  SymbolProduct psi_;
  Options opt_;
  InverseFtTable table_;
  double integral_;

  mutable std::mutex mutex_;
  mutable std::map<int, std::unique_ptr<ConvNodes>> conv_cache_;
  mutable std::map<int, double> sup_cache_;
  mutable std::map<int, std::vector<std::shared_ptr<const quad::Chebyshev>>> chunk_cache_;
};

/// kernel_eval: K_m(y) within the evaluator's error contract.
inline cplx kernel_eval(const KernelEvaluator& ke, int m, Vec2 y) { return ke.eval(m, y); }

inline double kernel_sup_norm(const KernelEvaluator& ke, int m) { return ke.sup_norm(m); }

inline cplx expected_kernel(const KernelEvaluator& ke, int m, double v) { return ke.expected(m, v); }

/// One row of a cross-method probe comparison.
struct ProbeRow {
  int m = 0;
  Vec2 y;
  KernelMethod method = KernelMethod::direct;
  cplx value;
  double abs_err = 0.0;  ///< distance to the other route
};

/// Default probe points for cross-method and grid comparisons.
inline std::vector<Vec2> default_probe_points() { return {{0.0, 0.0}, {0.75, -0.5}, {2.5, 1.25}}; }

/// Evaluates both routes at every (m, y) and records their disagreement.
inline std::vector<ProbeRow> cross_method_probe(const KernelEvaluator& ke, std::span<const int> ms,
                                                std::span<const Vec2> ys) {
  std::vector<ProbeRow> rows;
  for (int m : ms)
    for (Vec2 y : ys) {
      const cplx d = ke.direct(m, norm(y));
      const cplx c = ke.convolution(m, norm(y));
      const double err = std::abs(d - c);
      rows.push_back({m, y, KernelMethod::direct, d, err});
      rows.push_back({m, y, KernelMethod::convolution, c, err});
    }
  return rows;
}

/// Probe rows as CSV: m, y1, y2, method, re, im, abs_err.
inline std::string probe_csv(std::span<const ProbeRow> rows) {
  std::ostringstream os;
  os.precision(17);
  os << "m,y1,y2,method,re,im,abs_err\n";
  for (const auto& r : rows)
    os << r.m << ',' << r.y.x << ',' << r.y.y << ',' << to_string(r.method) << ',' << r.value.real() << ','
       << r.value.imag() << ',' << r.abs_err << '\n';
  return os.str();
}

}  // namespace strichartz
