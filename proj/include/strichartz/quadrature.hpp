#pragma once

// Quadrature building blocks: fixed-order composite Gauss-Legendre rules for
// oscillatory integrands whose phase rate is known, adaptive Gauss-Kronrod
// for smooth non-oscillatory ones, and Chebyshev interpolants.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "strichartz/error.hpp"
#include "strichartz/vec2.hpp"

namespace strichartz::quad {

using cplx = std::complex<double>;

/// Nodes and weights of the 20-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre20 {
  std::array<double, 20> x{};
  std::array<double, 20> w{};

  GaussLegendre20() {
    using rule = boost::math::quadrature::gauss<double, 20>;
    const auto& a = rule::abscissa();
    const auto& wt = rule::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      x[2 * i] = -a[i];
      x[2 * i + 1] = a[i];
      w[2 * i] = wt[i];
      w[2 * i + 1] = wt[i];
    }
  }

  static const GaussLegendre20& get() {
    static const GaussLegendre20 rule;
    return rule;
  }
};

/// Flattened composite rule: `panels` equal panels on [a, b].
struct NodeSet {
  std::vector<double> x;
  std::vector<double> w;
};

inline NodeSet composite_nodes(double a, double b, int panels) {
  const auto& gl = GaussLegendre20::get();
  NodeSet ns;
  ns.x.reserve(static_cast<std::size_t>(panels) * 20);
  ns.w.reserve(static_cast<std::size_t>(panels) * 20);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int j = 0; j < 20; ++j) {
      ns.x.push_back(mid + 0.5 * h * gl.x[j]);
      ns.w.push_back(0.5 * h * gl.w[j]);
    }
  }
  return ns;
}

/// Composite 20-point Gauss-Legendre over [a, b]. The caller picks `panels`
/// so that every panel sees a bounded number of phase radians.
template <class F>
auto composite(F&& f, double a, double b, int panels) {
  using R = decltype(f(a));
  const auto& gl = GaussLegendre20::get();
  const double h = (b - a) / panels;
  R total{};
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    R part{};
    for (int j = 0; j < 20; ++j) part += gl.w[j] * f(mid + 0.5 * h * gl.x[j]);
    total += part * (0.5 * h);
  }
  return total;
}

/// Panel count so that a panel carries at most `rad_per_panel` radians of
/// phase when the integrand's phase rate is bounded by `rate`.
inline int panels_for(double length, double rate, double rad_per_panel = 8.0, int floor_panels = 8) {
  const double p = std::ceil(length * rate / rad_per_panel);
  return std::max(floor_panels, static_cast<int>(std::min(p, 5.0e6)) + floor_panels / 2);
}

/// Adaptive 61-point Gauss-Kronrod on [a, b] for smooth real integrands.
/// Stops when the Kronrod error estimate falls below `rel_tol` times the L1
/// norm of the integrand.
template <class F>
double adaptive(F&& f, double a, double b, double rel_tol = 1e-13) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol);
}

// ---------------------------------------------------------------------------
// Chebyshev interpolation on an interval, complex valued.

class Chebyshev {
public:
  Chebyshev() = default;

  /// Interpolates f at the `degree + 1` Chebyshev points of the first kind.
  template <class F>
  Chebyshev(double a, double b, int degree, F&& f) : a_(a), b_(b) {
    const int n = degree + 1;
    std::vector<cplx> vals(n);
    for (int k = 0; k < n; ++k) vals[k] = f(node(a, b, n, k));
    coef_.assign(n, cplx{});
    for (int j = 0; j < n; ++j) {
      cplx s{};
      for (int k = 0; k < n; ++k) s += vals[k] * std::cos(kPi * j * (k + 0.5) / n);
      coef_[j] = s * (2.0 / n);
    }
    coef_[0] *= 0.5;
  }

  static double node(double a, double b, int n, int k) {
    return 0.5 * (a + b) + 0.5 * (b - a) * std::cos(kPi * (k + 0.5) / n);
  }

  double lo() const noexcept { return a_; }
  double hi() const noexcept { return b_; }

  cplx operator()(double x) const noexcept {
    const double t = (2.0 * x - a_ - b_) / (b_ - a_);
    const double t2 = 2.0 * t;
    cplx b1{}, b2{};
    for (std::size_t j = coef_.size() - 1; j >= 1; --j) {
      const cplx b0 = coef_[j] + t2 * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    return coef_[0] + t * b1 - b2;
  }

  /// Magnitude of the trailing coefficients, a cheap a-posteriori error proxy.
  double tail_magnitude() const noexcept {
    const std::size_t n = coef_.size();
    return std::abs(coef_[n - 1]) + std::abs(coef_[n - 2]);
  }

private:
  double a_ = 0.0;
  double b_ = 1.0;
  std::vector<cplx> coef_;
};

}  // namespace strichartz::quad
