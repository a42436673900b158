#pragma once

// Smooth bump Fourier multiplier symbols and the quantities derived from them.
//
// Every symbol is the standard mollifier
//
//     phi(xi) = exp(1 - 1 / (1 - |xi - xi0|^2 / rho^2))   for |xi - xi0| < rho
//
// and zero elsewhere, so phi(xi0) = 1. A SymbolProduct raises a symbol to an
// integer power; power 2 is the symbol of P P*.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "strichartz/error.hpp"
#include "strichartz/quadrature.hpp"
#include "strichartz/vec2.hpp"

namespace strichartz {

using cplx = std::complex<double>;

namespace detail {

/// exp(q * (1 - 1/(1-u))) for u = |xi - xi0|^2 / rho^2 in [0, 1).
inline double bump_of_u(double u, double q) noexcept {
  if (u >= 1.0) return 0.0;
  const double e = q * (1.0 - 1.0 / (1.0 - u));
  return e < -700.0 ? 0.0 : std::exp(e);
}

}  // namespace detail

class Symbol {
public:
  Symbol(Vec2 center, double radius, std::string label)
      : center_(center), radius_(radius), label_(std::move(label)) {
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw InvalidParameter("symbol radius must be positive, got " + std::to_string(radius));
  }

  Vec2 center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  const std::string& label() const noexcept { return label_; }

  double operator()(Vec2 xi) const noexcept {
    return detail::bump_of_u(norm_sq(xi - center_) / (radius_ * radius_), 1.0);
  }

  friend bool operator==(const Symbol&, const Symbol&) = default;

private:
  Vec2 center_;
  double radius_;
  std::string label_;
};

class SymbolProduct {
public:
  SymbolProduct(Symbol base, int power) : base_(std::move(base)), power_(power) {
    if (power < 1) throw InvalidParameter("symbol power must be a positive integer");
  }

  const Symbol& base() const noexcept { return base_; }
  int power() const noexcept { return power_; }
  Vec2 center() const noexcept { return base_.center(); }
  double radius() const noexcept { return base_.radius(); }

  double operator()(Vec2 xi) const noexcept {
    return detail::bump_of_u(norm_sq(xi - center()) / (radius() * radius()), power_);
  }

  /// Value as a function of the distance to the center.
  double radial(double r) const noexcept {
    return detail::bump_of_u(r * r / (radius() * radius()), power_);
  }

private:
  Symbol base_;
  int power_;
};

inline Symbol make_bump(Vec2 center, double radius, std::string label = "") {
  return Symbol(center, radius, std::move(label));
}

/// |phi|^2, the symbol of P P*.
inline SymbolProduct gram_symbol(const Symbol& s) { return SymbolProduct(s, 2); }

inline Symbol galilean_recenter(const Symbol& s) { return Symbol({0.0, 0.0}, s.radius(), s.label()); }

inline SymbolProduct galilean_recenter(const SymbolProduct& s) {
  return SymbolProduct(galilean_recenter(s.base()), s.power());
}

namespace detail {

/// Integral over the plane of bump^q for a bump of radius rho, computed in
/// polar form: rho^2 * pi * int_0^1 bump(u)^q du with u = s^2.
inline double bump_power_integral(double q, double rho) {
  const double unit =
      kPi * quad::adaptive([q](double u) { return bump_of_u(u, q); }, 0.0, 1.0, 1e-14);
  return rho * rho * unit;
}

/// Radial inverse Fourier transform of a centered bump^q of radius rho:
///   2 pi rho^2 int_0^1 bump(s^2)^q J0(2 pi k rho s) s ds.
inline double bump_power_hankel(double q, double rho, double k) {
  const double w = 2.0 * kPi * k * rho;
  const int panels = quad::panels_for(1.0, w, 8.0, 8);
  const double unit = quad::composite(
      [q, w](double s) { return bump_of_u(s * s, q) * ::j0(w * s) * s; }, 0.0, 1.0, panels);
  return 2.0 * kPi * rho * rho * unit;
}

}  // namespace detail

/// Integral over the plane of s(xi)^2.
inline double symbol_l2_norm_sq(const Symbol& s) { return detail::bump_power_integral(2.0, s.radius()); }
inline double symbol_l2_norm_sq(const SymbolProduct& s) {
  return detail::bump_power_integral(2.0 * s.power(), s.radius());
}

/// Integral over the plane of s(xi).
inline double symbol_integral(const Symbol& s) { return detail::bump_power_integral(1.0, s.radius()); }
inline double symbol_integral(const SymbolProduct& s) {
  return detail::bump_power_integral(s.power(), s.radius());
}

/// Inverse Fourier transform int s(xi) e^{2 pi i z.xi} dxi at one point.
inline cplx inverse_ft_at(const SymbolProduct& s, Vec2 z) {
  const double radial = detail::bump_power_hankel(s.power(), s.radius(), norm(z));
  const double phase = 2.0 * kPi * dot(z, s.center());
  return radial * cplx(std::cos(phase), std::sin(phase));
}

// ---------------------------------------------------------------------------
// Tail bound for the inverse transform.

namespace detail {

/// Taylor jet of order K at a point: coefficients of (u - u0)^k.
using Jet = std::vector<double>;

/// Jet of g(u) = exp(q (1 - 1/(1-u))) at u0 < 1, order K.
inline Jet bump_jet(double u0, double q, int order) {
  Jet h(order + 1);
  const double a = 1.0 / (1.0 - u0);
  h[0] = q * (1.0 - a);
  double ak = a;
  for (int k = 1; k <= order; ++k) {
    ak *= a;
    h[k] = -q * ak;
  }
  Jet e(order + 1, 0.0);
  if (h[0] < -700.0) return e;
  e[0] = std::exp(h[0]);
  for (int k = 1; k <= order; ++k) {
    double s = 0.0;
    for (int i = 1; i <= k; ++i) s += i * h[i] * e[k - i];
    e[k] = s / k;
  }
  return e;
}

/// Radial Laplacian in the variable u = s^2: (L g)(u) = 4 (g' + u g'').
/// Consumes two orders of the jet.
inline Jet radial_laplacian(const Jet& g, double u0) {
  const int order = static_cast<int>(g.size()) - 1;
  Jet out(order - 1, 0.0);
  for (int k = 0; k + 2 <= order; ++k) {
    const double d1 = (k + 1) * g[k + 1];
    const double d2 = (k + 2.0) * (k + 1.0) * g[k + 2];
    const double d2_prev = k >= 1 ? (k + 1.0) * k * g[k + 1] : 0.0;
    out[k] = 4.0 * (d1 + u0 * d2 + d2_prev);
  }
  return out;
}

/// (L^j g)(u0) for the unit-radius bump^q.
inline double iterated_laplacian(double u0, double q, int j) {
  Jet g = bump_jet(u0, q, 2 * j);
  for (int i = 0; i < j; ++i) g = radial_laplacian(g, u0);
  return g[0];
}

/// L1 norm over the plane of Delta^j applied to a bump^q of radius rho.
inline double laplacian_power_l1(double q, double rho, int j) {
  const double unit = kPi * quad::composite(
                                [q, j](double u) { return std::abs(iterated_laplacian(u, q, j)); },
                                0.0, 1.0, 400);
  return std::pow(rho, 2.0 - 2.0 * j) * unit;
}

}  // namespace detail

/// Upper bound for the integral of |s-check| outside the disk of radius W,
/// hence outside the square [-W, W]^2. Quadrature of |s-check| on [W, 4W]
/// (with a 5% margin) plus, beyond 4W, the smallest of the bounds
/// |s-check(k)| <= ||Delta^j s||_1 / (2 pi |k|)^{2j}, j = 2..6.
inline double inverse_ft_tail_bound(const SymbolProduct& s, double half_width) {
  require(half_width > 0.0, "half_width must be positive");
  const double q = s.power();
  const double rho = s.radius();
  const double W = half_width;
  const double K = 4.0 * W;
  // |s-check| oscillates with period about 1/rho in k.
  const int panels = std::max(16, static_cast<int>(std::ceil((K - W) * rho * 4.0)));
  const double near = quad::composite(
      [&](double k) { return 2.0 * kPi * k * std::abs(detail::bump_power_hankel(q, rho, k)); }, W, K,
      panels);
  double far = std::numeric_limits<double>::infinity();
  for (int j = 2; j <= 6; ++j) {
    const double c = detail::laplacian_power_l1(q, rho, j);
    const double b = 2.0 * kPi * c * std::pow(2.0 * kPi, -2.0 * j) * std::pow(K, 2.0 - 2.0 * j) /
                     (2.0 * j - 2.0);
    far = std::min(far, b);
  }
  return 1.05 * near + far + 1e-16;
}

/// s-check sampled on a uniform (samples x samples) grid covering
/// [-W, W]^2, endpoints included. Row i holds z.y = -W + i h.
struct InverseFtTable {
  double half_width = 0.0;
  int samples = 0;
  double spacing = 0.0;
  double tail_bound = 0.0;
  std::vector<cplx> values;

  Vec2 point(int i, int j) const noexcept {
    return {-half_width + j * spacing, -half_width + i * spacing};
  }
  cplx at(int i, int j) const { return values.at(static_cast<std::size_t>(i) * samples + j); }
};

inline bool is_power_of_two(long n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

inline InverseFtTable inverse_ft_table(const SymbolProduct& s, double half_width, int samples,
                                       double tolerance = 1e-10) {
  require(is_power_of_two(samples) && samples >= 2, "samples must be a power of two");
  require(half_width > 0.0, "half_width must be positive");
  InverseFtTable t;
  t.half_width = half_width;
  t.samples = samples;
  t.spacing = 2.0 * half_width / (samples - 1);
  t.tail_bound = inverse_ft_tail_bound(s, half_width);
  if (t.tail_bound > tolerance)
    throw BoxTooSmall("inverse transform box too small: tail bound " +
                          std::to_string(t.tail_bound) + " exceeds tolerance " +
                          std::to_string(tolerance),
                      t.tail_bound);

  // The grid is symmetric under z -> -z and coordinate swaps, so the radial
  // part only needs one evaluation per orbit.
  const int n = samples;
  const int half = (n + 1) / 2;
  auto fold = [n](int i) { return std::min(i, n - 1 - i); };
  std::vector<double> radial(static_cast<std::size_t>(half) * half,
                             std::numeric_limits<double>::quiet_NaN());
  t.values.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int a = std::min(fold(i), fold(j)), b = std::max(fold(i), fold(j));
      double& r = radial[static_cast<std::size_t>(a) * half + b];
      if (std::isnan(r)) r = detail::bump_power_hankel(s.power(), s.radius(), norm(t.point(a, b)));
      const double phase = 2.0 * kPi * dot(t.point(i, j), s.center());
      t.values[static_cast<std::size_t>(i) * n + j] = r * cplx(std::cos(phase), std::sin(phase));
    }
  return t;
}

// ---------------------------------------------------------------------------
// JSON form: {"center": [x, y], "radius": r, "label": s}

inline void to_json(nlohmann::json& j, const Symbol& s) {
  j = nlohmann::json{{"center", {s.center().x, s.center().y}}, {"radius", s.radius()}, {"label", s.label()}};
}

inline Symbol symbol_from_json(const nlohmann::json& j) {
  try {
    const auto& c = j.at("center");
    if (!c.is_array() || c.size() != 2) throw InvalidParameter("symbol center must be [x, y]");
    return Symbol({c[0].get<double>(), c[1].get<double>()}, j.at("radius").get<double>(),
                  j.value("label", std::string{}));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("malformed symbol JSON: ") + e.what());
  }
}

}  // namespace strichartz
