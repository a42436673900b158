#pragma once

// Periodic-grid spectral simulator for exp(i t Delta).
//
// Arrays are n x n, row-major with row index along y, in FFT order: index j
// stands for the coordinate (j < n/2 ? j : j - n) * dx and the frequency
// (j < n/2 ? j : j - n) / L. Transforms follow
//     f-hat(k / L) = dx^2 * sum_j f(j dx) exp(-2 pi i k.j / n),
//     f(j dx)      = L^-2 * sum_k f-hat(k / L) exp(+2 pi i k.j / n),
// so lattice sums in frequency are Riemann sums with cell area L^-2.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "strichartz/error.hpp"
#include "strichartz/philox.hpp"
#include "strichartz/symbols.hpp"
#include "strichartz/vec2.hpp"

namespace strichartz {

struct GridSpec {
  double L = 32.0;
  int n = 512;

  double dx() const noexcept { return L / n; }
  /// Largest representable frequency magnitude along an axis.
  double nyquist() const noexcept { return n / (2.0 * L); }
  int wrap(int j) const noexcept { return j < n / 2 ? j : j - n; }
  double coord(int j) const noexcept { return wrap(j) * dx(); }
  double freq(int j) const noexcept { return wrap(j) / L; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n) * n; }

  void validate() const {
    require(L > 0.0 && std::isfinite(L), "grid side L must be positive");
    require(is_power_of_two(n) && n >= 4, "grid size n must be a power of two >= 4");
  }
};

enum class Domain { physical, frequency };

struct GridField {
  GridSpec spec;
  Domain domain = Domain::physical;
  std::vector<cplx> values;

  cplx& at(int i, int j) { return values[static_cast<std::size_t>(i) * spec.n + j]; }
  cplx at(int i, int j) const { return values[static_cast<std::size_t>(i) * spec.n + j]; }
};

// ---------------------------------------------------------------------------
// FFTW plans; creation is serialized, execution on fresh arrays is
// thread-safe. FFTW_ESTIMATE keeps the algorithm choice reproducible.

namespace detail {

class FftPlans {
public:
  static const FftPlans& get(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<FftPlans>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot.reset(new FftPlans(n));
    return *slot;
  }

  void forward(std::vector<cplx>& a) const { fftw_execute_dft(fwd_, ptr(a), ptr(a)); }
  void backward(std::vector<cplx>& a) const { fftw_execute_dft(bwd_, ptr(a), ptr(a)); }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }

private:
  explicit FftPlans(int n) {
    std::vector<cplx> scratch(static_cast<std::size_t>(n) * n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_ = fftw_plan_dft_2d(n, n, ptr(scratch), ptr(scratch), FFTW_FORWARD, flags);
    bwd_ = fftw_plan_dft_2d(n, n, ptr(scratch), ptr(scratch), FFTW_BACKWARD, flags);
    if (!fwd_ || !bwd_) throw Error("fftw planning failed for n = " + std::to_string(n));
  }
  static fftw_complex* ptr(std::vector<cplx>& a) { return reinterpret_cast<fftw_complex*>(a.data()); }

  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

}  // namespace detail

inline GridField zero_field(const GridSpec& spec, Domain d = Domain::physical) {
  spec.validate();
  return {spec, d, std::vector<cplx>(spec.size())};
}

inline GridField transform(GridField f, Domain target) {
  if (f.domain == target) return f;
  const auto& plans = detail::FftPlans::get(f.spec.n);
  if (target == Domain::frequency) {
    plans.forward(f.values);
    const double s = f.spec.dx() * f.spec.dx();
    for (auto& z : f.values) z *= s;
  } else {
    plans.backward(f.values);
    const double s = 1.0 / (f.spec.L * f.spec.L);
    for (auto& z : f.values) z *= s;
  }
  f.domain = target;
  return f;
}

/// The unit Dirac mass at x, held in frequency form exp(-2 pi i x.xi).
inline GridField dirac(const GridSpec& spec, Vec2 x) {
  GridField f = zero_field(spec, Domain::frequency);
  for (int i = 0; i < spec.n; ++i)
    for (int j = 0; j < spec.n; ++j) {
      const double ph = -2.0 * kPi * (x.x * spec.freq(j) + x.y * spec.freq(i));
      f.at(i, j) = {std::cos(ph), std::sin(ph)};
    }
  return f;
}

/// Multiplies the frequency side by exp(-4 pi^2 i t |xi|^2); exact in t.
inline GridField propagate(const GridField& field, double t) {
  const Domain back = field.domain;
  GridField f = transform(field, Domain::frequency);
  if (t != 0.0) {
    const int n = f.spec.n;
    std::vector<double> k2(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) k2[j] = f.spec.freq(j) * f.spec.freq(j);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double ph = -4.0 * kPi * kPi * t * (k2[i] + k2[j]);
        f.at(i, j) *= cplx(std::cos(ph), std::sin(ph));
      }
  }
  return transform(std::move(f), back);
}

/// Smallest power-of-two n whose anti-aliasing ball n/(2L) - 1 strictly
/// contains a support of the given outer radius.
inline int required_grid_n(double L, double outer_radius) {
  int n = 4;
  while (!(outer_radius < n / (2.0 * L) - 1.0)) n *= 2;
  return n;
}

template <class S>
void check_margin(const GridSpec& spec, const S& s) {
  const double outer = norm(s.center()) + s.radius();
  if (!(outer < spec.nyquist() - 1.0))
    throw GridTooCoarse("symbol support radius " + std::to_string(outer) +
                            " exceeds the anti-aliasing ball; need n >= " +
                            std::to_string(required_grid_n(spec.L, outer)),
                        required_grid_n(spec.L, outer));
}

/// Frequency-side multiplication by a Symbol or SymbolProduct.
template <class S>
GridField apply_multiplier(const GridField& field, const S& s) {
  check_margin(field.spec, s);
  const Domain back = field.domain;
  GridField f = transform(field, Domain::frequency);
  for (int i = 0; i < f.spec.n; ++i)
    for (int j = 0; j < f.spec.n; ++j) f.at(i, j) *= s(Vec2{f.spec.freq(j), f.spec.freq(i)});
  return transform(std::move(f), back);
}

inline double l2_norm_sq(const GridField& f) {
  double s = 0.0;
  for (cplx z : f.values) s += std::norm(z);
  const double cell = f.domain == Domain::physical ? f.spec.dx() * f.spec.dx()
                                                   : 1.0 / (f.spec.L * f.spec.L);
  return s * cell;
}

/// <a, b> = int a conj(b), linear in a.
inline cplx inner(const GridField& a, const GridField& b) {
  if (a.spec.n != b.spec.n || a.spec.L != b.spec.L) throw DimensionMismatch("inner: grid specs differ");
  const GridField pa = transform(a, Domain::physical);
  const GridField pb = transform(b, Domain::physical);
  cplx s{};
  for (std::size_t k = 0; k < pa.values.size(); ++k) s += pa.values[k] * std::conj(pb.values[k]);
  return s * (a.spec.dx() * a.spec.dx());
}

/// Value at an arbitrary point of the trigonometric interpolant, summing
/// only nonzero frequency coefficients.
inline cplx sample(const GridField& field, Vec2 y) {
  if (field.domain != Domain::frequency) return sample(transform(field, Domain::frequency), y);
  const GridField& f = field;
  const int n = f.spec.n;
  std::vector<cplx> ex(static_cast<std::size_t>(n)), ey(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    ex[j] = std::polar(1.0, 2.0 * kPi * y.x * f.spec.freq(j));
    ey[j] = std::polar(1.0, 2.0 * kPi * y.y * f.spec.freq(j));
  }
  cplx s{};
  for (int i = 0; i < n; ++i) {
    cplx row{};
    for (int j = 0; j < n; ++j) {
      const cplx z = f.at(i, j);
      if (z != cplx{}) row += z * ex[j];
    }
    s += row * ey[i];
  }
  return s / (f.spec.L * f.spec.L);
}

/// Fraction of |u|^2 held within two cells of the box edge (in the domain
/// the field is stored in).
inline double boundary_mass_fraction(const GridField& f) {
  const int n = f.spec.n;
  auto edge = [n](int j) { return j >= n / 2 - 2 && j <= n / 2 + 1; };
  double total = 0.0, strip = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double a = std::norm(f.at(i, j));
      total += a;
      if (edge(i) || edge(j)) strip += a;
    }
  return total > 0.0 ? strip / total : 0.0;
}

inline constexpr double kTorusMassTolerance = 1e-6;

inline void check_torus(const GridField& f, const std::string& what) {
  const double frac = boundary_mass_fraction(f);
  if (frac > kTorusMassTolerance)
    throw BoxTooSmall(what + ": boundary mass fraction " + std::to_string(frac) + " exceeds 1e-6", frac);
}

/// Largest |t| for which a field supported within r0 of the origin, with
/// frequencies within outer_radius, stays clear of the box edge.
inline double torus_valid_time(const GridSpec& spec, double outer_radius, double r0) {
  return (spec.L / 2.0 - 2.0 - r0) / (4.0 * kPi * outer_radius);
}

/// (sum_t dt (sum_x dx^2 |u|^r)^{q/r})^{1/q}; q or r = infinity selects sup.
inline double mixed_norm(const std::vector<GridField>& fields, double q, double r, double dt) {
  require(q >= 1.0 && r >= 1.0, "mixed_norm: exponents must be >= 1");
  require(dt > 0.0, "mixed_norm: dt must be positive");
  std::vector<double> spatial;
  for (const auto& field : fields) {
    const GridField f = transform(field, Domain::physical);
    if (!fields.empty() && f.spec.n != fields.front().spec.n) throw DimensionMismatch("mixed_norm: grid specs differ");
    if (std::isinf(r)) {
      double m = 0.0;
      for (cplx z : f.values) m = std::max(m, std::abs(z));
      spatial.push_back(m);
    } else {
      double s = 0.0;
      for (cplx z : f.values) s += std::pow(std::abs(z), r);
      spatial.push_back(std::pow(s * f.spec.dx() * f.spec.dx(), 1.0 / r));
    }
  }
  if (std::isinf(q)) return spatial.empty() ? 0.0 : *std::max_element(spatial.begin(), spatial.end());
  double s = 0.0;
  for (double x : spatial) s += dt * std::pow(x, q);
  return std::pow(s, 1.0 / q);
}

/// Random field localized by a Gaussian window of standard deviation
/// `window`, band-limited by s and scaled to unit L2 norm.
template <class S>
GridField random_band_limited(const GridSpec& spec, const S& s, std::uint64_t seed, int index,
                              double window = 2.0) {
  GridField f = zero_field(spec);
  const rng::CounterRng gen(seed, rng::Stream::field);
  const int n = spec.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double r2 = spec.coord(i) * spec.coord(i) + spec.coord(j) * spec.coord(j);
      const double env = std::exp(-r2 / (4.0 * window * window));
      if (env < 1e-30) continue;
      const Vec2 z = gen.normal2(static_cast<std::int64_t>(i) * n + j, static_cast<std::uint32_t>(index));
      f.at(i, j) = env * cplx(z.x, z.y);
    }
  f = apply_multiplier(f, s);
  const double nrm = std::sqrt(l2_norm_sq(f));
  if (nrm == 0.0) throw DegenerateInput("random field vanished after projection");
  for (auto& z : f.values) z /= nrm;
  return f;
}

}  // namespace strichartz
