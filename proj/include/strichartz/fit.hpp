#pragma once

// Two-parameter least-squares growth fits and rank correlation.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "strichartz/error.hpp"

namespace strichartz {

enum class GrowthModel {
  log,         ///< a ln N + b
  nlogn,       ///< a N ln N + b N
  sqrtlog,     ///< a sqrt(ln N) + b
  log_window,  ///< a ln(2 + 2T) + b
};

inline const char* to_string(GrowthModel m) {
  switch (m) {
    case GrowthModel::log: return "a*lnN+b";
    case GrowthModel::nlogn: return "a*NlnN+b*N";
    case GrowthModel::sqrtlog: return "a*sqrt(lnN)+b";
    case GrowthModel::log_window: return "a*ln(2+2T)+b";
  }
  return "?";
}

/// Basis pair (f1, f2) with value = a f1(x) + b f2(x).
inline std::pair<double, double> growth_basis(GrowthModel m, double x) {
  switch (m) {
    case GrowthModel::log: return {std::log(x), 1.0};
    case GrowthModel::nlogn: return {x * std::log(x), x};
    case GrowthModel::sqrtlog: return {std::sqrt(std::log(x)), 1.0};
    case GrowthModel::log_window: return {std::log(2.0 + 2.0 * x), 1.0};
  }
  return {0.0, 0.0};
}

struct GrowthFit {
  double a = 0.0;
  double b = 0.0;
  double r2 = 0.0;
  std::vector<double> residuals;  ///< value - model, in point order

  double predict(GrowthModel m, double x) const {
    const auto [f1, f2] = growth_basis(m, x);
    return a * f1 + b * f2;
  }
};

struct GrowthPoint {
  double x = 0.0;
  double value = 0.0;
};

/// Closed-form normal equations. R^2 = 1 - SS_res / SS_tot, clamped to
/// [0, 1]; zero-variance data has R^2 = 1 by convention.
inline GrowthFit fit_growth(const std::vector<GrowthPoint>& pts, GrowthModel model) {
  if (pts.size() < 3) throw InvalidParameter("fit_growth needs at least 3 points");
  double s11 = 0, s12 = 0, s22 = 0, t1 = 0, t2 = 0;
  for (const auto& p : pts) {
    const auto [f1, f2] = growth_basis(model, p.x);
    if (!std::isfinite(f1) || !std::isfinite(f2))
      throw InvalidParameter("fit_growth: model undefined at x = " + std::to_string(p.x));
    s11 += f1 * f1;
    s12 += f1 * f2;
    s22 += f2 * f2;
    t1 += f1 * p.value;
    t2 += f2 * p.value;
  }
  const double det = s11 * s22 - s12 * s12;
  if (!(std::abs(det) > 1e-12 * std::max(1.0, s11 * s22)))
    throw InvalidParameter("fit_growth: singular design (x values not distinct)");
  GrowthFit fit;
  fit.a = (t1 * s22 - t2 * s12) / det;
  fit.b = (s11 * t2 - s12 * t1) / det;

  double mean = 0.0;
  for (const auto& p : pts) mean += p.value;
  mean /= static_cast<double>(pts.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& p : pts) {
    const double r = p.value - fit.predict(model, p.x);
    fit.residuals.push_back(r);
    ss_res += r * r;
    ss_tot += (p.value - mean) * (p.value - mean);
  }
  if (ss_tot <= 1e-300) fit.r2 = 1.0;
  else fit.r2 = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  return fit;
}

struct GrowthSeries {
  std::string name;
  GrowthModel model = GrowthModel::log;
  std::vector<GrowthPoint> points;
  std::optional<GrowthFit> fit;  ///< set when there are enough points

  void refit() {
    fit.reset();
    if (points.size() >= 3) fit = fit_growth(points, model);
  }
};

/// Average ranks, ties sharing the mean rank.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

/// Spearman rank correlation (Pearson correlation of average ranks).
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionMismatch("spearman: length mismatch");
  if (x.size() < 2) throw InvalidParameter("spearman needs at least 2 points");
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw InvalidParameter("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace strichartz
