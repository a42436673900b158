#pragma once

// Largest eigenpair of a Hermitian operator by explicitly restarted Lanczos
// with full reorthogonalization.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "strichartz/error.hpp"

namespace strichartz {

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXcd vector;
  double residual = 0.0;  ///< ||A v - value v||
  int matvecs = 0;
};

struct LanczosOptions {
  int krylov_dim = 80;
  int max_restarts = 200;
  double rel_residual = 1e-10;  ///< stop when ||A v - lambda v|| <= rel_residual * |lambda|
};

/// Scales v so that its largest-magnitude entry is real and positive.
inline void normalize_phase(Eigen::VectorXcd& v) {
  if (v.size() == 0) return;
  Eigen::Index best = 0;
  double mag = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > mag) { mag = std::abs(v[i]); best = i; }
  if (mag > 0.0) v *= std::conj(v[best]) / mag;
}

/// `apply(x, y)` must set y = A x for a Hermitian A of dimension n.
template <class Apply>
EigenPair lanczos_largest(Eigen::Index n, Apply&& apply, const Eigen::VectorXcd& start,
                          LanczosOptions opt = {}) {
  if (n <= 0) throw InvalidParameter("lanczos: empty operator");
  EigenPair out;
  Eigen::VectorXcd v = start;
  if (v.size() != n || v.norm() == 0.0) v = Eigen::VectorXcd::Ones(n);
  v.normalize();

  const int k_max = static_cast<int>(std::min<Eigen::Index>(n, opt.krylov_dim));
  Eigen::MatrixXcd V(n, k_max);
  Eigen::VectorXcd w(n);
  double best_value = 0.0;

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    std::vector<double> alpha, beta;
    V.col(0) = v;
    int k = 0;
    for (; k < k_max; ++k) {
      apply(V.col(k), w);
      ++out.matvecs;
      const double a = V.col(k).dot(w).real();
      alpha.push_back(a);
      // Full reorthogonalization, applied twice.
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXcd coef = V.leftCols(k + 1).adjoint() * w;
        w.noalias() -= V.leftCols(k + 1) * coef;
      }
      const double b = w.norm();
      if (k + 1 == k_max) {
        beta.push_back(b);
        ++k;
        break;
      }
      if (b <= 1e-14 * std::max(1.0, std::abs(a))) {
        beta.push_back(0.0);
        ++k;
        break;
      }
      beta.push_back(b);
      V.col(k + 1) = w / b;
    }

    Eigen::VectorXd diag(k), sub(std::max(0, k - 1));
    for (int i = 0; i < k; ++i) diag[i] = alpha[i];
    for (int i = 0; i + 1 < k; ++i) sub[i] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const double theta = tri.eigenvalues()[k - 1];
    const Eigen::VectorXd s = tri.eigenvectors().col(k - 1);

    v = V.leftCols(k) * s.cast<std::complex<double>>();
    v.normalize();
    best_value = theta;

    // Accept on the true residual, not the recurrence estimate.
    apply(v, w);
    ++out.matvecs;
    const double rq = v.dot(w).real();
    const double true_residual = (w - rq * v).norm();
    best_value = rq;
    if (true_residual <= opt.rel_residual * std::abs(rq) || k < k_max || true_residual == 0.0) {
      out.value = rq;
      out.residual = true_residual;
      normalize_phase(v);
      out.vector = std::move(v);
      return out;
    }
  }
  throw ConvergenceError("lanczos did not converge within the restart cap", best_value);
}

/// Dense convenience overload.
inline EigenPair lanczos_largest(const Eigen::MatrixXcd& A, LanczosOptions opt = {}) {
  return lanczos_largest(
      A.rows(), [&A](const auto& x, Eigen::VectorXcd& y) { y.noalias() = A * x; },
      Eigen::VectorXcd::Ones(A.rows()), opt);
}

}  // namespace strichartz
