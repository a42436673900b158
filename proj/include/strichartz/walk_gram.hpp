#pragma once

// Random-walk configurations of Dirac atoms and the Gram matrix of the
// propagated atoms a_n = P* exp(-i n Delta) delta_{x_n}:
//
//     M[n, n'] = <a_{n'}, a_n> = K_{n-n'}(x_n - x_{n'}),
//
// so that c* M c = || sum_n c_n a_n ||^2 and (M c)_n = exp(i n Delta) P f(x_n)
// for f = sum_n c_n a_n.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "strichartz/error.hpp"
#include "strichartz/kernels.hpp"
#include "strichartz/lanczos.hpp"
#include "strichartz/parallel.hpp"
#include "strichartz/philox.hpp"
#include "strichartz/vec2.hpp"

namespace strichartz {

/// Points x_{-N}, ..., x_N of a planar Gaussian random walk with x_0 = 0.
struct WalkPath {
  int N = 0;
  double v = 0.0;  ///< per-coordinate increment variance
  std::uint64_t seed = 0;
  std::vector<Vec2> points;  ///< points[n + N] = x_n

  int size() const noexcept { return 2 * N + 1; }
  Vec2 at(int n) const { return points.at(static_cast<std::size_t>(n + N)); }
};

/// Increment x_{j+1} - x_j; a pure function of (seed, j).
inline Vec2 walk_increment(std::uint64_t seed, double v, std::int64_t j) {
  const rng::CounterRng gen(seed, rng::Stream::walk);
  return std::sqrt(v) * gen.normal2(j);
}

inline WalkPath sample_walk(int N, double v, std::uint64_t seed) {
  require(N >= 0, "walk size N must be nonnegative");
  require(v > 0.0 && std::isfinite(v), "walk variance v must be positive");
  WalkPath p{N, v, seed, std::vector<Vec2>(static_cast<std::size_t>(2 * N + 1))};
  p.points[N] = {0.0, 0.0};
  for (int n = 0; n < N; ++n) p.points[N + n + 1] = p.points[N + n] + walk_increment(seed, v, n);
  for (int n = -1; n >= -N; --n) p.points[N + n] = p.points[N + n + 1] - walk_increment(seed, v, n);
  return p;
}

/// A path through prescribed points, indexed from -N.
inline WalkPath prescribed_path(std::vector<Vec2> points) {
  require(points.size() % 2 == 1, "prescribed path needs an odd number of points");
  WalkPath p;
  p.N = static_cast<int>(points.size() / 2);
  p.points = std::move(points);
  return p;
}

struct GramMatrix {
  WalkPath path;
  double psi_integral = 0.0;
  Eigen::MatrixXcd M;

  int dim() const noexcept { return static_cast<int>(M.rows()); }
};

/// Fills M[n, n'] = K_{n-n'}(x_n - x_{n'}) for n >= n' and mirrors by
/// conjugation; the diagonal is int psi exactly.
inline GramMatrix assemble_gram(const WalkPath& path, const KernelEvaluator& ke) {
  const int dim = path.size();
  GramMatrix g{path, ke.psi_integral(), Eigen::MatrixXcd(dim, dim)};
  auto& M = g.M;

  // One Chebyshev view per lag, sized to the largest separation at that lag.
  std::vector<double> r_max(static_cast<std::size_t>(dim), 0.0);
  for (int m = 1; m < dim; ++m)
    for (int j = 0; j + m < dim; ++j)
      r_max[m] = std::max(r_max[m], norm(path.points[j + m] - path.points[j]));
  std::vector<std::optional<RadialKernelTable>> tables(static_cast<std::size_t>(dim));
  parallel_for(1, dim, [&](std::ptrdiff_t m) { tables[m].emplace(ke.radial_table(static_cast<int>(m), r_max[m])); });

  parallel_for(0, dim, [&](std::ptrdiff_t jj) {
    const int j = static_cast<int>(jj);
    M(j, j) = ke.psi_integral();
    for (int i = j + 1; i < dim; ++i) {
      M(i, j) = (*tables[i - j])(norm(path.points[i] - path.points[j]));
    }
  });
  for (int j = 0; j < dim; ++j)
    for (int i = j + 1; i < dim; ++i) M(j, i) = std::conj(M(i, j));
  return g;
}

/// c* M c, conjugate-linear in the left argument.
inline cplx quadratic_form(const GramMatrix& g, const Eigen::VectorXcd& c) {
  if (c.size() != g.dim())
    throw DimensionMismatch("quadratic_form: vector length " + std::to_string(c.size()) +
                            " != dim " + std::to_string(g.dim()));
  return c.dot(g.M * c);
}

/// y = M x, rows split across threads.
inline void gram_apply(const Eigen::MatrixXcd& M, const Eigen::Ref<const Eigen::VectorXcd>& x,
                       Eigen::VectorXcd& y) {
  const Eigen::Index n = M.rows();
  y.resize(n);
  const int threads = thread_count();
  if (threads <= 1 || n < 512) {
    y.noalias() = M * x;
    return;
  }
  const Eigen::Index block = (n + threads - 1) / threads;
  parallel_for(0, threads, [&](std::ptrdiff_t t) {
    const Eigen::Index r0 = t * block;
    const Eigen::Index len = std::min(block, n - r0);
    if (len > 0) y.segment(r0, len).noalias() = M.middleRows(r0, len) * x;
  });
}

inline EigenPair lambda_max(const GramMatrix& g, LanczosOptions opt = {}) {
  return lanczos_largest(
      g.dim(), [&g](const auto& x, Eigen::VectorXcd& y) { gram_apply(g.M, x, y); },
      Eigen::VectorXcd::Ones(g.dim()), opt);
}

/// Schur bound max_n sum_{n'} |M[n, n']|.
inline double max_row_abs_sum(const GramMatrix& g) {
  double best = 0.0;
  for (int i = 0; i < g.dim(); ++i) best = std::max(best, g.M.row(i).cwiseAbs().sum());
  return best;
}

/// Neumaier-compensated running sum; fixed order, deterministic.
class CompensatedSum {
public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Re E[1* M 1] over walk paths, exactly in the path distribution:
///   (2N+1) int psi + 2 sum_{m=1}^{2N} (2N+1-m) Re E[K_m].
inline double expected_quadratic_form(int N, double v, const KernelEvaluator& ke) {
  require(N >= 0, "N must be nonnegative");
  require(v > 0.0, "v must be positive");
  const int dim = 2 * N + 1;
  std::vector<double> terms(static_cast<std::size_t>(dim), 0.0);
  parallel_for(1, dim, [&](std::ptrdiff_t m) {
    terms[m] = 2.0 * (dim - m) * ke.expected(static_cast<int>(m), v).real();
  });
  CompensatedSum s;
  s.add(dim * ke.psi_integral());
  for (int m = 1; m < dim; ++m) s.add(terms[m]);
  return s.value();
}

// ---------------------------------------------------------------------------
// Serialization.

inline nlohmann::json to_json(const WalkPath& p) {
  nlohmann::json pts = nlohmann::json::array();
  for (Vec2 x : p.points) pts.push_back({x.x, x.y});
  return {{"N", p.N}, {"v", p.v}, {"seed", p.seed}, {"points", std::move(pts)}};
}

inline nlohmann::json gram_summary(const GramMatrix& g) {
  double herm = 0.0;
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j) herm = std::max(herm, std::abs(g.M(i, j) - std::conj(g.M(j, i))));
  return {{"dim", g.dim()},
          {"N", g.path.N},
          {"seed", g.path.seed},
          {"v", g.path.v},
          {"psi_integral", g.psi_integral},
          {"trace", g.M.trace().real()},
          {"ones_form", g.M.sum().real()},
          {"max_row_abs_sum", max_row_abs_sum(g)},
          {"hermitian_defect", herm}};
}

/// Writes the matrix as row-major little-endian complex128 to `bin_path`
/// with a JSON sidecar at `bin_path` + ".json".
inline void write_gram_binary(const GramMatrix& g, const std::filesystem::path& bin_path) {
  static_assert(std::endian::native == std::endian::little, "binary dump assumes a little-endian host");
  std::ofstream out(bin_path, std::ios::binary);
  if (!out) throw Error("cannot open " + bin_path.string());
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j) {
      const double parts[2] = {g.M(i, j).real(), g.M(i, j).imag()};
      out.write(reinterpret_cast<const char*>(parts), sizeof parts);
    }
  nlohmann::json side = {{"rows", g.dim()},
                         {"cols", g.dim()},
                         {"dtype", "complex128"},
                         {"order", "row-major"},
                         {"endianness", "little"},
                         {"summary", gram_summary(g)}};
  std::ofstream(bin_path.string() + ".json") << side.dump(2) << '\n';
}

inline Eigen::MatrixXcd read_gram_binary(const std::filesystem::path& bin_path) {
  std::ifstream side_in(bin_path.string() + ".json");
  if (!side_in) throw Error("missing sidecar for " + bin_path.string());
  const auto side = nlohmann::json::parse(side_in);
  const int rows = side.at("rows"), cols = side.at("cols");
  Eigen::MatrixXcd M(rows, cols);
  std::ifstream in(bin_path, std::ios::binary);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      double parts[2];
      in.read(reinterpret_cast<char*>(parts), sizeof parts);
      M(i, j) = {parts[0], parts[1]};
    }
  if (!in) throw Error("truncated gram dump " + bin_path.string());
  return M;
}

}  // namespace strichartz
