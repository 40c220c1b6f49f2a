#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "rarc/manifold.hpp"
#include "rarc/model.hpp"
#include "rarc/problem.hpp"

namespace testing {

using namespace rarc;

inline Tangent unvec(const Vector &v, Shape shape) {
  return Eigen::Map<const Matrix>(v.data(), shape.rows, shape.cols);
}

inline Vector vec(const Matrix &m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

/// Orthonormal basis of T_x computed from scratch: project every ambient unit
/// vector, then orthonormalize with a rank-revealing QR.
inline Matrix own_tangent_basis(const Manifold &m, const Point &x) {
  const Shape shape = m.shape();
  const Eigen::Index amb = shape.rows * shape.cols;
  Matrix cols(amb, amb);
  for (Eigen::Index i = 0; i < amb; ++i) {
    Vector e = Vector::Unit(amb, i);
    cols.col(i) = vec(m.proj(x, unvec(e, shape)));
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(cols);
  qr.setThreshold(1e-9);
  const Eigen::Index r = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(amb, r);
  return q;
}

/// Singular values of D R_x(s) from central differences of the retraction
/// itself (no use of dretract).
inline Vector fd_dr_singular_values(const Manifold &m, const Point &x,
                                    const Tangent &s, double h = 1e-6) {
  const Matrix b = own_tangent_basis(m, x);
  Matrix j(b.rows(), b.cols());
  for (Eigen::Index i = 0; i < b.cols(); ++i) {
    const Tangent z = unvec(b.col(i), m.shape());
    j.col(i) = vec(m.retract(x, s + h * z) - m.retract(x, s - h * z)) / (2 * h);
  }
  return Eigen::JacobiSVD<Matrix>(j).singularValues();
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double> &x,
                           const std::vector<double> &y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    den += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return num / den;
}

/// Random symmetric matrix of the given order.
inline Matrix rand_sym(Eigen::Index n, Rng &rng) {
  const Matrix g = randn(n, n, rng);
  return 0.5 * (g + g.transpose());
}

/// f(x) = 1/2 vec(x)^T A vec(x) + <b, x>, for any ambient shape.
inline Problem quadratic_problem(const Matrix &a, const Matrix &b) {
  Problem p;
  p.name = "quadratic";
  const Shape shape{b.rows(), b.cols()};
  p.cost = [a, b](const Point &x) {
    const Vector v = vec(x);
    return 0.5 * v.dot(a * v) + vec(b).dot(v);
  };
  p.egrad = [a, b, shape](const Point &x) {
    return Matrix(unvec(a * vec(x), shape) + b);
  };
  p.ehessvec = [a, shape](const Point &, const Tangent &s) {
    return Matrix(unvec(a * vec(s), shape));
  };
  return p;
}

/// A random quadratic problem on m. On Grassmann the cost is made invariant
/// under X -> XQ (A acts column-wise, no linear term) so it descends to the
/// quotient.
inline Problem random_quadratic(const Manifold &m, Rng &rng) {
  const Shape sh = m.shape();
  const Eigen::Index n = sh.rows * sh.cols;
  if (m.name().rfind("Grassmann", 0) == 0) {
    const Matrix a = rand_sym(sh.rows, rng);
    Matrix big = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < sh.cols; ++j) {
      big.block(j * sh.rows, j * sh.rows, sh.rows, sh.rows) = a;
    }
    return quadratic_problem(big, Matrix::Zero(sh.rows, sh.cols));
  }
  return quadratic_problem(rand_sym(n, rng), randn(sh.rows, sh.cols, rng));
}

/// Cubic model on R^n with a dense Hessian.
inline CubicModel dense_model(const Matrix &h, const Vector &g, double sigma,
                              double f0 = 0.0) {
  auto r = std::make_shared<Euclidean>(g.size());
  return CubicModel(r, Vector::Zero(g.size()), f0, g,
                    [h](const Tangent &v) { return Matrix(h * v); }, sigma);
}

/// Global minimizer of <g, s> + 1/2 s^T H s + sigma/3 |s|^3 by bisection on
/// the multiplier: |(H + l I)^{-1} g| = l / sigma with H + l I >= 0. Assumes
/// g is not orthogonal to the leftmost eigenspace (generic data).
inline Vector cubic_oracle(const Matrix &h, const Vector &g, double sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const Vector c = es.eigenvectors().transpose() * g;
  const Vector &ev = es.eigenvalues();
  auto y = [&](double l) {
    Vector out(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) out(i) = -c(i) / (ev(i) + l);
    return out;
  };
  double lo = std::max(0.0, -ev(0));
  double hi = lo + 1.0;
  while (y(hi).norm() > hi / sigma) hi *= 2;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (y(mid).norm() > mid / sigma) lo = mid; else hi = mid;
  }
  return es.eigenvectors() * y(hi);
}

inline double cubic_value(const Matrix &h, const Vector &g, double sigma,
                          const Vector &s, double f0 = 0.0) {
  return f0 + g.dot(s) + 0.5 * s.dot(h * s) +
         sigma / 3.0 * std::pow(s.norm(), 3);
}

/// Manifolds with small ambient dimension, one per implemented kind.
std::vector<ManifoldPtr> sample_manifolds();

}  // namespace testing
