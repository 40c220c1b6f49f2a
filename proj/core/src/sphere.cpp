#include <cmath>

#include "rarc/manifold.hpp"

namespace rarc {

namespace {

// sin(r)/r and (r cos r - sin r)/r^2 with series near zero.
double sinc(double r) {
  if (r < 1e-4) return 1.0 - r * r / 6.0;
  return std::sin(r) / r;
}

double dsinc(double r) {
  if (r < 1e-4) return -r / 3.0;
  return (r * std::cos(r) - std::sin(r)) / (r * r);
}

}  // namespace

Sphere::Sphere(Eigen::Index n, RetractionKind kind) : n_(n), kind_(kind) {
  if (n < 2) throw ArgumentError("Sphere: need n >= 2");
}

std::string Sphere::name() const {
  return "Sphere(" + std::to_string(n_) + ")" +
         (kind_ == RetractionKind::Exponential ? "[exp]" : "");
}

Tangent Sphere::proj(const Point &x, const Matrix &z) const {
  require_shape(z, "ambient array");
  return z - x * (x.col(0).dot(z.col(0)));
}

Point Sphere::retract(const Point &x, const Tangent &s) const {
  require_shape(s, "tangent vector");
  if (kind_ == RetractionKind::Exponential) {
    const double r = s.norm();
    return std::cos(r) * x + sinc(r) * s;
  }
  const Point y = x + s;
  return y / y.norm();
}

Tangent Sphere::dretract(const Point &x, const Tangent &s,
                         const Tangent &z) const {
  if (kind_ == RetractionKind::Exponential) {
    const double r = s.norm();
    if (r == 0.0) return z;
    const Vector shat = s.col(0) / r;
    const double along = shat.dot(z.col(0));
    return sinc(r) * z +
           along * (-std::sin(r) * x + r * dsinc(r) * Matrix(shat));
  }
  const Point v = x + s;
  const double nv = v.norm();
  const Point y = v / nv;
  return (z - y * y.col(0).dot(z.col(0))) / nv;
}

Tangent Sphere::dretract_adjoint(const Point &x, const Tangent &s,
                                 const Tangent &w) const {
  if (kind_ == RetractionKind::Exponential) {
    const double r = s.norm();
    if (r == 0.0) return proj(x, w);
    const Vector shat = s.col(0) / r;
    const Vector a = -std::sin(r) * x.col(0) + r * dsinc(r) * shat;
    return proj(x, sinc(r) * w + a.dot(w.col(0)) * Matrix(shat));
  }
  const Point v = x + s;
  const double nv = v.norm();
  const Point y = v / nv;
  return proj(x, (w - y * y.col(0).dot(w.col(0))) / nv);
}

Tangent Sphere::ehess2rhess(const Point &x, const Matrix &egrad,
                            const Matrix &ehess, const Tangent &s) const {
  return proj(x, ehess) - x.col(0).dot(egrad.col(0)) * s;
}

Point Sphere::rand_point(Rng &rng) const {
  for (;;) {
    Point x = randn(n_, 1, rng);
    const double nx = x.norm();
    if (nx > 1e-8) return x / nx;
  }
}

bool Sphere::check_point(const Point &x, double tol) const {
  if (x.rows() != n_ || x.cols() != 1 || !x.allFinite()) return false;
  return std::abs(x.norm() - 1.0) <= tol;
}

Point Sphere::normalize(const Point &x) const { return x / x.norm(); }

// ------------------------------------------------------------------ Oblique

Oblique::Oblique(Eigen::Index n, Eigen::Index p) : n_(n), p_(p) {
  if (n < 1 || p < 2) throw ArgumentError("Oblique: need n >= 1, p >= 2");
}

std::string Oblique::name() const {
  return "Oblique(" + std::to_string(n_) + "," + std::to_string(p_) + ")";
}

Tangent Oblique::proj(const Point &x, const Matrix &z) const {
  require_shape(z, "ambient array");
  const Vector d = (x.array() * z.array()).rowwise().sum();
  return z - d.asDiagonal() * x;
}

Point Oblique::retract(const Point &x, const Tangent &s) const {
  require_shape(s, "tangent vector");
  return normalize(x + s);
}

Tangent Oblique::dretract(const Point &x, const Tangent &s,
                          const Tangent &z) const {
  const Point v = x + s;
  const Vector nv = v.rowwise().norm();
  const Point y = nv.cwiseInverse().asDiagonal() * v;
  const Vector d = (y.array() * z.array()).rowwise().sum();
  return nv.cwiseInverse().asDiagonal() * (z - d.asDiagonal() * y);
}

Tangent Oblique::dretract_adjoint(const Point &x, const Tangent &s,
                                  const Tangent &w) const {
  const Point v = x + s;
  const Vector nv = v.rowwise().norm();
  const Point y = nv.cwiseInverse().asDiagonal() * v;
  const Vector d = (y.array() * w.array()).rowwise().sum();
  return proj(x, nv.cwiseInverse().asDiagonal() * (w - d.asDiagonal() * y));
}

Tangent Oblique::ehess2rhess(const Point &x, const Matrix &egrad,
                             const Matrix &ehess, const Tangent &s) const {
  const Vector d = (x.array() * egrad.array()).rowwise().sum();
  return proj(x, ehess) - d.asDiagonal() * s;
}

Point Oblique::rand_point(Rng &rng) const {
  return normalize(randn(n_, p_, rng));
}

bool Oblique::check_point(const Point &x, double tol) const {
  if (x.rows() != n_ || x.cols() != p_ || !x.allFinite()) return false;
  return (x.rowwise().norm().array() - 1.0).abs().maxCoeff() <= tol;
}

Point Oblique::normalize(const Point &x) const {
  return x.rowwise().norm().cwiseInverse().asDiagonal() * x;
}

}  // namespace rarc
