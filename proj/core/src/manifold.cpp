#include <cmath>
#include <sstream>

#include "rarc/manifold.hpp"

namespace rarc {

namespace {

Matrix unvec(const Vector &v, Shape s) {
  return Eigen::Map<const Matrix>(v.data(), s.rows, s.cols);
}

Vector vec(const Matrix &m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

}  // namespace

void Manifold::require_shape(const Matrix &a, const char *what) const {
  const Shape s = shape();
  if (a.rows() != s.rows || a.cols() != s.cols) {
    std::ostringstream msg;
    msg << name() << ": " << what << " has shape (" << a.rows() << ", "
        << a.cols() << "), expected (" << s.rows << ", " << s.cols << ")";
    throw ArgumentError(msg.str());
  }
}

double Manifold::inner(const Point &x, const Tangent &u,
                       const Tangent &v) const {
  require_shape(x, "point");
  require_shape(u, "tangent vector");
  require_shape(v, "tangent vector");
  return frob(u, v);
}

double Manifold::norm(const Point &x, const Tangent &v) const {
  return std::sqrt(std::max(0.0, inner(x, v, v)));
}

Tangent Manifold::dretract(const Point &x, const Tangent &s,
                           const Tangent &z) const {
  const double znorm = z.norm();
  if (znorm == 0.0) return zero_tangent();
  const double h = 1e-6 * std::max(1.0, s.norm());
  const Tangent dir = z / znorm;
  const Matrix diff = (retract(x, s + h * dir) - retract(x, s - h * dir)) /
                      (2.0 * h) * znorm;
  return proj(retract(x, s), diff);
}

Tangent Manifold::dretract_adjoint(const Point &x, const Tangent &s,
                                   const Tangent &w) const {
  const Matrix basis = tangent_basis(x);
  const Shape sh = shape();
  Vector coeffs(basis.cols());
  for (Eigen::Index i = 0; i < basis.cols(); ++i) {
    coeffs(i) = frob(w, dretract(x, s, unvec(basis.col(i), sh)));
  }
  return unvec(basis * coeffs, sh);
}

Tangent Manifold::pullback_hess_correction(const Point &, const Matrix &,
                                           const Tangent &) const {
  return zero_tangent();
}

Tangent Manifold::ehess2pullback(const Point &x, const Matrix &egrad,
                                 const Matrix &ehess, const Tangent &s) const {
  Tangent out = ehess2rhess(x, egrad, ehess, s);
  if (retraction_kind() == RetractionKind::Canonical) {
    out += pullback_hess_correction(x, egrad, s);
  }
  return out;
}

Tangent Manifold::rand_tangent(const Point &x, Rng &rng) const {
  const Shape s = shape();
  for (;;) {
    Tangent v = proj(x, randn(s.rows, s.cols, rng));
    const double n = norm(x, v);
    if (n > 1e-8) return v / n;
  }
}

bool Manifold::check_tangent(const Point &x, const Tangent &v,
                             double tol) const {
  const Shape s = shape();
  if (v.rows() != s.rows || v.cols() != s.cols) return false;
  if (!v.allFinite()) return false;
  return (proj(x, v) - v).norm() <= tol * std::max(1.0, v.norm());
}

Matrix Manifold::tangent_basis(const Point &x) const {
  const Shape s = shape();
  const Eigen::Index n = s.rows * s.cols;
  if (n > 4000) {
    throw ArgumentError(name() +
                        ": tangent_basis: ambient dimension too large");
  }
  Matrix cols(n, n);
  Matrix e = Matrix::Zero(s.rows, s.cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    e.data()[i] = 1.0;
    cols.col(i) = vec(proj(x, e));
    e.data()[i] = 0.0;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(cols);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, dim());
  return q;
}

// ---------------------------------------------------------------- Euclidean

Euclidean::Euclidean(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw ArgumentError("Euclidean: empty shape");
}

std::string Euclidean::name() const {
  return "Euclidean(" + std::to_string(rows_) + "x" + std::to_string(cols_) +
         ")";
}

Tangent Euclidean::proj(const Point &, const Matrix &z) const {
  require_shape(z, "ambient array");
  return z;
}

Point Euclidean::retract(const Point &x, const Tangent &s) const {
  require_shape(s, "tangent vector");
  return x + s;
}

Tangent Euclidean::dretract(const Point &, const Tangent &,
                            const Tangent &z) const {
  return z;
}

Tangent Euclidean::dretract_adjoint(const Point &, const Tangent &,
                                    const Tangent &w) const {
  return w;
}

Tangent Euclidean::ehess2rhess(const Point &, const Matrix &,
                               const Matrix &ehess, const Tangent &) const {
  return ehess;
}

Point Euclidean::rand_point(Rng &rng) const {
  return randn(rows_, cols_, rng);
}

bool Euclidean::check_point(const Point &x, double) const {
  return x.rows() == rows_ && x.cols() == cols_ && x.allFinite();
}

Matrix Euclidean::tangent_basis(const Point &) const {
  return Matrix::Identity(rows_ * cols_, rows_ * cols_);
}

// ----------------------------------------------------------- AffineSubspace

AffineSubspace::AffineSubspace(Shape shape, Matrix constraints, Vector rhs)
    : shape_(shape), constraints_(std::move(constraints)),
      rhs_(std::move(rhs)) {
  const Eigen::Index n = shape_.rows * shape_.cols;
  if (constraints_.cols() != n || constraints_.rows() != rhs_.size()) {
    throw ArgumentError("AffineSubspace: constraint dimensions mismatch");
  }
  Eigen::JacobiSVD<Matrix> svd(constraints_,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector &sv = svd.singularValues();
  const double cutoff =
      1e-12 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  basis_ = svd.matrixV().rightCols(n - rank);
  Vector part = Vector::Zero(n);
  const Vector utb = svd.matrixU().transpose() * rhs_;
  for (Eigen::Index i = 0; i < rank; ++i) {
    part += svd.matrixV().col(i) * (utb(i) / sv(i));
  }
  if ((constraints_ * part - rhs_).norm() >
      1e-9 * std::max(1.0, rhs_.norm())) {
    throw ArgumentError("AffineSubspace: inconsistent constraints");
  }
  particular_ = unvec(part, shape_);
}

std::string AffineSubspace::name() const {
  return "AffineSubspace(" + std::to_string(shape_.rows) + "x" +
         std::to_string(shape_.cols) + ", dim " + std::to_string(dim()) + ")";
}

Tangent AffineSubspace::proj(const Point &, const Matrix &z) const {
  require_shape(z, "ambient array");
  const Vector v = vec(z);
  return unvec(basis_ * (basis_.transpose() * v), shape_);
}

Point AffineSubspace::retract(const Point &x, const Tangent &s) const {
  require_shape(s, "tangent vector");
  return x + s;
}

Tangent AffineSubspace::dretract(const Point &, const Tangent &,
                                 const Tangent &z) const {
  return z;
}

Tangent AffineSubspace::dretract_adjoint(const Point &x, const Tangent &,
                                         const Tangent &w) const {
  return proj(x, w);
}

Tangent AffineSubspace::ehess2rhess(const Point &x, const Matrix &,
                                    const Matrix &ehess,
                                    const Tangent &) const {
  return proj(x, ehess);
}

Point AffineSubspace::rand_point(Rng &rng) const {
  const Vector coeffs = randn(dim(), 1, rng);
  return particular_ + unvec(basis_ * coeffs, shape_);
}

bool AffineSubspace::check_point(const Point &x, double tol) const {
  if (x.rows() != shape_.rows || x.cols() != shape_.cols) return false;
  if (!x.allFinite()) return false;
  return (constraints_ * vec(x) - rhs_).norm() <=
         tol * std::max(1.0, rhs_.norm());
}

Point AffineSubspace::normalize(const Point &x) const {
  return particular_ + proj(x, x - particular_);
}

}  // namespace rarc
