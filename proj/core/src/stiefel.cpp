#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "rarc/manifold.hpp"

namespace rarc {

namespace {

// rho_skew(M) = tril(M) - tril(M)^T; the diagonal cancels.
Matrix rho_skew(const Matrix &m) {
  const Matrix l = strict_lower(m);
  return l - l.transpose();
}

// Z R^{-1} for upper-triangular R.
Matrix right_solve(const Matrix &r, const Matrix &z) {
  return r.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(z);
}

// Z R^{-T} for upper-triangular R.
Matrix right_solve_transpose(const Matrix &r, const Matrix &z) {
  return r.transpose().triangularView<Eigen::Lower>().solve<Eigen::OnTheRight>(
      z);
}

// Differential of the Q-factor retraction, Q rho_skew(Q^T Z R^-1) +
// (I - Q Q^T) Z R^-1.
Matrix qf_differential(const ThinQr &f, const Matrix &z) {
  const Matrix zr = right_solve(f.r, z);
  const Matrix qtzr = f.q.transpose() * zr;
  return f.q * rho_skew(qtzr) + (zr - f.q * qtzr);
}

// Adjoint (in the ambient Frobenius sense) of qf_differential.
Matrix qf_differential_adjoint(const ThinQr &f, const Matrix &w) {
  const Matrix a = f.q.transpose() * w;
  const Matrix inner = f.q * strict_lower(a - a.transpose()) + (w - f.q * a);
  return right_solve_transpose(f.r, inner);
}

// W_0[S] for the Q-factor retraction on St(n, p): the tangential part of the
// retraction curve's acceleration is X (L - L^T) with L the strict lower
// triangle of S^T S, which by polarization gives S -> P_X(S sym(B)) with
// B = strictly_lower(X^T G - G^T X).
Matrix qf_pullback_correction(const Matrix &x, const Matrix &egrad,
                              const Matrix &s) {
  const Matrix a = x.transpose() * egrad;
  const Matrix b = strict_lower(a - a.transpose());
  return s * sym(b);
}

}  // namespace

// ------------------------------------------------------------------ Stiefel

Stiefel::Stiefel(Eigen::Index n, Eigen::Index p) : n_(n), p_(p) {
  if (p < 1 || n < p) throw ArgumentError("Stiefel: need 1 <= p <= n");
}

std::string Stiefel::name() const {
  return "Stiefel(" + std::to_string(n_) + "," + std::to_string(p_) + ")";
}

Tangent Stiefel::proj(const Point &x, const Matrix &z) const {
  require_shape(z, "ambient array");
  return z - x * sym(x.transpose() * z);
}

Point Stiefel::retract(const Point &x, const Tangent &s) const {
  require_shape(s, "tangent vector");
  return qr_positive(x + s).q;
}

Tangent Stiefel::dretract(const Point &x, const Tangent &s,
                          const Tangent &z) const {
  return qf_differential(qr_positive(x + s), z);
}

Tangent Stiefel::dretract_adjoint(const Point &x, const Tangent &s,
                                  const Tangent &w) const {
  return proj(x, qf_differential_adjoint(qr_positive(x + s), w));
}

Tangent Stiefel::ehess2rhess(const Point &x, const Matrix &egrad,
                             const Matrix &ehess, const Tangent &s) const {
  return proj(x, ehess - s * sym(x.transpose() * egrad));
}

Tangent Stiefel::pullback_hess_correction(const Point &x, const Matrix &egrad,
                                          const Tangent &s) const {
  return proj(x, qf_pullback_correction(x, egrad, s));
}

Point Stiefel::rand_point(Rng &rng) const {
  return qr_positive(randn(n_, p_, rng)).q;
}

bool Stiefel::check_point(const Point &x, double tol) const {
  if (x.rows() != n_ || x.cols() != p_ || !x.allFinite()) return false;
  return (x.transpose() * x - Matrix::Identity(p_, p_)).norm() <= tol;
}

bool Stiefel::check_tangent(const Point &x, const Tangent &v,
                            double tol) const {
  if (v.rows() != n_ || v.cols() != p_ || !v.allFinite()) return false;
  const Matrix xtv = x.transpose() * v;
  return (xtv + xtv.transpose()).norm() <= tol * std::max(1.0, v.norm());
}

Point Stiefel::normalize(const Point &x) const { return qr_positive(x).q; }

// ---------------------------------------------------------------- Grassmann

Grassmann::Grassmann(Eigen::Index n, Eigen::Index p) : n_(n), p_(p) {
  if (p < 1 || n <= p) throw ArgumentError("Grassmann: need 1 <= p < n");
}

std::string Grassmann::name() const {
  return "Grassmann(" + std::to_string(n_) + "," + std::to_string(p_) + ")";
}

Tangent Grassmann::proj(const Point &x, const Matrix &z) const {
  require_shape(z, "ambient array");
  return z - x * (x.transpose() * z);
}

Point Grassmann::retract(const Point &x, const Tangent &s) const {
  require_shape(s, "tangent vector");
  return qr_positive(x + s).q;
}

Tangent Grassmann::dretract(const Point &x, const Tangent &s,
                            const Tangent &z) const {
  const ThinQr f = qr_positive(x + s);
  const Matrix zr = right_solve(f.r, z);
  return zr - f.q * (f.q.transpose() * zr);
}

Tangent Grassmann::dretract_adjoint(const Point &x, const Tangent &s,
                                    const Tangent &w) const {
  const ThinQr f = qr_positive(x + s);
  const Matrix hw = w - f.q * (f.q.transpose() * w);
  return proj(x, right_solve_transpose(f.r, hw));
}

Tangent Grassmann::ehess2rhess(const Point &x, const Matrix &egrad,
                               const Matrix &ehess, const Tangent &s) const {
  return proj(x, ehess) - s * (x.transpose() * egrad);
}

Point Grassmann::rand_point(Rng &rng) const {
  return qr_positive(randn(n_, p_, rng)).q;
}

bool Grassmann::check_point(const Point &x, double tol) const {
  if (x.rows() != n_ || x.cols() != p_ || !x.allFinite()) return false;
  return (x.transpose() * x - Matrix::Identity(p_, p_)).norm() <= tol;
}

bool Grassmann::check_tangent(const Point &x, const Tangent &v,
                              double tol) const {
  if (v.rows() != n_ || v.cols() != p_ || !v.allFinite()) return false;
  return (x.transpose() * v).norm() <= tol * std::max(1.0, v.norm());
}

Point Grassmann::normalize(const Point &x) const { return qr_positive(x).q; }

// -------------------------------------------------------- SpecialOrthogonal

SpecialOrthogonal::SpecialOrthogonal(Eigen::Index d, RetractionKind kind)
    : d_(d), kind_(kind) {
  if (d < 2) throw ArgumentError("SpecialOrthogonal: need d >= 2");
}

std::string SpecialOrthogonal::name() const {
  return "SO(" + std::to_string(d_) + ")" +
         (kind_ == RetractionKind::Exponential ? "[exp]" : "");
}

DRetractKind SpecialOrthogonal::dretract_kind() const {
  return kind_ == RetractionKind::Canonical ? DRetractKind::ClosedForm
                                            : DRetractKind::FiniteDifference;
}

Tangent SpecialOrthogonal::proj(const Point &x, const Matrix &z) const {
  require_shape(z, "ambient array");
  return x * skew(x.transpose() * z);
}

Point SpecialOrthogonal::retract(const Point &x, const Tangent &s) const {
  require_shape(s, "tangent vector");
  if (kind_ == RetractionKind::Exponential) {
    const Matrix omega = skew(x.transpose() * s);
    return x * omega.exp();
  }
  // det(I + Omega) > 0 for skew Omega and R has a positive diagonal, so the
  // Q factor stays in SO(d).
  return qr_positive(x + s).q;
}

Tangent SpecialOrthogonal::dretract(const Point &x, const Tangent &s,
                                    const Tangent &z) const {
  if (kind_ == RetractionKind::Exponential) return Manifold::dretract(x, s, z);
  return qf_differential(qr_positive(x + s), z);
}

Tangent SpecialOrthogonal::dretract_adjoint(const Point &x, const Tangent &s,
                                            const Tangent &w) const {
  if (kind_ == RetractionKind::Exponential) {
    return Manifold::dretract_adjoint(x, s, w);
  }
  return proj(x, qf_differential_adjoint(qr_positive(x + s), w));
}

Tangent SpecialOrthogonal::ehess2rhess(const Point &x, const Matrix &egrad,
                                       const Matrix &ehess,
                                       const Tangent &s) const {
  return proj(x, ehess - s * sym(x.transpose() * egrad));
}

Tangent SpecialOrthogonal::pullback_hess_correction(const Point &x,
                                                    const Matrix &egrad,
                                                    const Tangent &s) const {
  return proj(x, qf_pullback_correction(x, egrad, s));
}

Point SpecialOrthogonal::rand_point(Rng &rng) const {
  Matrix q = qr_positive(randn(d_, d_, rng)).q;
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

bool SpecialOrthogonal::check_point(const Point &x, double tol) const {
  if (x.rows() != d_ || x.cols() != d_ || !x.allFinite()) return false;
  return (x.transpose() * x - Matrix::Identity(d_, d_)).norm() <= tol &&
         x.determinant() > 0;
}

Point SpecialOrthogonal::normalize(const Point &x) const {
  return qr_positive(x).q;
}

}  // namespace rarc
