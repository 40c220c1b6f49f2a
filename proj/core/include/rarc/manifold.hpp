#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rarc/common.hpp"

namespace rarc {

enum class RetractionKind { Canonical, Exponential };

/// How a manifold evaluates the differential of its retraction.
enum class DRetractKind { ClosedForm, FiniteDifference };

/// A Riemannian manifold represented in ambient coordinates.
///
/// Every implemented manifold is either a Riemannian submanifold of a
/// Euclidean space or a quotient represented by horizontal lifts, so the
/// metric is always the ambient Frobenius inner product restricted to the
/// tangent space. Manifolds are immutable after construction and every member
/// function is a pure function of its arguments.
class Manifold {
 public:
  virtual ~Manifold() = default;

  virtual std::string name() const = 0;
  /// Intrinsic dimension.
  virtual Eigen::Index dim() const = 0;
  virtual Shape shape() const = 0;
  virtual RetractionKind retraction_kind() const {
    return RetractionKind::Canonical;
  }

  double inner(const Point &x, const Tangent &u, const Tangent &v) const;
  double norm(const Point &x, const Tangent &v) const;

  /// Orthogonal projection of an ambient array onto the tangent space at x.
  virtual Tangent proj(const Point &x, const Matrix &z) const = 0;

  virtual Point retract(const Point &x, const Tangent &s) const = 0;

  /// D R_x(s)[z], a tangent vector at retract(x, s).
  ///
  /// The base implementation uses central differences with step
  /// 1e-6 * max(1, |s|) followed by a tangent projection; manifolds with a
  /// closed form override it together with dretract_kind().
  virtual Tangent dretract(const Point &x, const Tangent &s,
                           const Tangent &z) const;
  virtual DRetractKind dretract_kind() const {
    return DRetractKind::FiniteDifference;
  }

  /// Adjoint of D R_x(s): maps w tangent at retract(x, s) back to T_x.
  /// The base implementation assembles it column by column in an
  /// orthonormal basis of T_x.
  virtual Tangent dretract_adjoint(const Point &x, const Tangent &s,
                                   const Tangent &w) const;

  virtual Tangent egrad2rgrad(const Point &x, const Matrix &egrad) const {
    return proj(x, egrad);
  }

  /// Riemannian Hessian applied to s, from the Euclidean gradient and the
  /// Euclidean Hessian applied to s.
  virtual Tangent ehess2rhess(const Point &x, const Matrix &egrad,
                              const Matrix &ehess, const Tangent &s) const = 0;

  /// W_0[s]: the difference between the Hessian of the pullback f o R_x at
  /// the origin and the Riemannian Hessian. Zero for second-order
  /// retractions, and always zero at critical points.
  virtual Tangent pullback_hess_correction(const Point &x,
                                           const Matrix &egrad,
                                           const Tangent &s) const;

  /// Hessian of the pullback at the origin applied to s.
  Tangent ehess2pullback(const Point &x, const Matrix &egrad,
                         const Matrix &ehess, const Tangent &s) const;

  virtual Point rand_point(Rng &rng) const = 0;
  /// Unit-norm random tangent vector at x.
  virtual Tangent rand_tangent(const Point &x, Rng &rng) const;

  virtual bool check_point(const Point &x, double tol = 1e-10) const = 0;
  virtual bool check_tangent(const Point &x, const Tangent &v,
                             double tol = 1e-10) const;

  /// Pulls a nearly-feasible point back onto the manifold. Solvers call it
  /// after every accepted retraction to stop round-off drift.
  virtual Point normalize(const Point &x) const { return x; }

  /// Orthonormal basis of T_x as the columns of a (rows*cols) x dim matrix
  /// (column-major vectorization of tangent vectors).
  virtual Matrix tangent_basis(const Point &x) const;

  Tangent zero_tangent() const {
    const Shape s = shape();
    return Tangent::Zero(s.rows, s.cols);
  }

 protected:
  void require_shape(const Matrix &a, const char *what) const;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

/// R^{rows x cols} with x + s.
class Euclidean final : public Manifold {
 public:
  Euclidean(Eigen::Index rows, Eigen::Index cols = 1);
  std::string name() const override;
  Eigen::Index dim() const override { return rows_ * cols_; }
  Shape shape() const override { return {rows_, cols_}; }
  Tangent proj(const Point &x, const Matrix &z) const override;
  Point retract(const Point &x, const Tangent &s) const override;
  Tangent dretract(const Point &x, const Tangent &s,
                   const Tangent &z) const override;
  DRetractKind dretract_kind() const override {
    return DRetractKind::ClosedForm;
  }
  Tangent dretract_adjoint(const Point &x, const Tangent &s,
                           const Tangent &w) const override;
  Tangent ehess2rhess(const Point &x, const Matrix &egrad, const Matrix &ehess,
                      const Tangent &s) const override;
  Point rand_point(Rng &rng) const override;
  bool check_point(const Point &x, double tol = 1e-10) const override;
  Matrix tangent_basis(const Point &x) const override;

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
};

/// Unit sphere in R^n, points are n x 1.
class Sphere final : public Manifold {
 public:
  explicit Sphere(Eigen::Index n,
                  RetractionKind kind = RetractionKind::Canonical);
  std::string name() const override;
  Eigen::Index dim() const override { return n_ - 1; }
  Shape shape() const override { return {n_, 1}; }
  RetractionKind retraction_kind() const override { return kind_; }
  Tangent proj(const Point &x, const Matrix &z) const override;
  Point retract(const Point &x, const Tangent &s) const override;
  Tangent dretract(const Point &x, const Tangent &s,
                   const Tangent &z) const override;
  DRetractKind dretract_kind() const override {
    return DRetractKind::ClosedForm;
  }
  Tangent dretract_adjoint(const Point &x, const Tangent &s,
                           const Tangent &w) const override;
  Tangent ehess2rhess(const Point &x, const Matrix &egrad, const Matrix &ehess,
                      const Tangent &s) const override;
  Point rand_point(Rng &rng) const override;
  bool check_point(const Point &x, double tol = 1e-10) const override;
  Point normalize(const Point &x) const override;

 private:
  Eigen::Index n_;
  RetractionKind kind_;
};

/// Stiefel manifold St(n, p) of n x p matrices with orthonormal columns,
/// with the Q-factor retraction.
class Stiefel final : public Manifold {
 public:
  Stiefel(Eigen::Index n, Eigen::Index p);
  std::string name() const override;
  Eigen::Index dim() const override { return n_ * p_ - p_ * (p_ + 1) / 2; }
  Shape shape() const override { return {n_, p_}; }
  Tangent proj(const Point &x, const Matrix &z) const override;
  Point retract(const Point &x, const Tangent &s) const override;
  Tangent dretract(const Point &x, const Tangent &s,
                   const Tangent &z) const override;
  DRetractKind dretract_kind() const override {
    return DRetractKind::ClosedForm;
  }
  Tangent dretract_adjoint(const Point &x, const Tangent &s,
                           const Tangent &w) const override;
  Tangent ehess2rhess(const Point &x, const Matrix &egrad, const Matrix &ehess,
                      const Tangent &s) const override;
  Tangent pullback_hess_correction(const Point &x, const Matrix &egrad,
                                   const Tangent &s) const override;
  Point rand_point(Rng &rng) const override;
  bool check_point(const Point &x, double tol = 1e-10) const override;
  bool check_tangent(const Point &x, const Tangent &v,
                     double tol = 1e-10) const override;
  Point normalize(const Point &x) const override;

 private:
  Eigen::Index n_;
  Eigen::Index p_;
};

/// Grassmann manifold Gr(n, p), represented by n x p orthonormal matrices
/// with horizontal tangent vectors (X^T V = 0) and the Q-factor retraction.
class Grassmann final : public Manifold {
 public:
  Grassmann(Eigen::Index n, Eigen::Index p);
  std::string name() const override;
  Eigen::Index dim() const override { return p_ * (n_ - p_); }
  Shape shape() const override { return {n_, p_}; }
  Tangent proj(const Point &x, const Matrix &z) const override;
  Point retract(const Point &x, const Tangent &s) const override;
  Tangent dretract(const Point &x, const Tangent &s,
                   const Tangent &z) const override;
  DRetractKind dretract_kind() const override {
    return DRetractKind::ClosedForm;
  }
  Tangent dretract_adjoint(const Point &x, const Tangent &s,
                           const Tangent &w) const override;
  Tangent ehess2rhess(const Point &x, const Matrix &egrad, const Matrix &ehess,
                      const Tangent &s) const override;
  Point rand_point(Rng &rng) const override;
  bool check_point(const Point &x, double tol = 1e-10) const override;
  bool check_tangent(const Point &x, const Tangent &v,
                     double tol = 1e-10) const override;
  Point normalize(const Point &x) const override;

 private:
  Eigen::Index n_;
  Eigen::Index p_;
};

/// Oblique manifold OB(n, p): n x p matrices with unit-norm rows.
class Oblique final : public Manifold {
 public:
  Oblique(Eigen::Index n, Eigen::Index p);
  std::string name() const override;
  Eigen::Index dim() const override { return n_ * (p_ - 1); }
  Shape shape() const override { return {n_, p_}; }
  Tangent proj(const Point &x, const Matrix &z) const override;
  Point retract(const Point &x, const Tangent &s) const override;
  Tangent dretract(const Point &x, const Tangent &s,
                   const Tangent &z) const override;
  DRetractKind dretract_kind() const override {
    return DRetractKind::ClosedForm;
  }
  Tangent dretract_adjoint(const Point &x, const Tangent &s,
                           const Tangent &w) const override;
  Tangent ehess2rhess(const Point &x, const Matrix &egrad, const Matrix &ehess,
                      const Tangent &s) const override;
  Point rand_point(Rng &rng) const override;
  bool check_point(const Point &x, double tol = 1e-10) const override;
  Point normalize(const Point &x) const override;

 private:
  Eigen::Index n_;
  Eigen::Index p_;
};

/// Rotation group SO(d) as a Riemannian submanifold of R^{d x d}.
/// Canonical retraction: Q-factor of Q + S (which keeps det = +1).
/// Exponential retraction: Q expm(Q^T S).
class SpecialOrthogonal final : public Manifold {
 public:
  explicit SpecialOrthogonal(Eigen::Index d,
                             RetractionKind kind = RetractionKind::Canonical);
  std::string name() const override;
  Eigen::Index dim() const override { return d_ * (d_ - 1) / 2; }
  Shape shape() const override { return {d_, d_}; }
  RetractionKind retraction_kind() const override { return kind_; }
  Tangent proj(const Point &x, const Matrix &z) const override;
  Point retract(const Point &x, const Tangent &s) const override;
  Tangent dretract(const Point &x, const Tangent &s,
                   const Tangent &z) const override;
  DRetractKind dretract_kind() const override;
  Tangent dretract_adjoint(const Point &x, const Tangent &s,
                           const Tangent &w) const override;
  Tangent ehess2rhess(const Point &x, const Matrix &egrad, const Matrix &ehess,
                      const Tangent &s) const override;
  Tangent pullback_hess_correction(const Point &x, const Matrix &egrad,
                                   const Tangent &s) const override;
  Point rand_point(Rng &rng) const override;
  bool check_point(const Point &x, double tol = 1e-10) const override;
  Point normalize(const Point &x) const override;

 private:
  Eigen::Index d_;
  RetractionKind kind_;
};

/// Affine subspace {Y : C vec(Y) = b} of R^{rows x cols}, with vec the
/// column-major vectorization. Flat, so x + s is the exponential map.
class AffineSubspace final : public Manifold {
 public:
  AffineSubspace(Shape shape, Matrix constraints, Vector rhs);
  std::string name() const override;
  Eigen::Index dim() const override { return basis_.cols(); }
  Shape shape() const override { return shape_; }
  Tangent proj(const Point &x, const Matrix &z) const override;
  Point retract(const Point &x, const Tangent &s) const override;
  Tangent dretract(const Point &x, const Tangent &s,
                   const Tangent &z) const override;
  DRetractKind dretract_kind() const override {
    return DRetractKind::ClosedForm;
  }
  Tangent dretract_adjoint(const Point &x, const Tangent &s,
                           const Tangent &w) const override;
  Tangent ehess2rhess(const Point &x, const Matrix &egrad, const Matrix &ehess,
                      const Tangent &s) const override;
  Point rand_point(Rng &rng) const override;
  bool check_point(const Point &x, double tol = 1e-10) const override;
  Point normalize(const Point &x) const override;
  Matrix tangent_basis(const Point &) const override { return basis_; }

  /// Minimum-norm point of the subspace.
  const Point &particular() const { return particular_; }
  /// Orthonormal basis of the direction space (vectorized, column-major).
  const Matrix &basis() const { return basis_; }

 private:
  Shape shape_;
  Matrix constraints_;
  Vector rhs_;
  Matrix basis_;
  Point particular_;
};

/// Cartesian product of manifolds. Points are column vectors holding the
/// column-major vectorization of each factor, concatenated in order.
class ProductManifold final : public Manifold {
 public:
  explicit ProductManifold(std::vector<ManifoldPtr> factors);
  /// m copies of the same manifold.
  static std::shared_ptr<ProductManifold> power(ManifoldPtr factor,
                                                std::size_t m);

  std::string name() const override;
  Eigen::Index dim() const override { return dim_; }
  Shape shape() const override { return {total_, 1}; }
  Tangent proj(const Point &x, const Matrix &z) const override;
  Point retract(const Point &x, const Tangent &s) const override;
  Tangent dretract(const Point &x, const Tangent &s,
                   const Tangent &z) const override;
  DRetractKind dretract_kind() const override;
  Tangent dretract_adjoint(const Point &x, const Tangent &s,
                           const Tangent &w) const override;
  Tangent ehess2rhess(const Point &x, const Matrix &egrad, const Matrix &ehess,
                      const Tangent &s) const override;
  Tangent pullback_hess_correction(const Point &x, const Matrix &egrad,
                                   const Tangent &s) const override;
  Point rand_point(Rng &rng) const override;
  bool check_point(const Point &x, double tol = 1e-10) const override;
  bool check_tangent(const Point &x, const Tangent &v,
                     double tol = 1e-10) const override;
  Point normalize(const Point &x) const override;

  std::size_t num_factors() const { return factors_.size(); }
  const Manifold &factor(std::size_t i) const { return *factors_[i]; }
  Eigen::Index offset(std::size_t i) const { return offsets_[i]; }

  /// Copy of factor i of a product array, in that factor's shape.
  Matrix part(const Matrix &x, std::size_t i) const;
  /// Writes a factor-shaped array into slot i of a product array.
  void set_part(Matrix &x, std::size_t i, const Matrix &value) const;
  /// Concatenates factor-shaped arrays.
  Matrix assemble(const std::vector<Matrix> &parts) const;

 private:
  std::vector<ManifoldPtr> factors_;
  std::vector<Eigen::Index> offsets_;
  Eigen::Index total_ = 0;
  Eigen::Index dim_ = 0;
};

}  // namespace rarc
