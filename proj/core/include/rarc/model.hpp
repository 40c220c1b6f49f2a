#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>

#include "rarc/manifold.hpp"

namespace rarc {

using HessOp = std::function<Tangent(const Tangent &)>;

/// Cubic-regularized second-order model on T_x M:
///
///   m(s) = f0 + <g, s> + 1/2 <s, H s> + sigma/3 |s|^3.
///
/// H is the Hessian of the pullback at the origin, supplied as an operator.
/// Every application of H goes through hess(), which increments a counter
/// shared by all copies of the model.
class CubicModel {
 public:
  CubicModel(ManifoldPtr manifold, Point x, double f0, Tangent g, HessOp hess,
             double sigma);

  const Manifold &manifold() const { return *manifold_; }
  const ManifoldPtr &manifold_ptr() const { return manifold_; }
  const Point &point() const { return x_; }
  double f0() const { return f0_; }
  const Tangent &g() const { return g_; }
  double sigma() const { return sigma_; }
  Eigen::Index dim() const { return manifold_->dim(); }

  /// Same data, different regularization weight. Shares the counter.
  CubicModel with_sigma(double sigma) const;

  Tangent hess(const Tangent &v) const;
  std::int64_t hessvec_count() const { return counter_->load(); }

  double inner(const Tangent &u, const Tangent &v) const {
    return manifold_->inner(x_, u, v);
  }
  double norm(const Tangent &v) const { return manifold_->norm(x_, v); }

 private:
  ManifoldPtr manifold_;
  Point x_;
  double f0_;
  Tangent g_;
  HessOp hess_;
  double sigma_;
  std::shared_ptr<std::atomic<std::int64_t>> counter_;
};

/// m(s). Costs one Hessian-vector product.
double model_value(const CubicModel &m, const Tangent &s);
/// m(s) given H s.
double model_value(const CubicModel &m, const Tangent &s, const Tangent &hs);

/// grad m(s) = g + H s + sigma |s| s. Costs one Hessian-vector product.
Tangent model_grad(const CubicModel &m, const Tangent &s);
Tangent model_grad(const CubicModel &m, const Tangent &s, const Tangent &hs);

/// m(0) - m(s) + sigma/3 |s|^3 = -(<s, g> + 1/2 <s, H s>).
double model_decrease(const CubicModel &m, const Tangent &s,
                      const Tangent &hs);

/// The operator Hess m(s)[v] = H v + sigma (|s| v + <s, v> s / |s|).
Tangent model_hess_apply(const CubicModel &m, const Tangent &s,
                         const Tangent &v);

struct EigResult {
  double value = 0.0;
  Tangent vector;
  double residual = 0.0;
  int iterations = 0;
};

/// Smallest eigenvalue of a self-adjoint operator on T_x M by Lanczos with
/// full reorthogonalization, started from a fixed-seed random tangent vector.
/// Converged when the Ritz residual is below tol * max(1, |value|); throws
/// ConvergenceError with [value - residual, value + residual] otherwise.
EigResult smallest_eig(const Manifold &manifold, const Point &x,
                       const HessOp &op, double tol, int max_iters = -1);

/// lambda_min(Hess m(s)); Hess m(0) = H.
EigResult model_hess_smallest_eig(const CubicModel &m, const Tangent &s,
                                  double tol = 1e-10);

struct RhoResult {
  double rho = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  bool degenerate = false;
};

/// Relative size of the round-off shift applied to both terms of the ratio.
inline constexpr double kRhoRegularization = 1e3;

/// Regularized improvement ratio from the actual decrease f_x - f_trial and
/// the model decrease m(0) - m(s) + sigma/3 |s|^3.
///
/// Both terms are shifted by 1e3 * eps * max(1, |f_x|) so that steps whose
/// effect is below the resolution of f are judged by a ratio near 1 instead
/// of round-off noise. A non-positive or non-finite denominator, or a
/// non-finite trial cost, is degenerate and reports rho = -inf.
RhoResult improvement_ratio(double f_x, double f_trial, double model_decrease);

/// The ratio for trial step s, with f_trial = f(R_x(s)).
RhoResult rho(double f_x, double f_trial, const CubicModel &m,
              const Tangent &s);

}  // namespace rarc
