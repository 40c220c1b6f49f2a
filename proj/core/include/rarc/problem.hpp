#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "rarc/model.hpp"

namespace rarc {

/// A smooth cost on a manifold, given through Euclidean oracles in ambient
/// coordinates.
struct Problem {
  std::string name;
  std::function<double(const Point &)> cost;
  std::function<Matrix(const Point &)> egrad;
  /// Euclidean Hessian at x applied to a tangent vector.
  std::function<Matrix(const Point &, const Tangent &)> ehessvec;
  /// Known lower bound on the cost, if any.
  std::optional<double> f_low;
  /// Free-form description of modelling choices (cost surrogates etc).
  std::string notes;
};

/// Riemannian gradient of a problem at x.
Tangent riemannian_grad(const Manifold &manifold, const Problem &problem,
                        const Point &x);

/// Hessian of the pullback f o R_x at the origin as an operator on T_x,
/// given the Euclidean gradient at x.
HessOp pullback_hess(ManifoldPtr manifold, const Problem &problem, Point x,
                     Matrix egrad);

/// Counts oracle calls made through it. One per solver run.
class Oracle {
 public:
  Oracle(ManifoldPtr manifold, const Problem &problem)
      : manifold_(std::move(manifold)), problem_(&problem) {}

  const Manifold &manifold() const { return *manifold_; }
  const ManifoldPtr &manifold_ptr() const { return manifold_; }
  const Problem &problem() const { return *problem_; }

  double cost(const Point &x) {
    ++cost_calls_;
    return problem_->cost(x);
  }
  Matrix egrad(const Point &x) {
    ++grad_calls_;
    return problem_->egrad(x);
  }

  std::int64_t cost_calls() const { return cost_calls_; }
  std::int64_t grad_calls() const { return grad_calls_; }

 private:
  ManifoldPtr manifold_;
  const Problem *problem_;
  std::int64_t cost_calls_ = 0;
  std::int64_t grad_calls_ = 0;
};

}  // namespace rarc
