#pragma once

#include "rarc/arc.hpp"

namespace rarc {

/// Riemannian trust-region method with Steihaug-Toint truncated CG.
struct RtrParams {
  /// Non-positive selects sqrt(dim).
  double delta_max = 0.0;
  /// Non-positive selects delta_max / 8.
  double delta0 = 0.0;
  double rho_accept = 0.1;
  /// Inner stop: |r| <= |r0| min(|r0|^theta_tcg, kappa).
  double kappa = 0.1;
  double theta_tcg = 1.0;
  double grad_tol = 1e-9;
  int max_iters = 1000;
  /// Non-positive selects dim.
  int max_inner = 0;
  bool log_points = false;

  void validate() const;
};

SolverResult rtr_run(ManifoldPtr manifold, const Problem &problem,
                     const Point &x0, const RtrParams &p);

/// Riemannian gradient descent with Armijo backtracking.
struct RgdParams {
  double grad_tol = 1e-9;
  int max_iters = 10000;
  double armijo_c = 1e-4;
  double initial_step = 1.0;
  int max_backtracks = 60;
  bool log_points = false;

  void validate() const;
};

SolverResult rgd_run(ManifoldPtr manifold, const Problem &problem,
                     const Point &x0, const RgdParams &p);
SolverResult rgd_run(ManifoldPtr manifold, const Problem &problem,
                     const Point &x0, double grad_tol, int max_iters);

}  // namespace rarc
