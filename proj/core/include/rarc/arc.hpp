#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

#include "rarc/problem.hpp"
#include "rarc/subsolver.hpp"
#include "rarc/trace.hpp"

namespace rarc {

enum class SubsolverKind { Lanczos, Nlcg };
std::string_view to_string(SubsolverKind k);

struct ArcParams {
  double theta = 0.25;
  double sigma_min = 1e-10;
  /// Non-positive selects default_sigma0(dim).
  double sigma_0 = 0.0;
  double eta1 = 0.1;
  double eta2 = 0.9;
  double gamma1 = 0.1;
  double gamma2 = 2.0;
  double gamma3 = 2.0;
  double grad_tol = 1e-9;
  int max_iters = 1000;
  bool second_order = false;
  /// eps_H: second-order termination requires lambda_min >= -eps_H.
  double second_order_tol = 3.1622776601683795e-5;
  SubsolverKind subsolver = SubsolverKind::Lanczos;
  /// Non-positive selects the subsolver default.
  int max_inner = 0;
  std::uint64_t seed = 0;
  /// Store x_k in every record (needed by check_step_bound).
  bool log_points = false;

  /// Throws ArgumentError naming the first violated constraint.
  void validate() const;
  /// sigma_0 if set, else default_sigma0(dim).
  double initial_sigma(Eigen::Index dim) const;
};

/// 100 / Delta_0 with Delta_0 = sqrt(dim) / 8.
double default_sigma0(Eigen::Index dim);

/// rho >= eta2: max(sigma_min, gamma1 sigma); eta1 <= rho < eta2: sigma;
/// rho < eta1: gamma2 sigma.
double update_sigma(double sigma, double rho, const ArcParams &p);

/// Bound on the number of successful iterations with
/// |grad f(x_{k+1})| > eps = p.grad_tol.
double k1_bound(double f0, double f_low, const ArcParams &p, double l_prime,
                double sigma_max);

/// Bound on the number of successful iterations whose pullback Hessian has
/// lambda_min < -eps_H.
double k2_bound(double f0, double f_low, const ArcParams &p, double sigma_max,
                double eps_h);

/// max(sigma_0, L gamma3 / (2 (1 - eta2))).
double sigma_max_bound(double sigma_0, double l, const ArcParams &p);

struct SolverResult {
  Point x;
  Trace trace;
};

/// Riemannian ARC. Returns the last accepted point and the full trace.
SolverResult arc_run(ManifoldPtr manifold, const Problem &problem,
                     const Point &x0, const ArcParams &p);

}  // namespace rarc
