#pragma once

#include <string_view>
#include <vector>

#include "rarc/model.hpp"

namespace rarc {

/// Lanczos tridiagonalization of H started at q_1 = g / |g|.
///
/// After k calls to lanczos_extend, alpha holds the k diagonal entries of
/// T_k, beta holds beta_1..beta_k (beta_k couples q_k to q_{k+1}), and basis
/// holds q_1..q_{k+1}: one vector ahead of T_k, except when k equals the
/// dimension of the space.
struct LanczosState {
  std::vector<Tangent> basis;
  std::vector<double> alpha;
  std::vector<double> beta;
  double gnorm = 0.0;
  int breakdowns = 0;

  std::size_t k() const { return alpha.size(); }
};

/// Initial state (k = 0) with q_1 = g / |g|. Requires g != 0.
LanczosState lanczos_start(const Manifold &manifold, const Point &x,
                           const Tangent &g);

/// One Lanczos step: one application of H, full reorthogonalization. On
/// breakdown (residual below 1e-12 |H q_k|) beta_k is set to 0 and the next
/// basis vector is a random unit vector orthogonal to the basis. Throws
/// ArgumentError when the basis already spans the space.
void lanczos_extend(LanczosState &state, const Manifold &manifold,
                    const Point &x, const HessOp &hess, Rng &rng);

/// The k x k tridiagonal T_k of a state.
Matrix lanczos_tridiagonal(const LanczosState &state);

struct CubicMinimizer {
  Vector y;
  /// Multiplier lambda = sigma |y| with H + lambda I positive semidefinite.
  double lambda = 0.0;
  bool hard_case = false;
  int iterations = 0;
};

/// Global minimizer of <c, y> + 1/2 y^T A y + sigma/3 |y|^3 for a small
/// dense symmetric A, through the eigendecomposition of A and a safeguarded
/// Newton/bisection solve of the secular equation |y(lambda)| = lambda/sigma.
/// Stops when |sigma |y| - lambda| <= tol * max(1, lambda); throws
/// ConvergenceError after 200 iterations.
CubicMinimizer min_cubic_dense(const Matrix &a, const Vector &c, double sigma,
                               double tol = 1e-10);

/// Global minimizer of y_1 gnorm + 1/2 y^T T y + sigma/3 |y|^3 where T is
/// tridiagonal with diagonal alpha and off-diagonal beta (only the first
/// alpha.size() - 1 entries of beta are used).
CubicMinimizer min_restricted_cubic(const std::vector<double> &alpha,
                                    const std::vector<double> &beta,
                                    double gnorm, double sigma,
                                    double tol = 1e-10);

/// |grad m(s)| for s = sum y_i q_i, from the Lanczos coefficients alone:
/// the norm of gnorm e_1 + T_{1:k+1,1:k} y + sigma |y| [y; 0].
double subgrad_norm(const LanczosState &state, const Vector &y, double sigma);

enum class SubproblemStop { FirstOrderMet, FullDimension, MaxInner,
                            ZeroGradient };
std::string_view to_string(SubproblemStop reason);

struct SubproblemResult {
  Tangent step;
  double model_value = 0.0;
  /// m(0) - m(s) + sigma/3 |s|^3, the denominator of rho.
  double model_decrease = 0.0;
  double grad_norm = 0.0;
  double step_norm = 0.0;
  int inner_iters = 0;
  std::int64_t hessvec_count = 0;
  SubproblemStop reason = SubproblemStop::FirstOrderMet;
};

struct SubsolverOptions {
  double theta = 0.25;
  /// Non-positive selects the default (min(dim, 500) for Lanczos, 500 for
  /// NLCG).
  int max_inner = 0;
  /// Also enforce lambda_min(Hess m(s)) >= -theta |s|.
  bool second_order = false;
  double secular_tol = 1e-10;
};

/// Lanczos subsolver: grows the Krylov basis one vector at a time, minimizes
/// the model restricted to it, and stops as soon as
/// |grad m(s)| <= theta |s|^2.
SubproblemResult solve_lanczos(const CubicModel &m,
                               const SubsolverOptions &opts, Rng &rng);

/// Nonlinear conjugate gradients (nonnegative Polak-Ribiere) on the model
/// with exact line searches, started at the Cauchy point along -g.
SubproblemResult solve_nlcg(const CubicModel &m, const SubsolverOptions &opts);

/// lambda_min(Hess m(s)) >= -theta |s| - 1e-10.
bool check_second_order(const CubicModel &m, const Tangent &s, double theta);

}  // namespace rarc
