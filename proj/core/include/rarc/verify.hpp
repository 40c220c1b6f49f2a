#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rarc/arc.hpp"

namespace rarc {

/// One diagnostic outcome. Serialized as "check,subject,value,bound,pass".
struct CheckRow {
  std::string check;
  std::string subject;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
  friend bool operator==(const CheckRow &, const CheckRow &) = default;
};

inline constexpr const char *kCheckCsvHeader = "check,subject,value,bound,pass";
void write_check_csv(std::ostream &out, const std::vector<CheckRow> &rows);
/// Inverse of write_check_csv. Throws ParseError on malformed input.
std::vector<CheckRow> read_check_csv(std::istream &in);

struct TaylorResult {
  /// Least-squares slope of log residual against log t. NaN when exact.
  double slope = 0.0;
  /// L_est (A2) or L'_est (A4).
  double constant = 0.0;
  /// Every residual is at round-off level: the expansion is exact.
  bool exact = false;
  std::vector<double> t;
  std::vector<double> residual;
};

/// Nine log-spaced values from 1e-3 to 1e-1.
std::vector<double> default_t_grid();

/// r(t) = f(R_x(ts)) - [f(x) + t <g, s> + t^2/2 <s, H s>] with H the
/// pullback Hessian; L_est = 6 max |r(t)| / (t |s|)^3.
TaylorResult check_taylor_a2(const ManifoldPtr &manifold,
                             const Problem &problem, const Point &x,
                             const Tangent &s,
                             const std::vector<double> &t_grid);

/// Residual |grad fhat(ts) - g - t H s|; L'_est = 2 max res / (t |s|)^2.
TaylorResult check_grad_taylor_a4(const ManifoldPtr &manifold,
                                  const Problem &problem, const Point &x,
                                  const Tangent &s,
                                  const std::vector<double> &t_grid);

/// Gradient of the pullback at s: (D R_x(s))^* grad f(R_x(s)).
Tangent pullback_grad(const Manifold &manifold, const Problem &problem,
                      const Point &x, const Tangent &s);
/// The same gradient by central differences of f o R_x along an orthonormal
/// tangent basis.
Tangent pullback_grad_fd(const Manifold &manifold, const Problem &problem,
                         const Point &x, const Tangent &s, double h = 1e-5);

/// Smallest singular value of D R_x(s) : T_x -> T_{R_x(s)}, from the dense
/// operator matrix in orthonormal tangent bases. Dimension capped at 400.
double dr_sigma_min(const Manifold &manifold, const Point &x,
                    const Tangent &s);

struct DrBound {
  double value = 0.0;
  /// Equality (sphere) rather than a lower bound.
  bool equality = false;
};
/// Known bound on sigma_min(D R_x(s)) for |s| = a, if any: 1/(1 + a^2)
/// (sphere), sin(a)/a (sphere exponential, a < pi), 1 - 3a - a^2/2 (Stiefel,
/// when positive), 1 at a = 0 for every manifold.
std::optional<DrBound> dr_bound(const Manifold &manifold, double a);

/// samples random (x, s) per norm in `norms`; one row per sample that has a
/// known bound. Equalities pass within 1e-8, lower bounds within 1e-12.
std::vector<CheckRow> check_dr_bounds(const Manifold &manifold, int samples,
                                      Rng &rng,
                                      const std::vector<double> &norms);

/// max over steps of 6 (den - num - 2 reg)_+ / |s|^3: the smallest L for
/// which the cubic upper bound on the pullback holds along every trial step.
double trace_l_estimate(const Trace &trace);

/// Sum of cubes, sigma floor, sigma cap, success counting and per-step
/// descent. The cap uses max(l_est, trace_l_estimate) with 10% slack.
std::vector<CheckRow> check_trace(const Trace &trace, const ArcParams &p,
                                  double l_est);

/// sqrt(3 |g| / sigma_min) + 3 / (2 sigma_min) max(0, -lambda_min).
double step_norm_bound(double grad_norm, double lambda_min, double sigma_min);

/// Number of steps whose norm exceeds step_norm_bound at their base point.
/// Requires every record to carry its point (ArcParams::log_points).
int check_step_bound(const Trace &trace, const ManifoldPtr &manifold,
                     const Problem &problem, const ArcParams &p);

struct RegularityEstimate {
  double l_est = 0.0;
  double l_prime_est = 0.0;
  std::vector<double> a2_slopes;
  std::vector<double> a4_slopes;
  int a2_exact = 0;
  int a4_exact = 0;
};

/// A2/A4 checks at `points` random (x, unit s).
RegularityEstimate estimate_regularity(const ManifoldPtr &manifold,
                                       const Problem &problem, int points,
                                       Rng &rng);

/// Empirical analysis constants gathered for one run.
struct DiagnosticsReport {
  double l_est = 0.0;
  double l_prime_est = 0.0;
  double sigma_max_observed = 0.0;
  double sumcubes_lhs = 0.0;
  double sumcubes_rhs = 0.0;
  /// -1 when not checked.
  int step_bound_violations = -1;
  std::vector<CheckRow> rows;
};

}  // namespace rarc
