#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rarc/common.hpp"

namespace rarc {

enum class Termination { GradTol, SecondOrderMet, ZeroStep, MaxIters };
std::string_view to_string(Termination t);

/// Record k describes the iterate x_k and the trial step k - 1 that led to
/// it. Record 0 is the initial point and carries no step (rho empty).
struct IterationRecord {
  int k = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  /// Regularization weight for the next model (trust radius for RTR, trial
  /// step size for RGD).
  double sigma = 0.0;
  std::optional<double> rho;
  double step_norm = 0.0;
  bool accepted = false;
  int inner_iters = 0;
  /// Cumulative counts since the start of the run.
  std::int64_t hessvec_count = 0;
  std::int64_t grad_count = 0;
  double time_s = 0.0;

  // In-memory audit fields, not part of the CSV schema.
  /// Regularization weight used to build the model of step k - 1.
  double sigma_used = 0.0;
  /// f(R(s)) of step k - 1, also when rejected.
  double f_trial = 0.0;
  double rho_num = 0.0;
  double rho_den = 0.0;
  /// lambda_min of the pullback Hessian at x_k, when it was computed.
  std::optional<double> lambda_min_hess;
  /// x_k, logged in slow-check mode.
  std::optional<Point> point;
};

struct Trace {
  std::string solver;
  std::vector<IterationRecord> records;
  Termination termination = Termination::MaxIters;
  double f0 = 0.0;
  double f_final = 0.0;
  /// Subsolver failures absorbed as unsuccessful iterations.
  int contained_failures = 0;

  /// Number of trial steps (records after the initial one).
  int steps() const { return static_cast<int>(records.size()) - 1; }
  int successful_steps() const;
};

}  // namespace rarc
