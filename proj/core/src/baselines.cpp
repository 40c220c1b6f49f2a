#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "rarc/baselines.hpp"

namespace rarc {

namespace {

class Clock {
 public:
  Clock() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct TcgResult {
  Tangent eta;
  Tangent h_eta;
  int iters = 0;
  bool boundary = false;
};

// Steihaug-Toint truncated CG on min <g, e> + 1/2 <e, H e>, |e| <= delta.
TcgResult truncated_cg(const CubicModel &m, double delta, double kappa,
                       double theta, int max_inner) {
  TcgResult out;
  out.eta = m.manifold().zero_tangent();
  out.h_eta = out.eta;
  Tangent r = m.g();
  double rr = m.inner(r, r);
  const double r0 = std::sqrt(rr);
  const double stop = r0 * std::min(std::pow(r0, theta), kappa);
  Tangent d = -r;
  for (out.iters = 1; out.iters <= max_inner; ++out.iters) {
    const Tangent hd = m.hess(d);
    const double dhd = m.inner(d, hd);
    const double alpha = rr / dhd;
    const Tangent next = out.eta + alpha * d;
    if (dhd <= 0.0 || m.norm(next) >= delta) {
      // Move to the boundary along d.
      const double ed = m.inner(out.eta, d);
      const double dd = m.inner(d, d);
      const double ee = m.inner(out.eta, out.eta);
      const double tau =
          (-ed + std::sqrt(ed * ed + dd * (delta * delta - ee))) / dd;
      out.eta += tau * d;
      out.h_eta += tau * hd;
      out.boundary = true;
      return out;
    }
    out.eta = next;
    out.h_eta += alpha * hd;
    r += alpha * hd;
    const double rr_new = m.inner(r, r);
    if (std::sqrt(rr_new) <= stop) return out;
    d = -r + (rr_new / rr) * d;
    rr = rr_new;
  }
  out.iters = max_inner;
  return out;
}

IterationRecord initial_record(double f, double gn, double sigma,
                               std::int64_t grads, const Point &x,
                               bool log_points) {
  IterationRecord r;
  r.f = f;
  r.grad_norm = gn;
  r.sigma = sigma;
  r.grad_count = grads;
  if (log_points) r.point = x;
  return r;
}

}  // namespace

void RtrParams::validate() const {
  auto require = [](bool ok, const char *what) {
    if (!ok) throw ArgumentError(std::string("RtrParams: ") + what);
  };
  require(std::isfinite(delta_max) && std::isfinite(delta0),
          "radii must be finite");
  require(delta0 <= 0.0 || delta_max <= 0.0 || delta0 <= delta_max,
          "need delta0 <= delta_max");
  require(rho_accept >= 0.0 && rho_accept < 0.25,
          "rho_accept must lie in [0, 0.25)");
  require(kappa > 0.0 && kappa < 1.0, "kappa must lie in (0, 1)");
  require(theta_tcg > 0.0, "theta_tcg must be > 0");
  require(grad_tol >= 0.0, "grad_tol must be >= 0");
  require(max_iters >= 0, "max_iters must be >= 0");
}

SolverResult rtr_run(ManifoldPtr manifold, const Problem &problem,
                     const Point &x0, const RtrParams &p) {
  p.validate();
  if (!manifold) throw ArgumentError("rtr_run: null manifold");
  const Manifold &mf = *manifold;
  if (!mf.check_point(x0, 1e-8)) {
    throw ArgumentError("rtr_run: x0 is not on " + mf.name());
  }
  const Clock clock;
  const double dim = static_cast<double>(mf.dim());
  const double delta_max = p.delta_max > 0.0 ? p.delta_max : std::sqrt(dim);
  double delta = p.delta0 > 0.0 ? p.delta0 : delta_max / 8.0;
  const int max_inner =
      p.max_inner > 0 ? p.max_inner : static_cast<int>(mf.dim());

  Oracle oracle(manifold, problem);
  Point x = mf.normalize(x0);
  double f = oracle.cost(x);
  if (!std::isfinite(f)) throw ArgumentError("rtr_run: cost at x0 is not finite");
  Matrix eg = oracle.egrad(x);
  Tangent g = mf.egrad2rgrad(x, eg);
  double gn = mf.norm(x, g);
  std::int64_t hessvecs = 0;

  SolverResult out;
  Trace &trace = out.trace;
  trace.solver = "rtr";
  trace.f0 = f;
  trace.records.push_back(
      initial_record(f, gn, delta, oracle.grad_calls(), x, p.log_points));
  trace.records.back().time_s = clock.seconds();
  trace.termination = Termination::MaxIters;

  for (int it = 0; it < p.max_iters; ++it) {
    if (gn <= p.grad_tol) {
      trace.termination = Termination::GradTol;
      break;
    }
    IterationRecord rec;
    rec.k = it + 1;
    rec.sigma_used = delta;
    CubicModel model(manifold, x, f, g,
                     pullback_hess(manifold, problem, x, eg), 0.0);
    const TcgResult tcg =
        truncated_cg(model, delta, p.kappa, p.theta_tcg, max_inner);
    hessvecs += model.hessvec_count();
    const double pred =
        -(model.inner(g, tcg.eta) + 0.5 * model.inner(tcg.eta, tcg.h_eta));
    RhoResult rr;
    try {
      const Point x_trial = mf.retract(x, tcg.eta);
      rec.f_trial = oracle.cost(x_trial);
      rr = improvement_ratio(f, rec.f_trial, pred);
      rec.step_norm = mf.norm(x, tcg.eta);
      rec.inner_iters = tcg.iters;
      rec.accepted = !rr.degenerate && rr.rho > p.rho_accept;
      if (rec.accepted) x = mf.normalize(x_trial);
    } catch (const std::exception &) {
      ++trace.contained_failures;
      rr.degenerate = true;
      rr.rho = -std::numeric_limits<double>::infinity();
    }
    rec.rho = rr.rho;
    rec.rho_num = rr.numerator;
    rec.rho_den = rr.denominator;
    if (rr.rho < 0.25) {
      delta /= 4.0;
    } else if (rr.rho > 0.75 && tcg.boundary) {
      delta = std::min(2.0 * delta, delta_max);
    }
    if (rec.accepted) {
      f = oracle.cost(x);
      eg = oracle.egrad(x);
      g = mf.egrad2rgrad(x, eg);
      gn = mf.norm(x, g);
    }
    rec.f = f;
    rec.grad_norm = gn;
    rec.sigma = delta;
    rec.hessvec_count = hessvecs;
    rec.grad_count = oracle.grad_calls();
    rec.time_s = clock.seconds();
    if (p.log_points) rec.point = x;
    trace.records.push_back(std::move(rec));
    if (delta == 0.0) {
      trace.termination = Termination::ZeroStep;
      break;
    }
  }
  if (trace.termination == Termination::MaxIters && gn <= p.grad_tol) {
    trace.termination = Termination::GradTol;
  }
  trace.f_final = f;
  out.x = std::move(x);
  return out;
}

void RgdParams::validate() const {
  auto require = [](bool ok, const char *what) {
    if (!ok) throw ArgumentError(std::string("RgdParams: ") + what);
  };
  require(grad_tol >= 0.0, "grad_tol must be >= 0");
  require(max_iters >= 0, "max_iters must be >= 0");
  require(armijo_c > 0.0 && armijo_c < 1.0, "armijo_c must lie in (0, 1)");
  require(initial_step > 0.0 && std::isfinite(initial_step),
          "initial_step must be > 0");
  require(max_backtracks > 0, "max_backtracks must be > 0");
}

SolverResult rgd_run(ManifoldPtr manifold, const Problem &problem,
                     const Point &x0, const RgdParams &p) {
  p.validate();
  if (!manifold) throw ArgumentError("rgd_run: null manifold");
  const Manifold &mf = *manifold;
  if (!mf.check_point(x0, 1e-8)) {
    throw ArgumentError("rgd_run: x0 is not on " + mf.name());
  }
  const Clock clock;
  Oracle oracle(manifold, problem);
  Point x = mf.normalize(x0);
  double f = oracle.cost(x);
  if (!std::isfinite(f)) throw ArgumentError("rgd_run: cost at x0 is not finite");
  Tangent g = mf.egrad2rgrad(x, oracle.egrad(x));
  double gn = mf.norm(x, g);
  double step = p.initial_step;

  SolverResult out;
  Trace &trace = out.trace;
  trace.solver = "rgd";
  trace.f0 = f;
  trace.records.push_back(
      initial_record(f, gn, step, oracle.grad_calls(), x, p.log_points));
  trace.records.back().time_s = clock.seconds();
  trace.termination = Termination::MaxIters;

  for (int it = 0; it < p.max_iters; ++it) {
    if (gn <= p.grad_tol) {
      trace.termination = Termination::GradTol;
      break;
    }
    IterationRecord rec;
    rec.k = it + 1;
    double t = 2.0 * step;
    rec.sigma_used = t;
    bool found = false;
    Point x_trial;
    for (int b = 0; b < p.max_backtracks; ++b, t *= 0.5) {
      rec.inner_iters = b + 1;
      try {
        x_trial = mf.retract(x, -t * g);
      } catch (const std::exception &) {
        continue;
      }
      rec.f_trial = oracle.cost(x_trial);
      if (std::isfinite(rec.f_trial) &&
          rec.f_trial <= f - p.armijo_c * t * gn * gn) {
        found = true;
        break;
      }
    }
    if (!found) {
      trace.termination = Termination::ZeroStep;
      break;
    }
    step = t;
    rec.step_norm = t * gn;
    rec.rho_num = f - rec.f_trial;
    rec.rho_den = t * gn * gn;
    rec.rho = rec.rho_num / rec.rho_den;
    rec.accepted = true;
    x = mf.normalize(x_trial);
    f = oracle.cost(x);
    g = mf.egrad2rgrad(x, oracle.egrad(x));
    gn = mf.norm(x, g);
    rec.f = f;
    rec.grad_norm = gn;
    rec.sigma = step;
    rec.grad_count = oracle.grad_calls();
    rec.time_s = clock.seconds();
    if (p.log_points) rec.point = x;
    trace.records.push_back(std::move(rec));
  }
  if (trace.termination == Termination::MaxIters && gn <= p.grad_tol) {
    trace.termination = Termination::GradTol;
  }
  trace.f_final = f;
  out.x = std::move(x);
  return out;
}

SolverResult rgd_run(ManifoldPtr manifold, const Problem &problem,
                     const Point &x0, double grad_tol, int max_iters) {
  RgdParams p;
  p.grad_tol = grad_tol;
  p.max_iters = max_iters;
  return rgd_run(std::move(manifold), problem, x0, p);
}

}  // namespace rarc
