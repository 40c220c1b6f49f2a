#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "rarc/arc.hpp"

namespace rarc {

std::string_view to_string(SubsolverKind k) {
  return k == SubsolverKind::Lanczos ? "lanczos" : "nlcg";
}

void ArcParams::validate() const {
  auto require = [](bool ok, const char *what) {
    if (!ok) throw ArgumentError(std::string("ArcParams: ") + what);
  };
  require(std::isfinite(theta) && theta > 0.0, "theta must be > 0");
  require(std::isfinite(sigma_min) && sigma_min > 0.0,
          "sigma_min must be > 0");
  require(std::isfinite(sigma_0) && (sigma_0 <= 0.0 || sigma_0 >= sigma_min),
          "sigma_0 must be >= sigma_min");
  require(eta1 > 0.0 && eta1 <= eta2 && eta2 < 1.0,
          "need 0 < eta1 <= eta2 < 1");
  require(gamma1 > 0.0 && gamma1 < 1.0, "gamma1 must lie in (0, 1)");
  require(std::isfinite(gamma2) && gamma2 > 1.0, "gamma2 must be > 1");
  require(std::isfinite(gamma3) && gamma3 >= gamma2,
          "gamma3 must be >= gamma2");
  require(std::isfinite(grad_tol) && grad_tol >= 0.0,
          "grad_tol must be >= 0");
  require(max_iters >= 0, "max_iters must be >= 0");
  require(std::isfinite(second_order_tol) && second_order_tol >= 0.0,
          "second_order_tol must be >= 0");
}

double default_sigma0(Eigen::Index dim) {
  const double delta0 = std::sqrt(static_cast<double>(std::max<Eigen::Index>(
                            dim, 1))) / 8.0;
  return 100.0 / delta0;
}

double ArcParams::initial_sigma(Eigen::Index dim) const {
  return sigma_0 > 0.0 ? sigma_0 : std::max(sigma_min, default_sigma0(dim));
}

double update_sigma(double sigma, double rho, const ArcParams &p) {
  if (rho >= p.eta2) return std::max(p.sigma_min, p.gamma1 * sigma);
  if (rho >= p.eta1) return sigma;
  return p.gamma2 * sigma;
}

double k1_bound(double f0, double f_low, const ArcParams &p, double l_prime,
                double sigma_max) {
  if (f0 <= f_low) return 0.0;
  const double c = l_prime / 2.0 + p.theta + sigma_max;
  return 3.0 * (f0 - f_low) / (p.eta1 * p.sigma_min) *
         std::pow(c / p.grad_tol, 1.5);
}

double k2_bound(double f0, double f_low, const ArcParams &p, double sigma_max,
                double eps_h) {
  if (f0 <= f_low) return 0.0;
  const double c = p.theta + 2.0 * sigma_max;
  return 3.0 * (f0 - f_low) / (p.eta1 * p.sigma_min) * std::pow(c / eps_h, 3);
}

double sigma_max_bound(double sigma_0, double l, const ArcParams &p) {
  return std::max(sigma_0, l * p.gamma3 / (2.0 * (1.0 - p.eta2)));
}

SolverResult arc_run(ManifoldPtr manifold, const Problem &problem,
                     const Point &x0, const ArcParams &p) {
  p.validate();
  if (!manifold) throw ArgumentError("arc_run: null manifold");
  const Manifold &mf = *manifold;
  if (!mf.check_point(x0, 1e-8)) {
    throw ArgumentError("arc_run: x0 is not on " + mf.name());
  }
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start).count();
  };

  Oracle oracle(manifold, problem);
  Point x = mf.normalize(x0);
  double f = oracle.cost(x);
  if (!std::isfinite(f)) throw ArgumentError("arc_run: cost at x0 is not finite");
  Matrix eg = oracle.egrad(x);
  Tangent g = mf.egrad2rgrad(x, eg);
  double gn = mf.norm(x, g);
  double sigma = p.initial_sigma(mf.dim());
  std::int64_t hessvecs = 0;
  Rng rng(p.seed);

  SubsolverOptions opts;
  opts.theta = p.theta;
  opts.max_inner = p.max_inner;
  opts.second_order = p.second_order;

  SolverResult out;
  Trace &trace = out.trace;
  trace.solver = std::string("arc-") + std::string(to_string(p.subsolver));
  trace.f0 = f;
  IterationRecord r0;
  r0.f = f;
  r0.grad_norm = gn;
  r0.sigma = sigma;
  r0.grad_count = oracle.grad_calls();
  r0.time_s = elapsed();
  if (p.log_points) r0.point = x;
  trace.records.push_back(r0);

  trace.termination = Termination::MaxIters;
  for (int it = 0; it < p.max_iters; ++it) {
    if (gn <= p.grad_tol) {
      if (!p.second_order) {
        trace.termination = Termination::GradTol;
        break;
      }
      IterationRecord &cur = trace.records.back();
      if (!cur.lambda_min_hess) {
        const EigResult e = smallest_eig(
            mf, x, pullback_hess(manifold, problem, x, eg), 1e-10);
        hessvecs += e.iterations;
        cur.lambda_min_hess = e.value;
        cur.hessvec_count = hessvecs;
      }
      if (*cur.lambda_min_hess >= -p.second_order_tol) {
        trace.termination = Termination::SecondOrderMet;
        break;
      }
    }

    IterationRecord rec;
    rec.k = it + 1;
    rec.sigma_used = sigma;
    bool failed = false;
    SubproblemResult sub;
    Point x_trial;
    try {
      CubicModel model(manifold, x, f, g,
                       pullback_hess(manifold, problem, x, eg), sigma);
      sub = p.subsolver == SubsolverKind::Lanczos ? solve_lanczos(model, opts, rng)
                                                  : solve_nlcg(model, opts);
      hessvecs += sub.hessvec_count;
      if (sub.step_norm == 0.0 || mf.norm(x, sub.step) == 0.0) {
        trace.termination = Termination::ZeroStep;
        break;
      }
      x_trial = mf.retract(x, sub.step);
    } catch (const std::exception &) {
      failed = true;
    }

    RhoResult rr;
    if (failed) {
      ++trace.contained_failures;
      rr.degenerate = true;
      rr.rho = -std::numeric_limits<double>::infinity();
      rec.f_trial = std::numeric_limits<double>::quiet_NaN();
    } else {
      rec.f_trial = oracle.cost(x_trial);
      rr = improvement_ratio(f, rec.f_trial, sub.model_decrease);
      rec.step_norm = mf.norm(x, sub.step);
      rec.inner_iters = sub.inner_iters;
    }
    rec.rho = rr.rho;
    rec.rho_num = rr.numerator;
    rec.rho_den = rr.denominator;
    rec.accepted = !rr.degenerate && rr.rho >= p.eta1;
    sigma = update_sigma(sigma, rr.rho, p);

    if (rec.accepted) {
      x = mf.normalize(x_trial);
      f = oracle.cost(x);
      eg = oracle.egrad(x);
      g = mf.egrad2rgrad(x, eg);
      gn = mf.norm(x, g);
    }
    rec.f = f;
    rec.grad_norm = gn;
    rec.sigma = sigma;
    rec.hessvec_count = hessvecs;
    rec.grad_count = oracle.grad_calls();
    rec.time_s = elapsed();
    if (p.log_points) rec.point = x;
    trace.records.push_back(std::move(rec));
  }
  if (trace.termination == Termination::MaxIters && gn <= p.grad_tol &&
      !p.second_order) {
    trace.termination = Termination::GradTol;
  }
  trace.f_final = f;
  out.x = std::move(x);
  return out;
}

}  // namespace rarc
