#include <cmath>
#include <limits>

#include "rarc/subsolver.hpp"

namespace rarc {

namespace {

constexpr int kSecularMaxIters = 200;

void reorthogonalize(const LanczosState &state, const Manifold &manifold,
                     const Point &x, Tangent &v) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const Tangent &q : state.basis) v -= manifold.inner(x, q, v) * q;
  }
}

}  // namespace

std::string_view to_string(SubproblemStop reason) {
  switch (reason) {
    case SubproblemStop::FirstOrderMet: return "first_order_met";
    case SubproblemStop::FullDimension: return "full_dimension";
    case SubproblemStop::MaxInner: return "max_inner";
    case SubproblemStop::ZeroGradient: return "zero_gradient";
  }
  return "unknown";
}

LanczosState lanczos_start(const Manifold &manifold, const Point &x,
                           const Tangent &g) {
  LanczosState state;
  state.gnorm = manifold.norm(x, g);
  if (!(state.gnorm > 0.0)) {
    throw ArgumentError("lanczos_start: zero or non-finite gradient");
  }
  state.basis.push_back(g / state.gnorm);
  return state;
}

void lanczos_extend(LanczosState &state, const Manifold &manifold,
                    const Point &x, const HessOp &hess, Rng &rng) {
  const std::size_t n = static_cast<std::size_t>(manifold.dim());
  const std::size_t k = state.k();
  if (k >= n || state.basis.size() <= k) {
    throw ArgumentError("lanczos_extend: basis already spans the space");
  }
  const Tangent &q = state.basis[k];
  Tangent w = hess(q);
  const double hq_norm = manifold.norm(x, w);
  const double a = manifold.inner(x, q, w);
  w -= a * q;
  if (k > 0) w -= state.beta[k - 1] * state.basis[k - 1];
  reorthogonalize(state, manifold, x, w);
  state.alpha.push_back(a);

  if (k + 1 == n) {
    state.beta.push_back(0.0);
    return;
  }
  const double b = manifold.norm(x, w);
  if (b < 1e-12 * hq_norm || b == 0.0) {
    ++state.breakdowns;
    state.beta.push_back(0.0);
    Tangent r;
    double nr = 0.0;
    do {
      r = manifold.rand_tangent(x, rng);
      reorthogonalize(state, manifold, x, r);
      nr = manifold.norm(x, r);
    } while (nr < 1e-6);
    state.basis.push_back(r / nr);
  } else {
    state.beta.push_back(b);
    state.basis.push_back(w / b);
  }
}

Matrix lanczos_tridiagonal(const LanczosState &state) {
  const Eigen::Index k = static_cast<Eigen::Index>(state.k());
  Matrix t = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    t(i, i) = state.alpha[i];
    if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = state.beta[i];
  }
  return t;
}

CubicMinimizer min_cubic_dense(const Matrix &a, const Vector &c, double sigma,
                               double tol) {
  if (!(sigma > 0.0)) throw ArgumentError("min_cubic_dense: sigma <= 0");
  const Eigen::Index k = a.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Vector &lam = es.eigenvalues();
  const Matrix &v = es.eigenvectors();
  const Vector cv = v.transpose() * c;
  const double cnorm = cv.norm();
  const double lo = std::max(0.0, -lam(0));
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());

  CubicMinimizer out;

  // Coefficients of y(lambda) in the eigenbasis, skipping a set of indices.
  auto ycoef = [&](double l, Eigen::Index skip_upto) {
    Vector z = Vector::Zero(k);
    for (Eigen::Index i = skip_upto; i < k; ++i) z(i) = -cv(i) / (lam(i) + l);
    return z;
  };

  // Hard case: the linear term has (numerically) no weight on the leftmost
  // eigenspace and the secular function is already non-positive there.
  Eigen::Index nj = 0;
  while (nj < k && lam(nj) + lo <= 1e-12 * scale) ++nj;
  if (nj > 0) {
    const double cj = cv.head(nj).norm();
    if (cj <= 1e-12 * std::max(cnorm, 1e-300) || cnorm == 0.0) {
      const Vector z = ycoef(lo, nj);
      const double target = lo / sigma;
      if (z.norm() <= target) {
        Vector zz = z;
        zz(0) = std::sqrt(std::max(0.0, target * target - z.squaredNorm()));
        out.y = v * zz;
        out.lambda = lo;
        out.hard_case = true;
        return out;
      }
    }
  }
  if (cnorm == 0.0) {
    // lam(0) >= 0 here, so the origin is the global minimizer.
    out.y = Vector::Zero(k);
    return out;
  }

  auto phi = [&](double l, double &dphi) {
    double s2 = 0.0;
    double d = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double den = lam(i) + l;
      const double t = cv(i) / den;
      s2 += t * t;
      d += t * t / den;
    }
    const double ny = std::sqrt(s2);
    dphi = -d / ny - 1.0 / sigma;
    return ny - l / sigma;
  };

  double lo_b = lo;
  double hi_b = std::max(1.0, 2.0 * lo);
  double dummy = 0.0;
  while (phi(hi_b, dummy) > 0.0) {
    lo_b = hi_b;
    hi_b *= 2.0;
    if (!std::isfinite(hi_b)) {
      throw ConvergenceError("min_cubic_dense: no upper bracket", lo_b, hi_b);
    }
  }
  double l = hi_b;
  for (int it = 1; it <= kSecularMaxIters; ++it) {
    double dphi = 0.0;
    const double f = phi(l, dphi);
    out.iterations = it;
    if (std::abs(sigma * (f + l / sigma) - l) <= tol * std::max(1.0, l) &&
        l > lo) {
      out.lambda = l;
      out.y = v * ycoef(l, 0);
      return out;
    }
    if (f > 0.0) lo_b = l; else hi_b = l;
    double next = l - f / dphi;
    if (!(next > lo_b && next < hi_b)) next = 0.5 * (lo_b + hi_b);
    if (next == l) break;
    l = next;
  }
  throw ConvergenceError("min_cubic_dense: secular equation not solved",
                         lo_b, hi_b);
}

CubicMinimizer min_restricted_cubic(const std::vector<double> &alpha,
                                    const std::vector<double> &beta,
                                    double gnorm, double sigma, double tol) {
  const Eigen::Index k = static_cast<Eigen::Index>(alpha.size());
  if (k == 0) throw ArgumentError("min_restricted_cubic: empty T");
  if (static_cast<Eigen::Index>(beta.size()) < k - 1) {
    throw ArgumentError("min_restricted_cubic: too few off-diagonals");
  }
  Matrix t = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  Vector c = Vector::Zero(k);
  c(0) = gnorm;
  return min_cubic_dense(t, c, sigma, tol);
}

double subgrad_norm(const LanczosState &state, const Vector &y, double sigma) {
  const std::size_t k = static_cast<std::size_t>(y.size());
  if (k == 0 || k > state.k() || state.beta.size() < k) {
    throw ArgumentError("subgrad_norm: missing lookahead column");
  }
  Vector v = Vector::Zero(static_cast<Eigen::Index>(k) + 1);
  v(0) = state.gnorm;
  const double ny = y.norm();
  for (std::size_t i = 0; i < k; ++i) {
    double ty = state.alpha[i] * y(i);
    if (i > 0) ty += state.beta[i - 1] * y(i - 1);
    if (i + 1 < k) ty += state.beta[i] * y(i + 1);
    v(i) += ty + sigma * ny * y(i);
  }
  v(k) = state.beta[k - 1] * y(k - 1);
  return v.norm();
}

bool check_second_order(const CubicModel &m, const Tangent &s, double theta) {
  const EigResult e = model_hess_smallest_eig(m, s);
  return e.value >= -theta * m.norm(s) - 1e-10;
}

namespace {

SubproblemResult zero_step(const CubicModel &m, SubproblemStop reason) {
  SubproblemResult out;
  out.step = m.manifold().zero_tangent();
  out.model_value = m.f0();
  out.grad_norm = m.norm(m.g());
  out.reason = reason;
  return out;
}

// With g = 0 the origin is critical; in second-order mode, step along the
// leftmost eigenvector by -lambda_min / sigma when H is indefinite.
SubproblemResult zero_gradient_step(const CubicModel &m,
                                    const SubsolverOptions &opts) {
  const std::int64_t before = m.hessvec_count();
  if (!opts.second_order || !(m.sigma() > 0.0)) {
    return zero_step(m, SubproblemStop::ZeroGradient);
  }
  const EigResult e = model_hess_smallest_eig(m, m.manifold().zero_tangent());
  if (e.value >= 0.0) {
    SubproblemResult out = zero_step(m, SubproblemStop::ZeroGradient);
    out.hessvec_count = m.hessvec_count() - before;
    return out;
  }
  SubproblemResult out;
  out.step = (-e.value / m.sigma()) * e.vector;
  const Tangent hs = m.hess(out.step);
  out.model_value = model_value(m, out.step, hs);
  out.model_decrease = model_decrease(m, out.step, hs);
  out.grad_norm = m.norm(model_grad(m, out.step, hs));
  out.step_norm = m.norm(out.step);
  out.inner_iters = e.iterations;
  out.hessvec_count = m.hessvec_count() - before;
  out.reason = SubproblemStop::FirstOrderMet;
  return out;
}

}  // namespace

SubproblemResult solve_lanczos(const CubicModel &m,
                               const SubsolverOptions &opts, Rng &rng) {
  const Manifold &manifold = m.manifold();
  const Point &x = m.point();
  const double gnorm = m.norm(m.g());
  if (!(gnorm > 0.0)) return zero_gradient_step(m, opts);

  const std::int64_t before = m.hessvec_count();
  const Eigen::Index n = manifold.dim();
  const int max_inner = opts.max_inner > 0
                            ? static_cast<int>(std::min<Eigen::Index>(
                                  opts.max_inner, n))
                            : static_cast<int>(std::min<Eigen::Index>(n, 500));
  const HessOp hess = [&m](const Tangent &v) { return m.hess(v); };

  LanczosState state = lanczos_start(manifold, x, m.g());
  bool force_full = false;
  CubicMinimizer sol;
  double gn = 0.0;
  SubproblemStop reason = SubproblemStop::MaxInner;

  auto materialize = [&](const Vector &y) {
    Tangent s = manifold.zero_tangent();
    for (Eigen::Index i = 0; i < y.size(); ++i) s += y(i) * state.basis[i];
    return s;
  };

  for (;;) {
    lanczos_extend(state, manifold, x, hess, rng);
    const int k = static_cast<int>(state.k());
    sol = min_restricted_cubic(state.alpha, state.beta, gnorm, m.sigma(),
                               opts.secular_tol);
    gn = subgrad_norm(state, sol.y, m.sigma());
    const double ny = sol.y.norm();
    if (k == n) {
      reason = SubproblemStop::FullDimension;
      break;
    }
    if (!force_full && gn <= opts.theta * ny * ny) {
      if (!opts.second_order ||
          check_second_order(m, materialize(sol.y), opts.theta)) {
        reason = SubproblemStop::FirstOrderMet;
        break;
      }
      force_full = true;
    }
    if (!force_full && k >= max_inner) {
      reason = SubproblemStop::MaxInner;
      break;
    }
  }

  SubproblemResult out;
  out.step = materialize(sol.y);
  const Matrix t = lanczos_tridiagonal(state);
  const double ny = sol.y.norm();
  const double lin = gnorm * sol.y(0);
  const double quad = 0.5 * sol.y.dot(t * sol.y);
  out.model_value = m.f0() + lin + quad + m.sigma() / 3.0 * ny * ny * ny;
  out.model_decrease = -(lin + quad);
  out.grad_norm = gn;
  out.step_norm = ny;
  out.inner_iters = static_cast<int>(state.k());
  out.reason = reason;
  out.hessvec_count = m.hessvec_count() - before;
  return out;
}

SubproblemResult solve_nlcg(const CubicModel &m,
                            const SubsolverOptions &opts) {
  const double gnorm = m.norm(m.g());
  if (!(gnorm > 0.0)) return zero_gradient_step(m, opts);
  const std::int64_t before = m.hessvec_count();
  const int max_inner = opts.max_inner > 0 ? opts.max_inner : 500;
  const double sigma = m.sigma();

  // Cauchy point: minimizer over t >= 0 of -t|g| + t^2 kappa / 2 +
  // sigma t^3 / 3 with kappa the curvature along g.
  const Tangent hg = m.hess(m.g());
  const double kappa = m.inner(m.g(), hg) / (gnorm * gnorm);
  const double rc =
      (-kappa + std::sqrt(kappa * kappa + 4.0 * sigma * gnorm)) /
      (2.0 * sigma);
  Tangent s = (-rc / gnorm) * m.g();
  Tangent hs = (-rc / gnorm) * hg;
  Tangent r = model_grad(m, s, hs);
  Tangent p = -r;
  double rr = m.inner(r, r);

  SubproblemResult out;
  out.reason = SubproblemStop::MaxInner;
  int it = 0;
  for (;; ++it) {
    const double ns = m.norm(s);
    if (std::sqrt(rr) <= opts.theta * ns * ns) {
      out.reason = SubproblemStop::FirstOrderMet;
      break;
    }
    if (it >= max_inner) break;

    const Tangent hp = m.hess(p);
    const double a0 = m.inner(m.g() + hs, p);
    const double php = m.inner(p, hp);
    const double ss = ns * ns;
    const double sp = m.inner(s, p);
    const double pp = m.inner(p, p);
    auto dphi = [&](double t) {
      const double w = std::sqrt(std::max(0.0, ss + 2.0 * t * sp + t * t * pp));
      return a0 + t * php + sigma * w * (sp + t * pp);
    };
    auto d2phi = [&](double t) {
      const double w = std::sqrt(std::max(0.0, ss + 2.0 * t * sp + t * t * pp));
      const double u = sp + t * pp;
      return php + sigma * (w * pp + (w > 0.0 ? u * u / w : 0.0));
    };
    // Exact line search: first sign change of phi' on t > 0, located by
    // Newton steps safeguarded with bisection.
    double lo = 0.0;
    double hi = 1.0 / std::sqrt(std::max(pp, 1e-300));
    while (dphi(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) break;
    }
    double t = 0.5 * (lo + hi);
    for (int ls = 0; ls < 100; ++ls) {
      const double d = dphi(t);
      if (d < 0.0) lo = t; else hi = t;
      if (std::abs(d) <= 1e-15 * (std::abs(a0) + 1e-300) || hi - lo <= 1e-16 * hi) {
        break;
      }
      const double h2 = d2phi(t);
      double next = h2 > 0.0 ? t - d / h2 : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      t = next;
    }

    s += t * p;
    hs += t * hp;
    const Tangent r_new = model_grad(m, s, hs);
    const double rr_new = m.inner(r_new, r_new);
    const double beta_pr = std::max(0.0, m.inner(r_new, r_new - r) / rr);
    p = -r_new + beta_pr * p;
    if (m.inner(p, r_new) >= 0.0) p = -r_new;
    r = r_new;
    rr = rr_new;
  }

  out.step = s;
  out.model_value = model_value(m, s, hs);
  out.model_decrease = model_decrease(m, s, hs);
  out.grad_norm = std::sqrt(rr);
  out.step_norm = m.norm(s);
  out.inner_iters = it + 1;
  out.hessvec_count = m.hessvec_count() - before;
  return out;
}

}  // namespace rarc
