#include <cmath>
#include <limits>

#include "rarc/model.hpp"

namespace rarc {

CubicModel::CubicModel(ManifoldPtr manifold, Point x, double f0, Tangent g,
                       HessOp hess, double sigma)
    : manifold_(std::move(manifold)), x_(std::move(x)), f0_(f0),
      g_(std::move(g)), hess_(std::move(hess)), sigma_(sigma),
      counter_(std::make_shared<std::atomic<std::int64_t>>(0)) {
  if (!manifold_) throw ArgumentError("CubicModel: null manifold");
  if (!(sigma_ >= 0.0)) throw ArgumentError("CubicModel: negative sigma");
}

CubicModel CubicModel::with_sigma(double sigma) const {
  CubicModel out = *this;
  if (!(sigma >= 0.0)) throw ArgumentError("CubicModel: negative sigma");
  out.sigma_ = sigma;
  return out;
}

Tangent CubicModel::hess(const Tangent &v) const {
  counter_->fetch_add(1);
  return hess_(v);
}

double model_value(const CubicModel &m, const Tangent &s) {
  return model_value(m, s, m.hess(s));
}

double model_value(const CubicModel &m, const Tangent &s, const Tangent &hs) {
  const double ns = m.norm(s);
  return m.f0() + m.inner(s, m.g()) + 0.5 * m.inner(s, hs) +
         m.sigma() / 3.0 * ns * ns * ns;
}

Tangent model_grad(const CubicModel &m, const Tangent &s) {
  return model_grad(m, s, m.hess(s));
}

Tangent model_grad(const CubicModel &m, const Tangent &s, const Tangent &hs) {
  return m.g() + hs + m.sigma() * m.norm(s) * s;
}

double model_decrease(const CubicModel &m, const Tangent &s,
                      const Tangent &hs) {
  return -(m.inner(s, m.g()) + 0.5 * m.inner(s, hs));
}

Tangent model_hess_apply(const CubicModel &m, const Tangent &s,
                         const Tangent &v) {
  Tangent out = m.hess(v);
  const double ns = m.norm(s);
  if (ns > 0.0) {
    out += m.sigma() * (ns * v + (m.inner(s, v) / ns) * s);
  }
  return out;
}

EigResult smallest_eig(const Manifold &manifold, const Point &x,
                       const HessOp &op, double tol, int max_iters) {
  const Eigen::Index n = manifold.dim();
  if (max_iters < 0 || max_iters > n) max_iters = static_cast<int>(n);
  Rng rng(0x5eedULL);
  std::vector<Tangent> basis;
  std::vector<double> alpha;
  std::vector<double> beta;
  basis.push_back(manifold.rand_tangent(x, rng));

  auto orthogonalize = [&](Tangent &v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const Tangent &q : basis) v -= manifold.inner(x, q, v) * q;
    }
  };

  EigResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < max_iters; ++k) {
    const Tangent &q = basis.back();
    Tangent w = op(q);
    const double a = manifold.inner(x, q, w);
    alpha.push_back(a);
    w -= a * q;
    if (k > 0) w -= beta.back() * basis[basis.size() - 2];
    orthogonalize(w);
    double b = manifold.norm(x, w);

    const int kk = static_cast<int>(alpha.size());
    Matrix t = Matrix::Zero(kk, kk);
    for (int i = 0; i < kk; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < kk) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    const double theta = es.eigenvalues()(0);
    const Vector u = es.eigenvectors().col(0);
    const bool full = kk == n;
    const double res = full ? 0.0 : std::abs(b * u(kk - 1));
    best.value = theta;
    best.residual = res;
    best.iterations = kk;
    if (full || res <= tol * std::max(1.0, std::abs(theta))) {
      Tangent v = manifold.zero_tangent();
      for (int i = 0; i < kk; ++i) v += u(i) * basis[i];
      best.vector = v / manifold.norm(x, v);
      return best;
    }
    beta.push_back(b);
    if (b <= 1e-12 * std::max(1.0, std::abs(a))) {
      // Invariant subspace found; continue from a fresh orthogonal direction.
      beta.back() = 0.0;
      Tangent r;
      do {
        r = manifold.rand_tangent(x, rng);
        orthogonalize(r);
      } while (manifold.norm(x, r) < 1e-6);
      basis.push_back(r / manifold.norm(x, r));
    } else {
      basis.push_back(w / b);
    }
  }
  throw ConvergenceError("smallest_eig: Lanczos did not converge",
                         best.value - best.residual,
                         best.value + best.residual);
}

EigResult model_hess_smallest_eig(const CubicModel &m, const Tangent &s,
                                  double tol) {
  return smallest_eig(
      m.manifold(), m.point(),
      [&](const Tangent &v) { return model_hess_apply(m, s, v); }, tol);
}

RhoResult improvement_ratio(double f_x, double f_trial,
                            double model_decrease) {
  RhoResult out;
  out.numerator = f_x - f_trial;
  out.denominator = model_decrease;
  if (!std::isfinite(f_trial) || !std::isfinite(model_decrease) ||
      !std::isfinite(f_x) || !(model_decrease > 0.0)) {
    out.degenerate = true;
    out.rho = -std::numeric_limits<double>::infinity();
    return out;
  }
  const double reg = kRhoRegularization *
                     std::numeric_limits<double>::epsilon() *
                     std::max(1.0, std::abs(f_x));
  out.rho = (out.numerator + reg) / (out.denominator + reg);
  return out;
}

RhoResult rho(double f_x, double f_trial, const CubicModel &m,
              const Tangent &s) {
  if (m.norm(s) == 0.0) return improvement_ratio(f_x, f_trial, 0.0);
  return improvement_ratio(f_x, f_trial, model_decrease(m, s, m.hess(s)));
}

}  // namespace rarc
