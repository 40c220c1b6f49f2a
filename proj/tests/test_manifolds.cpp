#include <numbers>

#include "doctest.h"
#include "helpers.hpp"

using namespace rarc;
using testing::unvec;
using testing::vec;

namespace {

Vector e(Eigen::Index n, Eigen::Index i) { return Vector::Unit(n, i); }

}  // namespace

TEST_CASE("euclidean inner product and projection") {
  Euclidean r3(3);
  Vector u(3), v(3);
  u << 1, 2, 0;
  v << 3, 0, 1;
  const Point x = Vector::Zero(3);
  CHECK(r3.inner(x, u, v) == doctest::Approx(3.0));
  CHECK((r3.proj(x, u) - u).norm() == 0.0);
  CHECK((r3.egrad2rgrad(x, u) - u).norm() == 0.0);
  CHECK((r3.ehess2rhess(x, u, v, u) - v).norm() == 0.0);
}

TEST_CASE("inner product rejects shape mismatch") {
  Sphere s(4);
  const Point x = e(4, 0);
  CHECK_THROWS_AS(s.inner(x, Vector::Zero(3), Vector::Zero(4)), ArgumentError);
}

TEST_CASE("zero tangent has zero norm on every manifold") {
  Rng rng(1);
  for (const auto &m : testing::sample_manifolds()) {
    const Point x = m->rand_point(rng);
    CHECK(m->inner(x, m->zero_tangent(), m->zero_tangent()) == 0.0);
  }
}

TEST_CASE("stiefel inner product equals trace(U^T V)") {
  Stiefel st(4, 2);
  Rng rng(2);
  const Point x = st.rand_point(rng);
  Matrix z = Matrix::Zero(4, 2);
  z(2, 1) = 1.0;
  const Tangent u = st.proj(x, z);
  CHECK(st.inner(x, u, u) ==
        doctest::Approx((u.transpose() * u).trace()).epsilon(1e-14));
  CHECK(st.inner(x, u, u) == doctest::Approx(u.squaredNorm()).epsilon(1e-14));
}

TEST_CASE("sphere projection, gradient and retraction examples") {
  Sphere s(3);
  const Point x = e(3, 0);
  CHECK((s.proj(x, e(3, 0) + 2 * e(3, 1)) - 2 * e(3, 1)).norm() < 1e-15);
  CHECK((s.egrad2rgrad(x, e(3, 0) + e(3, 1)) - e(3, 1)).norm() < 1e-15);
  CHECK((s.retract(x, e(3, 1)) - (e(3, 0) + e(3, 1)) / std::sqrt(2.0)).norm() <
        1e-15);

  Sphere sx(3, RetractionKind::Exponential);
  CHECK((sx.retract(x, std::numbers::pi / 2 * e(3, 1)) - e(3, 1)).norm() <
        1e-15);
}

TEST_CASE("stiefel retraction at zero and projection tangency") {
  Stiefel st(7, 3);
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    const Point x = st.rand_point(rng);
    CHECK((st.retract(x, st.zero_tangent()) - x).norm() < 1e-14);
    const Tangent s = st.proj(x, randn(7, 3, rng));
    CHECK((x.transpose() * s + s.transpose() * x).norm() < 1e-12);
  }
}

TEST_CASE("qr_positive convention") {
  Rng rng(4);
  const Matrix a = randn(6, 3, rng);
  const ThinQr qr = qr_positive(a);
  CHECK((qr.q * qr.r - a).norm() < 1e-12);
  CHECK((qr.q.transpose() * qr.q - Matrix::Identity(3, 3)).norm() < 1e-12);
  for (int i = 0; i < 3; ++i) CHECK(qr.r(i, i) > 0.0);
  Matrix rank_deficient = a;
  rank_deficient.col(2) = rank_deficient.col(0);
  CHECK_THROWS_AS(qr_positive(rank_deficient), DegenerateInputError);
}

TEST_CASE("retraction axioms on every manifold") {
  Rng rng(5);
  for (const auto &m : testing::sample_manifolds()) {
    CAPTURE(m->name());
    for (int i = 0; i < 5; ++i) {
      const Point x = m->rand_point(rng);
      CHECK(m->check_point(x, 1e-12));
      const Tangent z = m->rand_tangent(x, rng);
      CHECK(m->check_tangent(x, z, 1e-12));
      CHECK(m->norm(x, z) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK((m->retract(x, m->zero_tangent()) - x).norm() <= 1e-12);
      CHECK((m->dretract(x, m->zero_tangent(), z) - z).norm() <= 1e-10);
      const Tangent s = 0.3 * m->rand_tangent(x, rng);
      CHECK(m->check_point(m->retract(x, s), 1e-10));
    }
  }
}

TEST_CASE("rand_point and rand_tangent are deterministic per seed") {
  for (const auto &m : testing::sample_manifolds()) {
    Rng a(77), b(77);
    const Point xa = m->rand_point(a);
    const Point xb = m->rand_point(b);
    CHECK(xa == xb);
    CHECK(m->rand_tangent(xa, a) == m->rand_tangent(xb, b));
  }
}

TEST_CASE("tangency closure of projection, gradient, hessian and dretract") {
  Rng rng(6);
  for (const auto &m : testing::sample_manifolds()) {
    CAPTURE(m->name());
    const Shape sh = m->shape();
    for (int i = 0; i < 3; ++i) {
      const Point x = m->rand_point(rng);
      const Matrix z = randn(sh.rows, sh.cols, rng);
      const Matrix eh = randn(sh.rows, sh.cols, rng);
      const Tangent s = m->rand_tangent(x, rng);
      const Tangent p = m->proj(x, z);
      CHECK(m->check_tangent(x, p, 1e-10));
      CHECK((m->proj(x, p) - p).norm() < 1e-12);
      CHECK(m->check_tangent(x, m->egrad2rgrad(x, z), 1e-10));
      CHECK(m->check_tangent(x, m->ehess2rhess(x, z, eh, s), 1e-10));
      const Tangent t = 0.5 * m->rand_tangent(x, rng);
      CHECK(m->check_tangent(m->retract(x, t), m->dretract(x, t, s), 1e-10));
    }
  }
}

TEST_CASE("projection is self-adjoint") {
  Rng rng(7);
  for (const auto &m : testing::sample_manifolds()) {
    const Shape sh = m->shape();
    const Point x = m->rand_point(rng);
    const Matrix a = randn(sh.rows, sh.cols, rng);
    const Matrix b = randn(sh.rows, sh.cols, rng);
    CHECK(frob(m->proj(x, a), b) ==
          doctest::Approx(frob(a, m->proj(x, b))).epsilon(1e-12));
  }
}

TEST_CASE("egrad2rgrad represents the ambient gradient on tangent vectors") {
  Rng rng(8);
  for (const auto &m : testing::sample_manifolds()) {
    CAPTURE(m->name());
    const Shape sh = m->shape();
    const Point x = m->rand_point(rng);
    const Matrix eg = randn(sh.rows, sh.cols, rng);
    for (int i = 0; i < 3; ++i) {
      const Tangent v = m->rand_tangent(x, rng);
      CHECK(m->inner(x, m->egrad2rgrad(x, eg), v) ==
            doctest::Approx(frob(eg, v)).epsilon(1e-12));
    }
  }
}

TEST_CASE("riemannian hessian is self-adjoint") {
  Rng rng(9);
  for (const auto &m : testing::sample_manifolds()) {
    CAPTURE(m->name());
    const Problem prob = testing::random_quadratic(*m, rng);
    const Point x = m->rand_point(rng);
    const Matrix eg = prob.egrad(x);
    for (int i = 0; i < 3; ++i) {
      const Tangent u = m->rand_tangent(x, rng);
      const Tangent v = m->rand_tangent(x, rng);
      const Tangent hu = m->ehess2rhess(x, eg, prob.ehessvec(x, u), u);
      const Tangent hv = m->ehess2rhess(x, eg, prob.ehessvec(x, v), v);
      CHECK(std::abs(m->inner(x, u, hv) - m->inner(x, v, hu)) <= 1e-10);
    }
  }
}

TEST_CASE("sphere hessian matches second derivative of the pullback") {
  Rng rng(10);
  const Eigen::Index n = 8;
  Sphere s(n);
  const Matrix a = testing::rand_sym(n, rng);
  const Vector x = s.rand_point(rng);
  auto f = [&](const Point &p) { return 0.5 * frob(p, a * p); };
  for (int i = 0; i < 5; ++i) {
    const Vector v = s.rand_tangent(x, rng);
    const Vector hv = s.proj(x, a * v) - x.dot(a * x) * v;
    const Tangent lib = s.ehess2rhess(x, a * x, a * v, v);
    CHECK((lib - hv).norm() < 1e-12);
    const double h = 1e-4;
    const double fd =
        (f(s.retract(x, h * v)) - 2 * f(x) + f(s.retract(x, -h * v))) / (h * h);
    CHECK(std::abs(fd - v.dot(hv)) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("pullback hessian matches second differences on every manifold") {
  Rng rng(11);
  for (const auto &m : testing::sample_manifolds()) {
    CAPTURE(m->name());
    const Problem prob = testing::random_quadratic(*m, rng);
    const Point x = m->rand_point(rng);
    const Matrix eg = prob.egrad(x);
    const Tangent v = m->rand_tangent(x, rng);
    const double quad =
        m->inner(x, v, m->ehess2pullback(x, eg, prob.ehessvec(x, v), v));
    const double h = 1e-4;
    const double fd = (prob.cost(m->retract(x, h * v)) - 2 * prob.cost(x) +
                       prob.cost(m->retract(x, -h * v))) /
                      (h * h);
    CHECK(std::abs(fd - quad) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("dretract matches central differences of the retraction") {
  Rng rng(12);
  const std::vector<double> hs = {1e-2, 3e-3, 1e-3, 3e-4};
  for (const auto &m : testing::sample_manifolds()) {
    if (m->dretract_kind() != DRetractKind::ClosedForm) continue;
    CAPTURE(m->name());
    const Point x = m->rand_point(rng);
    const Tangent s = 0.7 * m->rand_tangent(x, rng);
    const Tangent z = m->rand_tangent(x, rng);
    const Tangent dz = m->dretract(x, s, z);
    const Point y = m->retract(x, s);
    std::vector<double> err;
    for (double h : hs) {
      // The projection drops the vertical part on quotients.
      const Matrix fd = m->proj(
          y, (m->retract(x, s + h * z) - m->retract(x, s - h * z)) / (2 * h));
      err.push_back((fd - dz).norm());
    }
    if (err.front() < 1e-13) continue;  // flat manifolds: exact
    const double slope = testing::loglog_slope(hs, err);
    CHECK(slope >= 1.7);
    CHECK(slope <= 2.3);
  }
}

TEST_CASE("dretract adjoint is the adjoint of dretract") {
  Rng rng(13);
  for (const auto &m : testing::sample_manifolds()) {
    CAPTURE(m->name());
    const Point x = m->rand_point(rng);
    const Tangent s = 0.5 * m->rand_tangent(x, rng);
    const Point y = m->retract(x, s);
    const Tangent z = m->rand_tangent(x, rng);
    const Tangent w = m->rand_tangent(y, rng);
    CHECK(m->inner(y, m->dretract(x, s, z), w) ==
          doctest::Approx(m->inner(x, z, m->dretract_adjoint(x, s, w)))
              .epsilon(1e-9));
  }
}

TEST_CASE("sphere sigma_min of dretract equals 1 / (1 + |s|^2)") {
  Rng rng(14);
  Sphere s(5);
  for (double a : {0.1, 1.0, 10.0}) {
    const Point x = s.rand_point(rng);
    const Tangent t = a * s.rand_tangent(x, rng);
    const Vector sv = testing::fd_dr_singular_values(s, x, t, 1e-7 * a);
    CHECK(sv.minCoeff() == doctest::Approx(1.0 / (1.0 + a * a)).epsilon(1e-6));
    // Exact closed form of the library operator, independent basis.
    const Matrix b0 = testing::own_tangent_basis(s, x);
    const Matrix b1 = testing::own_tangent_basis(s, s.retract(x, t));
    Matrix op(b1.cols(), b0.cols());
    for (Eigen::Index i = 0; i < b0.cols(); ++i) {
      op.col(i) = b1.transpose() * vec(s.dretract(x, t, unvec(b0.col(i), {5, 1})));
    }
    const double smin = Eigen::JacobiSVD<Matrix>(op).singularValues().minCoeff();
    CHECK(std::abs(smin - 1.0 / (1.0 + a * a)) <= 1e-8);
  }
  const Point x = e(5, 0);
  const Tangent t = e(5, 1);
  CHECK(testing::fd_dr_singular_values(s, x, t).minCoeff() ==
        doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("stiefel sigma_min lower bound") {
  Rng rng(15);
  Stiefel st(5, 2);
  for (double a : {0.05, 0.1, 0.2}) {
    for (int i = 0; i < 20; ++i) {
      const Point x = st.rand_point(rng);
      const Tangent t = a * st.rand_tangent(x, rng);
      const double smin = testing::fd_dr_singular_values(st, x, t).minCoeff();
      CHECK(smin >= 1.0 - 3 * a - 0.5 * a * a - 1e-8);
    }
  }
  const Point x = st.rand_point(rng);
  CHECK(testing::fd_dr_singular_values(st, x, 0.1 * st.rand_tangent(x, rng))
            .minCoeff() >= 0.695);
}

TEST_CASE("sphere exponential sigma_min lower bound") {
  Rng rng(16);
  Sphere s(4, RetractionKind::Exponential);
  for (double a : {0.3, 1.0, 2.0, 3.0}) {
    const Point x = s.rand_point(rng);
    const Tangent t = a * s.rand_tangent(x, rng);
    CHECK(testing::fd_dr_singular_values(s, x, t).minCoeff() >=
          std::sin(a) / a - 1e-7);
  }
}

TEST_CASE("product manifold composes its factors") {
  auto a = std::make_shared<Sphere>(4);
  auto b = std::make_shared<Stiefel>(5, 2);
  ProductManifold p({a, b});
  CHECK(p.dim() == a->dim() + b->dim());
  Rng rng(17);
  const Point x = p.rand_point(rng);
  const Tangent u = p.rand_tangent(x, rng);
  const Tangent v = p.rand_tangent(x, rng);
  double expected = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    expected += p.factor(i).inner(p.part(x, i), p.part(u, i), p.part(v, i));
  }
  CHECK(p.inner(x, u, v) == doctest::Approx(expected).epsilon(1e-14));
  const Point y = p.retract(x, u);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK((p.part(y, i) - p.factor(i).retract(p.part(x, i), p.part(u, i)))
              .norm() < 1e-14);
  }
}

TEST_CASE("rotation retraction keeps det = +1") {
  Rng rng(18);
  for (auto kind : {RetractionKind::Canonical, RetractionKind::Exponential}) {
    SpecialOrthogonal so(3, kind);
    for (int i = 0; i < 10; ++i) {
      const Point x = so.rand_point(rng);
      const Point y = so.retract(x, 2.0 * so.rand_tangent(x, rng));
      CHECK(y.determinant() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(so.check_point(y));
    }
  }
}
