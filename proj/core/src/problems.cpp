#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "rarc/problems.hpp"

namespace rarc {

namespace {

// Nearest rotation: U diag(1, .., det(U V^T)) V^T from the SVD of M.
Matrix project_so(const Matrix &m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix u = svd.matrixU();
  const Matrix v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    u.col(u.cols() - 1) *= -1.0;
  }
  return u * v.transpose();
}

bool connected(int n, const std::vector<std::pair<int, int>> &edges) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  int components = n;
  for (auto [i, j] : edges) {
    const int a = find(i);
    const int b = find(j);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components <= 1;
}

}  // namespace

// ---------------------------------------------------------------- Rayleigh

RayleighInstance make_rayleigh(const Matrix &a, RetractionKind kind) {
  if (a.rows() != a.cols() || a.rows() < 2) {
    throw ArgumentError("make_rayleigh: need a square matrix of size >= 2");
  }
  RayleighInstance inst;
  inst.a = sym(a);
  inst.manifold = std::make_shared<Sphere>(a.rows(), kind);
  const auto am = std::make_shared<const Matrix>(inst.a);
  inst.problem.name = "rayleigh";
  inst.problem.cost = [am](const Point &x) {
    return -0.5 * x.col(0).dot(*am * x.col(0));
  };
  inst.problem.egrad = [am](const Point &x) -> Matrix { return -(*am * x); };
  inst.problem.ehessvec = [am](const Point &, const Tangent &s) -> Matrix {
    return -(*am * s);
  };
  Eigen::SelfAdjointEigenSolver<Matrix> es(inst.a, Eigen::EigenvaluesOnly);
  inst.optimal_cost = -0.5 * es.eigenvalues()(a.rows() - 1);
  inst.problem.f_low = inst.optimal_cost;
  inst.x0 = Matrix::Constant(a.rows(), 1, 1.0 / std::sqrt(double(a.rows())));
  return inst;
}

RayleighInstance make_rayleigh(Eigen::Index n, Rng &rng, RetractionKind kind) {
  RayleighInstance inst = make_rayleigh(sym(randn(n, n, rng)), kind);
  inst.x0 = inst.manifold->rand_point(rng);
  return inst;
}

// ------------------------------------------------------ invariant subspace

InvariantSubspaceInstance make_invariant_subspace(Eigen::Index n,
                                                  Eigen::Index p, Rng &rng) {
  if (p < 1 || p >= n) {
    throw ArgumentError("make_invariant_subspace: need 1 <= p < n");
  }
  InvariantSubspaceInstance inst;
  inst.a = sym(randn(n, n, rng));
  inst.manifold = std::make_shared<Grassmann>(n, p);
  const auto am = std::make_shared<const Matrix>(inst.a);
  inst.problem.name = "invariant_subspace";
  inst.problem.cost = [am](const Point &x) {
    return -0.5 * frob(x, *am * x);
  };
  inst.problem.egrad = [am](const Point &x) -> Matrix { return -(*am * x); };
  inst.problem.ehessvec = [am](const Point &, const Tangent &s) -> Matrix {
    return -(*am * s);
  };
  Eigen::SelfAdjointEigenSolver<Matrix> es(inst.a);
  inst.eigvecs = es.eigenvectors().rightCols(p);
  inst.optimal_cost = -0.5 * es.eigenvalues().tail(p).sum();
  inst.problem.f_low = inst.optimal_cost;
  inst.x0 = inst.manifold->rand_point(rng);
  return inst;
}

// ----------------------------------------------------------- truncated SVD

double truncated_svd_cost(const Matrix &a, const Vector &weights,
                          const Matrix &u, const Matrix &v) {
  return -frob(u, a * v * weights.asDiagonal());
}

TruncatedSvdInstance make_truncated_svd(Eigen::Index m, Eigen::Index n,
                                        Eigen::Index p, Rng &rng) {
  if (p < 1 || p > std::min(m, n)) {
    throw ArgumentError("make_truncated_svd: need 1 <= p <= min(m, n)");
  }
  TruncatedSvdInstance inst;
  inst.a = randn(m, n, rng);
  inst.weights = Vector::LinSpaced(p, double(p), 1.0);
  auto prod = std::make_shared<ProductManifold>(std::vector<ManifoldPtr>{
      std::make_shared<Stiefel>(m, p), std::make_shared<Stiefel>(n, p)});
  inst.manifold = prod;
  const auto am = std::make_shared<const Matrix>(inst.a);
  const Vector w = inst.weights;
  inst.problem.name = "truncated_svd";
  inst.problem.cost = [prod, am, w](const Point &x) {
    return truncated_svd_cost(*am, w, prod->part(x, 0), prod->part(x, 1));
  };
  inst.problem.egrad = [prod, am, w](const Point &x) {
    const Matrix u = prod->part(x, 0);
    const Matrix v = prod->part(x, 1);
    return prod->assemble({-(*am * v * w.asDiagonal()),
                           -(am->transpose() * u * w.asDiagonal())});
  };
  inst.problem.ehessvec = [prod, am, w](const Point &, const Tangent &s) {
    const Matrix su = prod->part(s, 0);
    const Matrix sv = prod->part(s, 1);
    return prod->assemble({-(*am * sv * w.asDiagonal()),
                           -(am->transpose() * su * w.asDiagonal())});
  };
  Eigen::JacobiSVD<Matrix> svd(inst.a);
  inst.optimal_cost = -inst.weights.dot(svd.singularValues().head(p));
  inst.problem.f_low = inst.optimal_cost;
  inst.x0 = inst.manifold->rand_point(rng);
  return inst;
}

// ------------------------------------------------------- matrix completion

namespace {

// Per-point factorizations shared by cost, gradient and Hessian calls.
class CompletionCache {
 public:
  CompletionCache(Matrix a, std::vector<std::vector<int>> rows, Eigen::Index r)
      : a_(std::move(a)), rows_(std::move(rows)), r_(r) {}

  struct State {
    Point u;
    std::vector<Eigen::LLT<Matrix>> llt;
    std::vector<Matrix> uj;
    Matrix w;
    /// Residual U W - A on observed entries, zero elsewhere.
    Matrix res;
    double cost = 0.0;
  };

  template <typename F>
  auto with(const Point &u, F &&f) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!valid_ || state_.u.rows() != u.rows() || state_.u != u) refresh(u);
    return f(state_);
  }

  const std::vector<std::vector<int>> &rows() const { return rows_; }

 private:
  void refresh(const Point &u) {
    const Eigen::Index n = a_.cols();
    state_.u = u;
    state_.llt.assign(n, Eigen::LLT<Matrix>());
    state_.uj.assign(n, Matrix());
    state_.w.resize(r_, n);
    state_.res = Matrix::Zero(a_.rows(), n);
    state_.cost = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto &rj = rows_[j];
      Matrix uj(static_cast<Eigen::Index>(rj.size()), r_);
      Vector aj(static_cast<Eigen::Index>(rj.size()));
      for (std::size_t t = 0; t < rj.size(); ++t) {
        uj.row(t) = u.row(rj[t]);
        aj(t) = a_(rj[t], j);
      }
      state_.llt[j].compute(uj.transpose() * uj);
      state_.w.col(j) = state_.llt[j].solve(uj.transpose() * aj);
      const Vector rjv = uj * state_.w.col(j) - aj;
      for (std::size_t t = 0; t < rj.size(); ++t) {
        state_.res(rj[t], j) = rjv(t);
      }
      state_.cost += 0.5 * rjv.squaredNorm();
      state_.uj[j] = std::move(uj);
    }
    valid_ = true;
  }

  Matrix a_;
  std::vector<std::vector<int>> rows_;
  Eigen::Index r_;
  std::mutex mu_;
  bool valid_ = false;
  State state_;
};

}  // namespace

MatrixCompletionInstance make_matrix_completion(Eigen::Index m, Eigen::Index n,
                                                Eigen::Index r, double osf,
                                                Rng &rng) {
  if (r < 1 || r >= m || r > n) {
    throw ArgumentError("make_matrix_completion: need 1 <= r < m, r <= n");
  }
  const double dof = double(r) * double(m + n - r);
  const auto count = static_cast<Eigen::Index>(std::llround(osf * dof));
  if (!(osf > 0.0) || count > m * n) {
    throw ArgumentError("make_matrix_completion: osf r (m + n - r) > m n");
  }
  MatrixCompletionInstance inst;
  inst.rank = r;
  inst.a = randn(m, r, rng) * randn(n, r, rng).transpose();

  std::vector<std::vector<int>> rows;
  bool ok = false;
  for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(m * n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    // Partial Fisher-Yates: the first `count` entries are the sample.
    for (Eigen::Index t = 0; t < count; ++t) {
      std::uniform_int_distribution<Eigen::Index> pick(t, m * n - 1);
      std::swap(idx[t], idx[pick(rng)]);
    }
    inst.mask = Eigen::MatrixXi::Zero(m, n);
    for (Eigen::Index t = 0; t < count; ++t) {
      inst.mask(idx[t] % m, idx[t] / m) = 1;
    }
    ok = (inst.mask.colwise().sum().array() >= r).all();
  }
  if (!ok) {
    throw ArgumentError(
        "make_matrix_completion: a column has fewer than r observed entries");
  }
  rows.assign(static_cast<std::size_t>(n), {});
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      if (inst.mask(i, j)) rows[j].push_back(static_cast<int>(i));
    }
  }

  auto cache = std::make_shared<CompletionCache>(inst.a, rows, r);
  inst.manifold = std::make_shared<Grassmann>(m, r);
  inst.problem.name = "matrix_completion";
  inst.problem.notes = "exact Hessian through the least-squares coefficients";
  inst.problem.f_low = 0.0;
  inst.problem.cost = [cache](const Point &u) {
    return cache->with(u, [](const CompletionCache::State &s) { return s.cost; });
  };
  inst.problem.egrad = [cache](const Point &u) {
    return cache->with(u, [](const CompletionCache::State &s) -> Matrix {
      return s.res * s.w.transpose();
    });
  };
  inst.problem.ehessvec = [cache](const Point &u, const Tangent &du) {
    const auto &rows = cache->rows();
    return cache->with(u, [&](const CompletionCache::State &s) -> Matrix {
      const Eigen::Index n = s.w.cols();
      Matrix dw(s.w.rows(), n);
      Matrix dres = Matrix::Zero(s.res.rows(), n);
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto &rj = rows[j];
        const Eigen::Index k = static_cast<Eigen::Index>(rj.size());
        Matrix duj(k, s.w.rows());
        Vector resj(k);
        for (Eigen::Index t = 0; t < k; ++t) {
          duj.row(t) = du.row(rj[t]);
          resj(t) = s.res(rj[t], j);
        }
        const Vector wj = s.w.col(j);
        dw.col(j) = -s.llt[j].solve(duj.transpose() * resj +
                                    s.uj[j].transpose() * (duj * wj));
        const Vector dr = duj * wj + s.uj[j] * dw.col(j);
        for (Eigen::Index t = 0; t < k; ++t) dres(rj[t], j) = dr(t);
      }
      return dres * s.w.transpose() + s.res * dw.transpose();
    });
  };
  inst.x0 = inst.manifold->rand_point(rng);
  return inst;
}

Matrix completion_coefficients(const MatrixCompletionInstance &inst,
                               const Matrix &u) {
  const Eigen::Index n = inst.a.cols();
  Matrix w(u.cols(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<int> rj;
    for (Eigen::Index i = 0; i < inst.a.rows(); ++i) {
      if (inst.mask(i, j)) rj.push_back(static_cast<int>(i));
    }
    Matrix uj(static_cast<Eigen::Index>(rj.size()), u.cols());
    Vector aj(static_cast<Eigen::Index>(rj.size()));
    for (std::size_t t = 0; t < rj.size(); ++t) {
      uj.row(t) = u.row(rj[t]);
      aj(t) = inst.a(rj[t], j);
    }
    w.col(j) = uj.colPivHouseholderQr().solve(aj);
  }
  return w;
}

double completion_heldout_rmse(const MatrixCompletionInstance &inst,
                               const Matrix &u) {
  const Matrix est = u * completion_coefficients(inst, u);
  double sum = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index j = 0; j < inst.a.cols(); ++j) {
    for (Eigen::Index i = 0; i < inst.a.rows(); ++i) {
      if (inst.mask(i, j)) continue;
      const double e = est(i, j) - inst.a(i, j);
      sum += e * e;
      ++count;
    }
  }
  return count == 0 ? 0.0 : std::sqrt(sum / double(count));
}

// ------------------------------------------------------------------ graphs

std::vector<std::pair<int, int>> connected_random_edges(int n,
                                                        double edge_prob,
                                                        Rng &rng) {
  if (n < 1) throw ArgumentError("connected_random_edges: need n >= 1");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) {
    throw ArgumentError("connected_random_edges: edge_prob outside [0, 1]");
  }
  std::bernoulli_distribution coin(edge_prob);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (coin(rng)) edges.emplace_back(i, j);
      }
    }
    if (connected(n, edges)) return edges;
  }
  throw ArgumentError("connected_random_edges: graph is disconnected");
}

GsetGraph random_graph(int n, double edge_prob, Rng &rng) {
  if (n < 1) throw ArgumentError("random_graph: need n >= 1");
  std::bernoulli_distribution coin(edge_prob);
  GsetGraph g;
  g.n = n;
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      if (coin(rng)) g.edges.push_back({i, j, 1.0});
    }
  }
  return g;
}

// ----------------------------------------------------------------- max-cut

MaxCutInstance make_maxcut(const GsetGraph &graph, Eigen::Index p, Rng &rng) {
  const int n = graph.n;
  if (n < 1) throw ArgumentError("make_maxcut: empty graph");
  if (p <= 0) p = static_cast<Eigen::Index>(std::ceil(std::sqrt(2.0 * n)));
  if (p < 2) throw ArgumentError("make_maxcut: need p >= 2");
  MaxCutInstance inst;
  inst.graph = graph;
  inst.rank = p;
  std::vector<Eigen::Triplet<double>> trip;
  double total = 0.0;
  for (const GsetEdge &e : graph.edges) {
    if (e.i < 1 || e.j < 1 || e.i > n || e.j > n || e.i == e.j) {
      throw ArgumentError("make_maxcut: invalid edge");
    }
    trip.emplace_back(e.i - 1, e.j - 1, e.w);
    trip.emplace_back(e.j - 1, e.i - 1, e.w);
    total += std::abs(e.w);
  }
  auto adj = std::make_shared<Eigen::SparseMatrix<double>>(n, n);
  adj->setFromTriplets(trip.begin(), trip.end());
  inst.manifold = std::make_shared<Oblique>(n, p);
  inst.problem.name = "maxcut";
  inst.problem.f_low = -total;
  inst.problem.cost = [adj](const Point &x) {
    return 0.5 * frob(x, *adj * x);
  };
  inst.problem.egrad = [adj](const Point &x) -> Matrix { return *adj * x; };
  inst.problem.ehessvec = [adj](const Point &, const Tangent &s) -> Matrix {
    return *adj * s;
  };
  inst.x0 = inst.manifold->rand_point(rng);
  return inst;
}

// ---------------------------------------------------- rotation synchronization

RotationSyncInstance make_rotation_sync(int m, int d, double edge_prob,
                                        double noise, Rng &rng) {
  if (d != 2 && d != 3) throw ArgumentError("make_rotation_sync: d must be 2 or 3");
  if (m < 1) throw ArgumentError("make_rotation_sync: need m >= 1");
  if (!(noise >= 0.0)) throw ArgumentError("make_rotation_sync: noise < 0");
  RotationSyncInstance inst;
  auto so = std::make_shared<SpecialOrthogonal>(d);
  auto prod = ProductManifold::power(so, static_cast<std::size_t>(m));
  inst.manifold = prod;
  for (int i = 0; i < m; ++i) inst.truth.push_back(so->rand_point(rng));
  inst.edges = connected_random_edges(m, edge_prob, rng);
  for (auto [i, j] : inst.edges) {
    Matrix h = inst.truth[i] * inst.truth[j].transpose();
    if (noise > 0.0) h = h * (noise * skew(randn(d, d, rng))).exp();
    inst.measurements.push_back(h);
  }
  const auto edges = std::make_shared<const std::vector<std::pair<int, int>>>(
      inst.edges);
  const auto meas = std::make_shared<const std::vector<Matrix>>(
      inst.measurements);
  inst.problem.name = "rotation_sync";
  inst.problem.notes = "least-squares cost";
  inst.problem.f_low = 0.0;
  inst.problem.cost = [prod, edges, meas](const Point &x) {
    double c = 0.0;
    for (std::size_t e = 0; e < edges->size(); ++e) {
      const auto [i, j] = (*edges)[e];
      c += 0.5 * (prod->part(x, i) * prod->part(x, j).transpose() -
                  (*meas)[e]).squaredNorm();
    }
    return c;
  };
  inst.problem.egrad = [prod, edges, meas](const Point &x) {
    Matrix g = Matrix::Zero(x.rows(), 1);
    for (std::size_t e = 0; e < edges->size(); ++e) {
      const auto [i, j] = (*edges)[e];
      const Matrix qi = prod->part(x, i);
      const Matrix qj = prod->part(x, j);
      const Matrix r = qi * qj.transpose() - (*meas)[e];
      prod->set_part(g, i, prod->part(g, i) + r * qj);
      prod->set_part(g, j, prod->part(g, j) + r.transpose() * qi);
    }
    return g;
  };
  inst.problem.ehessvec = [prod, edges, meas](const Point &x,
                                              const Tangent &s) {
    Matrix h = Matrix::Zero(x.rows(), 1);
    for (std::size_t e = 0; e < edges->size(); ++e) {
      const auto [i, j] = (*edges)[e];
      const Matrix qi = prod->part(x, i);
      const Matrix qj = prod->part(x, j);
      const Matrix si = prod->part(s, i);
      const Matrix sj = prod->part(s, j);
      const Matrix r = qi * qj.transpose() - (*meas)[e];
      const Matrix dr = si * qj.transpose() + qi * sj.transpose();
      prod->set_part(h, i, prod->part(h, i) + dr * qj + r * sj);
      prod->set_part(h, j, prod->part(h, j) + dr.transpose() * qi +
                               r.transpose() * si);
    }
    return h;
  };
  inst.x0 = rotation_sync_spectral_init(inst);
  return inst;
}

Point rotation_sync_spectral_init(const RotationSyncInstance &inst) {
  const auto &prod = static_cast<const ProductManifold &>(*inst.manifold);
  const int m = static_cast<int>(prod.num_factors());
  const Eigen::Index d = prod.factor(0).shape().rows;
  Matrix big = Matrix::Identity(m * d, m * d);
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    const auto [i, j] = inst.edges[e];
    big.block(i * d, j * d, d, d) = inst.measurements[e];
    big.block(j * d, i * d, d, d) = inst.measurements[e].transpose();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(big);
  Matrix v = es.eigenvectors().rightCols(d);
  double detsum = 0.0;
  for (int i = 0; i < m; ++i) detsum += v.block(i * d, 0, d, d).determinant();
  if (detsum < 0.0) v.col(0) *= -1.0;
  std::vector<Matrix> parts;
  for (int i = 0; i < m; ++i) parts.push_back(project_so(v.block(i * d, 0, d, d)));
  return prod.assemble(parts);
}

double rotation_alignment_error(const RotationSyncInstance &inst,
                                const Point &x) {
  const auto &prod = static_cast<const ProductManifold &>(*inst.manifold);
  const Eigen::Index d = prod.factor(0).shape().rows;
  Matrix acc = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < inst.truth.size(); ++i) {
    acc += prod.part(x, i).transpose() * inst.truth[i];
  }
  const Matrix g = project_so(acc);
  double err = 0.0;
  for (std::size_t i = 0; i < inst.truth.size(); ++i) {
    err = std::max(err, (prod.part(x, i) * g - inst.truth[i]).norm());
  }
  return err;
}

// ---------------------------------------------------------------- ShapeFit

ShapeFitInstance make_shapefit(int n, int d, double edge_prob, Rng &rng) {
  if (n < 2 || d < 1) throw ArgumentError("make_shapefit: need n >= 2, d >= 1");
  ShapeFitInstance inst;
  inst.points = randn(d, n, rng);
  inst.edges = connected_random_edges(n, edge_prob, rng);
  const Eigen::Index ne = static_cast<Eigen::Index>(inst.edges.size());
  inst.directions.resize(d, ne);
  double scale = 0.0;
  for (Eigen::Index e = 0; e < ne; ++e) {
    const auto [i, j] = inst.edges[e];
    const Vector diff = inst.points.col(i) - inst.points.col(j);
    scale += diff.norm();
    inst.directions.col(e) = diff.normalized();
  }
  const Vector centre = inst.points.rowwise().mean();
  inst.scaled_truth = (inst.points.colwise() - centre) / scale;

  Matrix c = Matrix::Zero(d + 1, Eigen::Index(d) * n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) c(k, k + d * i) = 1.0;
  }
  for (Eigen::Index e = 0; e < ne; ++e) {
    const auto [i, j] = inst.edges[e];
    for (int k = 0; k < d; ++k) {
      c(d, k + d * i) += inst.directions(k, e);
      c(d, k + d * j) -= inst.directions(k, e);
    }
  }
  Vector rhs = Vector::Zero(d + 1);
  rhs(d) = 1.0;
  inst.manifold =
      std::make_shared<AffineSubspace>(Shape{d, n}, std::move(c), std::move(rhs));

  const auto edges = std::make_shared<const std::vector<std::pair<int, int>>>(
      inst.edges);
  const auto dirs = std::make_shared<const Matrix>(inst.directions);
  // Gradient of the quadratic form; also its Hessian applied to y.
  auto apply = [edges, dirs](const Matrix &y) {
    Matrix g = Matrix::Zero(y.rows(), y.cols());
    for (std::size_t e = 0; e < edges->size(); ++e) {
      const auto [i, j] = (*edges)[e];
      const Vector v = dirs->col(Eigen::Index(e));
      const Vector diff = y.col(i) - y.col(j);
      const Vector w = diff - v * v.dot(diff);
      g.col(i) += 2.0 * w;
      g.col(j) -= 2.0 * w;
    }
    return g;
  };
  inst.problem.name = "shapefit";
  inst.problem.f_low = 0.0;
  inst.problem.cost = [edges, dirs](const Point &y) {
    double c = 0.0;
    for (std::size_t e = 0; e < edges->size(); ++e) {
      const auto [i, j] = (*edges)[e];
      const Vector v = dirs->col(Eigen::Index(e));
      const Vector diff = y.col(i) - y.col(j);
      c += (diff - v * v.dot(diff)).squaredNorm();
    }
    return c;
  };
  inst.problem.egrad = apply;
  inst.problem.ehessvec = [apply](const Point &, const Tangent &s) {
    return apply(s);
  };
  inst.x0 = inst.manifold->rand_point(rng);
  return inst;
}

}  // namespace rarc
