#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rarc/problem.hpp"

namespace rarc {

/// A generated benchmark: manifold, cost, and a suggested initial point.
struct Instance {
  ManifoldPtr manifold;
  Problem problem;
  Point x0;
};

/// min -1/2 x^T A x on the sphere with A = (G + G^T)/2.
struct RayleighInstance : Instance {
  Matrix a;
  /// -lambda_max(A) / 2.
  double optimal_cost = 0.0;
};
RayleighInstance make_rayleigh(const Matrix &a,
                               RetractionKind kind = RetractionKind::Canonical);
RayleighInstance make_rayleigh(Eigen::Index n, Rng &rng,
                               RetractionKind kind = RetractionKind::Canonical);

/// min -1/2 tr(X^T A X) on Gr(n, p).
struct InvariantSubspaceInstance : Instance {
  Matrix a;
  /// Top-p eigenvectors of A.
  Matrix eigvecs;
  double optimal_cost = 0.0;
};
InvariantSubspaceInstance make_invariant_subspace(Eigen::Index n,
                                                  Eigen::Index p, Rng &rng);

/// min -tr(U^T A V N) on St(m, p) x St(n, p) with N = diag(p, ..., 1).
struct TruncatedSvdInstance : Instance {
  Matrix a;
  Vector weights;
  double optimal_cost = 0.0;
};
TruncatedSvdInstance make_truncated_svd(Eigen::Index m, Eigen::Index n,
                                        Eigen::Index p, Rng &rng);
/// The cost -tr(U^T A V N) with N = diag(weights).
double truncated_svd_cost(const Matrix &a, const Vector &weights,
                          const Matrix &u, const Matrix &v);

/// min 1/2 |P_Omega(U W_U - A)|^2 on Gr(m, r), W_U the observed least-squares
/// fit of every column of A.
struct MatrixCompletionInstance : Instance {
  Matrix a;
  /// mask(i, j) = 1 iff entry (i, j) is observed.
  Eigen::MatrixXi mask;
  Eigen::Index rank = 0;
};
MatrixCompletionInstance make_matrix_completion(Eigen::Index m, Eigen::Index n,
                                                Eigen::Index r, double osf,
                                                Rng &rng);
/// W_U for the given instance: the r x n coefficients minimizing the observed
/// residual column by column.
Matrix completion_coefficients(const MatrixCompletionInstance &inst,
                               const Matrix &u);
/// RMSE of U W_U against A over the unobserved entries.
double completion_heldout_rmse(const MatrixCompletionInstance &inst,
                               const Matrix &u);

struct GsetEdge {
  int i = 0;
  int j = 0;
  double w = 0.0;
  friend bool operator==(const GsetEdge &, const GsetEdge &) = default;
};

/// Weighted undirected graph in the Gset convention (1-indexed, i < j).
struct GsetGraph {
  int n = 0;
  std::vector<GsetEdge> edges;
  friend bool operator==(const GsetGraph &, const GsetGraph &) = default;
};

/// Parses "n m" followed by m lines "i j w". Throws ParseError carrying the
/// 1-based line number.
GsetGraph parse_gset(std::istream &in);
GsetGraph read_gset(const std::filesystem::path &path);
void write_gset(std::ostream &out, const GsetGraph &g);
void write_gset(const std::filesystem::path &path, const GsetGraph &g);

/// Erdos-Renyi graph with unit weights.
GsetGraph random_graph(int n, double edge_prob, Rng &rng);

/// min 1/2 tr(X^T A X) on OB(n, p), A the weighted adjacency matrix.
struct MaxCutInstance : Instance {
  GsetGraph graph;
  Eigen::Index rank = 0;
};
/// p <= 0 selects ceil(sqrt(2n)).
MaxCutInstance make_maxcut(const GsetGraph &graph, Eigen::Index p, Rng &rng);

/// min 1/2 sum_{(i,j) in E} |Q_i Q_j^T - H_ij|^2 on SO(d)^m.
struct RotationSyncInstance : Instance {
  std::vector<Matrix> truth;
  std::vector<std::pair<int, int>> edges;
  std::vector<Matrix> measurements;
};
/// x0 is the spectral initialization.
RotationSyncInstance make_rotation_sync(int m, int d, double edge_prob,
                                        double noise, Rng &rng);
/// Top-d eigenvectors of the measurement block matrix, each block projected
/// onto SO(d).
Point rotation_sync_spectral_init(const RotationSyncInstance &inst);
/// max_i |Q_i G - Q*_i|_F after the best global rotation G.
double rotation_alignment_error(const RotationSyncInstance &inst,
                                const Point &x);

/// min sum_{(i,j) in E} |P_{v_ij^perp}(y_i - y_j)|^2 over the centred
/// configurations Y (d x n) with sum_E <y_i - y_j, v_ij> = 1.
struct ShapeFitInstance : Instance {
  /// Ground-truth points, d x n.
  Matrix points;
  std::vector<std::pair<int, int>> edges;
  /// Unit directions, d x |E|.
  Matrix directions;
  /// Ground truth centred and scaled onto the constraint set.
  Matrix scaled_truth;
};
ShapeFitInstance make_shapefit(int n, int d, double edge_prob, Rng &rng);

/// Connected Erdos-Renyi edge list (i < j, 0-based), resampled up to 100
/// times; throws ArgumentError if no connected draw is found.
std::vector<std::pair<int, int>> connected_random_edges(int n,
                                                        double edge_prob,
                                                        Rng &rng);

}  // namespace rarc
