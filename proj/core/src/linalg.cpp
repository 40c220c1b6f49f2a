#include <cmath>

#include "rarc/common.hpp"

namespace rarc {

Matrix randn(Eigen::Index rows, Eigen::Index cols, Rng &rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix out(rows, cols);
  // Fill column by column so the stream order is fixed.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = gauss(rng);
  }
  return out;
}

Matrix strict_lower(const Matrix &a) {
  Matrix out = Matrix::Zero(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < a.rows(); ++i) out(i, j) = a(i, j);
  }
  return out;
}

ThinQr qr_positive(const Matrix &a) {
  const Eigen::Index n = a.rows();
  const Eigen::Index p = a.cols();
  if (p > n) throw ArgumentError("qr_positive: more columns than rows");
  Eigen::HouseholderQR<Matrix> qr(a);
  ThinQr out;
  out.q = qr.householderQ() * Matrix::Identity(n, p);
  out.r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, a.norm());
  for (Eigen::Index i = 0; i < p; ++i) {
    const double d = out.r(i, i);
    if (!(std::abs(d) > 1e-14 * scale)) {
      throw DegenerateInputError(
          "qr_positive: rank-deficient input (zero diagonal in R)");
    }
    if (d < 0) {
      out.q.col(i) *= -1.0;
      out.r.row(i) *= -1.0;
    }
  }
  return out;
}

}  // namespace rarc
