#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace rarc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A point on a manifold, stored in ambient coordinates.
using Point = Matrix;
/// A tangent vector, stored in the same ambient coordinates as its base point.
using Tangent = Matrix;

/// The RNG used everywhere. Callers own it; nothing in the library keeps one.
using Rng = std::mt19937_64;

struct Shape {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  friend bool operator==(const Shape &, const Shape &) = default;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an input makes a factorization non-unique (e.g. a QR with a
/// zero diagonal entry in R).
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string &what, double lo, double hi)
      : std::runtime_error(what), lo_(lo), hi_(hi) {}
  double bracket_lo() const { return lo_; }
  double bracket_hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string &what, int line)
      : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Frobenius inner product of two equally shaped arrays.
inline double frob(const Matrix &a, const Matrix &b) {
  return (a.array() * b.array()).sum();
}

/// Matrix of i.i.d. standard normal entries.
Matrix randn(Eigen::Index rows, Eigen::Index cols, Rng &rng);

/// Symmetric part (A + A^T) / 2.
inline Matrix sym(const Matrix &a) { return 0.5 * (a + a.transpose()); }
/// Skew-symmetric part (A - A^T) / 2.
inline Matrix skew(const Matrix &a) { return 0.5 * (a - a.transpose()); }

/// Strictly lower triangular part.
Matrix strict_lower(const Matrix &a);

/// Thin QR factorization with R having a strictly positive diagonal. Throws
/// DegenerateInputError when A does not have full column rank.
struct ThinQr {
  Matrix q;
  Matrix r;
};
ThinQr qr_positive(const Matrix &a);

}  // namespace rarc
