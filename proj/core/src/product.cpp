#include <algorithm>

#include "rarc/manifold.hpp"

namespace rarc {

ProductManifold::ProductManifold(std::vector<ManifoldPtr> factors)
    : factors_(std::move(factors)) {
  if (factors_.empty()) throw ArgumentError("ProductManifold: no factors");
  for (const auto &f : factors_) {
    if (!f) throw ArgumentError("ProductManifold: null factor");
    offsets_.push_back(total_);
    const Shape s = f->shape();
    total_ += s.rows * s.cols;
    dim_ += f->dim();
  }
}

std::shared_ptr<ProductManifold> ProductManifold::power(ManifoldPtr factor,
                                                        std::size_t m) {
  return std::make_shared<ProductManifold>(
      std::vector<ManifoldPtr>(m, std::move(factor)));
}

std::string ProductManifold::name() const {
  // Collapse runs of identical factors: SO(3)^20 rather than 20 names.
  std::string out;
  std::size_t i = 0;
  while (i < factors_.size()) {
    std::size_t j = i;
    while (j < factors_.size() && factors_[j] == factors_[i]) ++j;
    if (!out.empty()) out += " x ";
    out += factors_[i]->name();
    if (j - i > 1) out += "^" + std::to_string(j - i);
    i = j;
  }
  return out;
}

Matrix ProductManifold::part(const Matrix &x, std::size_t i) const {
  require_shape(x, "product array");
  const Shape s = factors_[i]->shape();
  return Eigen::Map<const Matrix>(x.data() + offsets_[i], s.rows, s.cols);
}

void ProductManifold::set_part(Matrix &x, std::size_t i,
                               const Matrix &value) const {
  require_shape(x, "product array");
  const Shape s = factors_[i]->shape();
  if (value.rows() != s.rows || value.cols() != s.cols) {
    throw ArgumentError("ProductManifold::set_part: shape mismatch");
  }
  Eigen::Map<Matrix>(x.data() + offsets_[i], s.rows, s.cols) = value;
}

Matrix ProductManifold::assemble(const std::vector<Matrix> &parts) const {
  if (parts.size() != factors_.size()) {
    throw ArgumentError("ProductManifold::assemble: wrong number of parts");
  }
  Matrix out(total_, 1);
  for (std::size_t i = 0; i < parts.size(); ++i) set_part(out, i, parts[i]);
  return out;
}

namespace {

template <typename F>
Matrix map_parts(const ProductManifold &m, F &&f) {
  std::vector<Matrix> parts;
  parts.reserve(m.num_factors());
  for (std::size_t i = 0; i < m.num_factors(); ++i) parts.push_back(f(i));
  return m.assemble(parts);
}

}  // namespace

Tangent ProductManifold::proj(const Point &x, const Matrix &z) const {
  return map_parts(*this, [&](std::size_t i) {
    return factors_[i]->proj(part(x, i), part(z, i));
  });
}

Point ProductManifold::retract(const Point &x, const Tangent &s) const {
  return map_parts(*this, [&](std::size_t i) {
    return factors_[i]->retract(part(x, i), part(s, i));
  });
}

Tangent ProductManifold::dretract(const Point &x, const Tangent &s,
                                  const Tangent &z) const {
  return map_parts(*this, [&](std::size_t i) {
    return factors_[i]->dretract(part(x, i), part(s, i), part(z, i));
  });
}

DRetractKind ProductManifold::dretract_kind() const {
  const bool all_closed =
      std::all_of(factors_.begin(), factors_.end(), [](const ManifoldPtr &f) {
        return f->dretract_kind() == DRetractKind::ClosedForm;
      });
  return all_closed ? DRetractKind::ClosedForm
                    : DRetractKind::FiniteDifference;
}

Tangent ProductManifold::dretract_adjoint(const Point &x, const Tangent &s,
                                          const Tangent &w) const {
  return map_parts(*this, [&](std::size_t i) {
    return factors_[i]->dretract_adjoint(part(x, i), part(s, i), part(w, i));
  });
}

Tangent ProductManifold::ehess2rhess(const Point &x, const Matrix &egrad,
                                     const Matrix &ehess,
                                     const Tangent &s) const {
  return map_parts(*this, [&](std::size_t i) {
    return factors_[i]->ehess2rhess(part(x, i), part(egrad, i),
                                    part(ehess, i), part(s, i));
  });
}

Tangent ProductManifold::pullback_hess_correction(const Point &x,
                                                  const Matrix &egrad,
                                                  const Tangent &s) const {
  return map_parts(*this, [&](std::size_t i) -> Matrix {
    const Manifold &f = *factors_[i];
    if (f.retraction_kind() != RetractionKind::Canonical) {
      return f.zero_tangent();
    }
    return f.pullback_hess_correction(part(x, i), part(egrad, i), part(s, i));
  });
}

Point ProductManifold::rand_point(Rng &rng) const {
  return map_parts(*this,
                   [&](std::size_t i) { return factors_[i]->rand_point(rng); });
}

bool ProductManifold::check_point(const Point &x, double tol) const {
  if (x.rows() != total_ || x.cols() != 1) return false;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (!factors_[i]->check_point(part(x, i), tol)) return false;
  }
  return true;
}

bool ProductManifold::check_tangent(const Point &x, const Tangent &v,
                                    double tol) const {
  if (v.rows() != total_ || v.cols() != 1) return false;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (!factors_[i]->check_tangent(part(x, i), part(v, i), tol)) return false;
  }
  return true;
}

Point ProductManifold::normalize(const Point &x) const {
  return map_parts(*this, [&](std::size_t i) {
    return factors_[i]->normalize(part(x, i));
  });
}

}  // namespace rarc
