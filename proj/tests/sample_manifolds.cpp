#include "helpers.hpp"

namespace testing {

std::vector<ManifoldPtr> sample_manifolds() {
  Matrix c(2, 6);
  c << 1, 1, 1, 0, 0, 0,
       0, 1, 0, 2, 0, 1;
  Vector rhs(2);
  rhs << 0, 1;
  return {
      std::make_shared<Euclidean>(4, 2),
      std::make_shared<Sphere>(6),
      std::make_shared<Sphere>(6, RetractionKind::Exponential),
      std::make_shared<Stiefel>(6, 3),
      std::make_shared<Grassmann>(6, 2),
      std::make_shared<Oblique>(5, 3),
      std::make_shared<SpecialOrthogonal>(3),
      std::make_shared<SpecialOrthogonal>(3, RetractionKind::Exponential),
      std::make_shared<AffineSubspace>(Shape{3, 2}, c, rhs),
      std::make_shared<ProductManifold>(std::vector<ManifoldPtr>{
          std::make_shared<Stiefel>(5, 2), std::make_shared<Stiefel>(4, 2)}),
      ProductManifold::power(std::make_shared<SpecialOrthogonal>(3), 3),
  };
}

}  // namespace testing
