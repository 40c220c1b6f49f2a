#include "rarc/problem.hpp"
#include "rarc/trace.hpp"

namespace rarc {

Tangent riemannian_grad(const Manifold &manifold, const Problem &problem,
                        const Point &x) {
  return manifold.egrad2rgrad(x, problem.egrad(x));
}

HessOp pullback_hess(ManifoldPtr manifold, const Problem &problem, Point x,
                     Matrix egrad) {
  return [manifold = std::move(manifold), &problem, x = std::move(x),
          eg = std::move(egrad)](const Tangent &s) {
    return manifold->ehess2pullback(x, eg, problem.ehessvec(x, s), s);
  };
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::GradTol: return "grad_tol";
    case Termination::SecondOrderMet: return "second_order_met";
    case Termination::ZeroStep: return "zero_step";
    case Termination::MaxIters: return "max_iters";
  }
  return "unknown";
}

int Trace::successful_steps() const {
  int n = 0;
  for (std::size_t i = 1; i < records.size(); ++i) n += records[i].accepted;
  return n;
}

}  // namespace rarc
