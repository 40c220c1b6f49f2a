#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "rarc/verify.hpp"

namespace rarc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string &line, int lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("csv: unterminated quote", lineno);
  out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string &s, int lineno) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ParseError("csv: bad number '" + s + "'", lineno);
    return v;
  } catch (const std::invalid_argument &) {
    throw ParseError("csv: bad number '" + s + "'", lineno);
  } catch (const std::out_of_range &) {
    throw ParseError("csv: number out of range '" + s + "'", lineno);
  }
}

// Least-squares slope of log(r) against log(t) over residuals above a floor.
TaylorResult fit(std::vector<double> t, std::vector<double> r, double floor,
                 double constant) {
  TaylorResult out;
  out.t = std::move(t);
  out.residual = std::move(r);
  out.constant = constant;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    if (!(out.residual[i] > floor)) continue;
    const double lx = std::log(out.t[i]);
    const double ly = std::log(out.residual[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) {
    out.exact = true;
    out.slope = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

void require_unit_scale(const Manifold &manifold, const Point &x,
                        const Tangent &s) {
  if (!(manifold.norm(x, s) > 0.0)) {
    throw ArgumentError("Taylor check: s must be nonzero");
  }
}

}  // namespace

void write_check_csv(std::ostream &out, const std::vector<CheckRow> &rows) {
  out << kCheckCsvHeader << '\n';
  for (const CheckRow &r : rows) {
    out << quote(r.check) << ',' << quote(r.subject) << ',' << fmt(r.value)
        << ',' << fmt(r.bound) << ',' << (r.pass ? "true" : "false") << '\n';
  }
}

std::vector<CheckRow> read_check_csv(std::istream &in) {
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line) || line != kCheckCsvHeader) {
    throw ParseError("csv: expected header '" + std::string(kCheckCsvHeader) +
                         "'",
                     lineno);
  }
  std::vector<CheckRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line, lineno);
    if (f.size() != 5) throw ParseError("csv: expected 5 fields", lineno);
    CheckRow r;
    r.check = f[0];
    r.subject = f[1];
    r.value = parse_double(f[2], lineno);
    r.bound = parse_double(f[3], lineno);
    if (f[4] != "true" && f[4] != "false") {
      throw ParseError("csv: pass must be true or false", lineno);
    }
    r.pass = f[4] == "true";
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<double> default_t_grid() {
  std::vector<double> t;
  for (int i = 0; i <= 8; ++i) t.push_back(std::pow(10.0, -3.0 + 0.25 * i));
  return t;
}

TaylorResult check_taylor_a2(const ManifoldPtr &manifold,
                             const Problem &problem, const Point &x,
                             const Tangent &s,
                             const std::vector<double> &t_grid) {
  const Manifold &mf = *manifold;
  require_unit_scale(mf, x, s);
  const double f0 = problem.cost(x);
  const Matrix eg = problem.egrad(x);
  const Tangent g = mf.egrad2rgrad(x, eg);
  const Tangent hs = pullback_hess(manifold, problem, x, eg)(s);
  const double gs = mf.inner(x, g, s);
  const double shs = mf.inner(x, s, hs);
  const double ns = mf.norm(x, s);
  std::vector<double> res;
  double constant = 0.0;
  for (double t : t_grid) {
    const double ft = problem.cost(mf.retract(x, t * s));
    const double r = std::abs(ft - (f0 + t * gs + 0.5 * t * t * shs));
    res.push_back(r);
    constant = std::max(constant, 6.0 * r / std::pow(t * ns, 3));
  }
  const double floor = 1e2 * kEps * std::max(1.0, std::abs(f0));
  return fit(t_grid, std::move(res), floor, constant);
}

Tangent pullback_grad(const Manifold &manifold, const Problem &problem,
                      const Point &x, const Tangent &s) {
  const Point y = manifold.retract(x, s);
  const Tangent gy = manifold.egrad2rgrad(y, problem.egrad(y));
  return manifold.dretract_adjoint(x, s, gy);
}

Tangent pullback_grad_fd(const Manifold &manifold, const Problem &problem,
                         const Point &x, const Tangent &s, double h) {
  const Matrix basis = manifold.tangent_basis(x);
  const Shape shape = manifold.shape();
  Vector coeff(basis.cols());
  for (Eigen::Index i = 0; i < basis.cols(); ++i) {
    const Tangent b = Eigen::Map<const Matrix>(basis.col(i).data(), shape.rows,
                                               shape.cols);
    const double fp = problem.cost(manifold.retract(x, s + h * b));
    const double fm = problem.cost(manifold.retract(x, s - h * b));
    coeff(i) = (fp - fm) / (2.0 * h);
  }
  const Vector v = basis * coeff;
  return Eigen::Map<const Matrix>(v.data(), shape.rows, shape.cols);
}

TaylorResult check_grad_taylor_a4(const ManifoldPtr &manifold,
                                  const Problem &problem, const Point &x,
                                  const Tangent &s,
                                  const std::vector<double> &t_grid) {
  const Manifold &mf = *manifold;
  require_unit_scale(mf, x, s);
  const Matrix eg = problem.egrad(x);
  const Tangent g = mf.egrad2rgrad(x, eg);
  const Tangent hs = pullback_hess(manifold, problem, x, eg)(s);
  const double ns = mf.norm(x, s);
  std::vector<double> res;
  double constant = 0.0;
  for (double t : t_grid) {
    const Tangent gt = pullback_grad(mf, problem, x, t * s);
    const double r = mf.norm(x, gt - g - t * hs);
    res.push_back(r);
    constant = std::max(constant, 2.0 * r / std::pow(t * ns, 2));
  }
  const double scale =
      std::max({1.0, mf.norm(x, g), mf.norm(x, hs), std::abs(problem.cost(x))});
  return fit(t_grid, std::move(res), 1e2 * kEps * scale, constant);
}

double dr_sigma_min(const Manifold &manifold, const Point &x,
                    const Tangent &s) {
  if (manifold.dim() > 400) {
    throw ArgumentError("dr_sigma_min: dimension above the dense cap of 400");
  }
  const Shape shape = manifold.shape();
  const Matrix b0 = manifold.tangent_basis(x);
  const Matrix b1 = manifold.tangent_basis(manifold.retract(x, s));
  Matrix op(b1.cols(), b0.cols());
  for (Eigen::Index i = 0; i < b0.cols(); ++i) {
    const Tangent z =
        Eigen::Map<const Matrix>(b0.col(i).data(), shape.rows, shape.cols);
    const Tangent dz = manifold.dretract(x, s, z);
    op.col(i) = b1.transpose() *
                Eigen::Map<const Vector>(dz.data(), dz.size());
  }
  Eigen::JacobiSVD<Matrix> svd(op);
  return svd.singularValues().minCoeff();
}

std::optional<DrBound> dr_bound(const Manifold &manifold, double a) {
  if (a == 0.0) return DrBound{1.0, true};
  if (const auto *sphere = dynamic_cast<const Sphere *>(&manifold)) {
    if (sphere->retraction_kind() == RetractionKind::Canonical) {
      return DrBound{1.0 / (1.0 + a * a), true};
    }
    if (a < std::numbers::pi) return DrBound{std::sin(a) / a, false};
    return std::nullopt;
  }
  if (dynamic_cast<const Stiefel *>(&manifold) != nullptr) {
    const double b = 1.0 - 3.0 * a - 0.5 * a * a;
    if (b > 0.0) return DrBound{b, false};
  }
  return std::nullopt;
}

std::vector<CheckRow> check_dr_bounds(const Manifold &manifold, int samples,
                                      Rng &rng,
                                      const std::vector<double> &norms) {
  std::vector<CheckRow> rows;
  for (double a : norms) {
    const auto bound = dr_bound(manifold, a);
    if (!bound) continue;
    for (int k = 0; k < samples; ++k) {
      const Point x = manifold.rand_point(rng);
      const Tangent s = a * manifold.rand_tangent(x, rng);
      CheckRow row;
      row.check = bound->equality ? "dr_sigma_min_equal" : "dr_sigma_min_lower";
      row.subject = manifold.name() + " |s|=" + fmt(a);
      row.value = dr_sigma_min(manifold, x, s);
      row.bound = bound->value;
      row.pass = bound->equality ? std::abs(row.value - row.bound) <= 1e-8
                                 : row.value >= row.bound - 1e-12;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

double round_off(double f) {
  return kRhoRegularization * kEps * std::max(1.0, std::abs(f));
}

}  // namespace

double trace_l_estimate(const Trace &trace) {
  double l = 0.0;
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    const IterationRecord &r = trace.records[k];
    const double s3 = std::pow(r.step_norm, 3);
    if (!(s3 > 0.0) || !std::isfinite(r.rho_num) || !std::isfinite(r.rho_den)) {
      continue;
    }
    const double excess =
        r.rho_den - r.rho_num - 2.0 * round_off(trace.records[k - 1].f);
    if (excess > 0.0) l = std::max(l, 6.0 * excess / s3);
  }
  return l;
}

std::vector<CheckRow> check_trace(const Trace &trace, const ArcParams &p,
                                  double l_est) {
  std::vector<CheckRow> rows;
  const std::string subject = trace.solver;
  if (trace.records.empty()) return rows;

  double f_low = trace.f0;
  double cubes = 0.0;
  double slack = 0.0;
  double sigma_obs = 0.0;
  double sigma_floor = std::numeric_limits<double>::infinity();
  double descent_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const IterationRecord &r = trace.records[k];
    f_low = std::min(f_low, r.f);
    sigma_obs = std::max(sigma_obs, r.sigma);
    sigma_floor = std::min(sigma_floor, r.sigma);
    if (k == 0) continue;
    sigma_obs = std::max(sigma_obs, r.sigma_used);
    sigma_floor = std::min(sigma_floor, r.sigma_used);
    if (!r.accepted) continue;
    const double s3 = std::pow(r.step_norm, 3);
    const double reg = round_off(trace.records[k - 1].f);
    cubes += s3;
    slack += reg;
    const double margin = (trace.records[k - 1].f - r.f) -
                          p.eta1 * p.sigma_min / 3.0 * s3 + reg;
    descent_margin = std::min(descent_margin, margin);
  }

  const double cubes_bound =
      3.0 * (trace.f0 - f_low + slack) / (p.eta1 * p.sigma_min);
  rows.push_back({"sum_of_cubes", subject, cubes, cubes_bound,
                  cubes <= cubes_bound});

  rows.push_back({"sigma_floor", subject, sigma_floor, p.sigma_min,
                  sigma_floor >= p.sigma_min});

  const double sigma0 = trace.records.size() > 1
                            ? trace.records[1].sigma_used
                            : trace.records[0].sigma;
  const double l = std::max(l_est, trace_l_estimate(trace));
  const double sigma_cap = 1.1 * sigma_max_bound(sigma0, l, p);
  rows.push_back({"sigma_cap", subject, sigma_obs, sigma_cap,
                  sigma_obs <= sigma_cap});

  const double k_total = trace.steps();
  const double k_succ = trace.successful_steps();
  const double count_bound =
      (1.0 + std::abs(std::log(p.gamma1)) / std::log(p.gamma2)) * k_succ +
      std::log(sigma_cap / sigma0) / std::log(p.gamma2);
  rows.push_back({"success_counting", subject, k_total, count_bound,
                  k_total <= count_bound + 1e-9});

  if (!std::isfinite(descent_margin)) descent_margin = 0.0;
  rows.push_back({"per_step_descent", subject, descent_margin, 0.0,
                  descent_margin >= 0.0});
  return rows;
}

double step_norm_bound(double grad_norm, double lambda_min, double sigma_min) {
  return std::sqrt(3.0 * grad_norm / sigma_min) +
         1.5 / sigma_min * std::max(0.0, -lambda_min);
}

int check_step_bound(const Trace &trace, const ManifoldPtr &manifold,
                     const Problem &problem, const ArcParams &p) {
  for (const IterationRecord &r : trace.records) {
    if (!r.point) {
      throw ArgumentError("check_step_bound: trace was recorded without points");
    }
  }
  const Manifold &mf = *manifold;
  int violations = 0;
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    const IterationRecord &r = trace.records[k];
    if (r.step_norm == 0.0) continue;
    const Point &x = *trace.records[k - 1].point;
    const Matrix eg = problem.egrad(x);
    const Tangent g = mf.egrad2rgrad(x, eg);
    const EigResult e =
        smallest_eig(mf, x, pullback_hess(manifold, problem, x, eg), 1e-8);
    const double bound =
        step_norm_bound(mf.norm(x, g), e.value - e.residual, p.sigma_min);
    if (r.step_norm > bound * (1.0 + 1e-12)) ++violations;
  }
  return violations;
}

RegularityEstimate estimate_regularity(const ManifoldPtr &manifold,
                                       const Problem &problem, int points,
                                       Rng &rng) {
  RegularityEstimate out;
  const auto grid = default_t_grid();
  for (int k = 0; k < points; ++k) {
    const Point x = manifold->rand_point(rng);
    const Tangent s = manifold->rand_tangent(x, rng);
    const TaylorResult a2 = check_taylor_a2(manifold, problem, x, s, grid);
    const TaylorResult a4 = check_grad_taylor_a4(manifold, problem, x, s, grid);
    out.l_est = std::max(out.l_est, a2.constant);
    out.l_prime_est = std::max(out.l_prime_est, a4.constant);
    out.a2_slopes.push_back(a2.slope);
    out.a4_slopes.push_back(a4.slope);
    out.a2_exact += a2.exact;
    out.a4_exact += a4.exact;
  }
  return out;
}

}  // namespace rarc
