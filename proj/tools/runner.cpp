#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "harness.hpp"
#include "rarc/problems.hpp"
#include "rarc/verify.hpp"

namespace rarc::cli {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::map<std::string, std::set<std::string>> &problem_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"rayleigh", {"n", "retraction"}},
      {"invariant_subspace", {"n", "p"}},
      {"truncated_svd", {"m", "n", "p"}},
      {"matrix_completion", {"m", "n", "r", "osf"}},
      {"maxcut", {"n", "edge_prob", "p", "gset"}},
      {"rotation_sync", {"m", "d", "edge_prob", "noise", "init"}},
      {"shapefit", {"n", "d", "edge_prob"}},
  };
  return keys;
}

struct Built {
  ManifoldPtr manifold;
  Problem problem;
  Point x0;
  /// Problem-specific oracle comparisons of a final point.
  std::function<std::vector<CheckRow>(const Point &, double)> oracle;
};

class Keys {
 public:
  explicit Keys(const std::map<std::string, std::string> &m) : m_(m) {}
  double real(const std::string &k, double d) const {
    auto it = m_.find(k);
    if (it == m_.end()) return d;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos == it->second.size()) return v;
    } catch (const std::exception &) {
    }
    throw ConfigError("problem." + k + ": expected a number");
  }
  long long integer(const std::string &k, long long d) const {
    auto it = m_.find(k);
    if (it == m_.end()) return d;
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(it->second, &pos);
      if (pos == it->second.size()) return v;
    } catch (const std::exception &) {
    }
    throw ConfigError("problem." + k + ": expected an integer");
  }
  std::string text(const std::string &k, const std::string &d) const {
    auto it = m_.find(k);
    return it == m_.end() ? d : it->second;
  }

 private:
  const std::map<std::string, std::string> &m_;
};

CheckRow gap_row(const std::string &subject, double f, double f_opt) {
  const double gap = std::abs(f - f_opt);
  const double tol = 1e-7 * (1.0 + std::abs(f));
  return {"optimal_cost_gap", subject, gap, tol, gap <= tol};
}

Built build(const std::string &name,
            const std::map<std::string, std::string> &raw, std::uint64_t seed) {
  const Keys k(raw);
  Rng rng(seed);
  Built b;
  if (name == "rayleigh") {
    const std::string kind = k.text("retraction", "canonical");
    if (kind != "canonical" && kind != "exponential") {
      throw ConfigError("problem.retraction: expected canonical or exponential");
    }
    auto inst = std::make_shared<RayleighInstance>(make_rayleigh(
        k.integer("n", 100), rng,
        kind == "canonical" ? RetractionKind::Canonical
                            : RetractionKind::Exponential));
    b = {inst->manifold, inst->problem, inst->x0, nullptr};
    b.oracle = [inst](const Point &, double f) {
      return std::vector<CheckRow>{gap_row("rayleigh", f, inst->optimal_cost)};
    };
  } else if (name == "invariant_subspace") {
    auto inst = std::make_shared<InvariantSubspaceInstance>(
        make_invariant_subspace(k.integer("n", 128), k.integer("p", 3), rng));
    b = {inst->manifold, inst->problem, inst->x0, nullptr};
    b.oracle = [inst](const Point &, double f) {
      return std::vector<CheckRow>{
          gap_row("invariant_subspace", f, inst->optimal_cost)};
    };
  } else if (name == "truncated_svd") {
    auto inst = std::make_shared<TruncatedSvdInstance>(make_truncated_svd(
        k.integer("m", 60), k.integer("n", 50), k.integer("p", 3), rng));
    b = {inst->manifold, inst->problem, inst->x0, nullptr};
    b.oracle = [inst](const Point &, double f) {
      return std::vector<CheckRow>{
          gap_row("truncated_svd", f, inst->optimal_cost)};
    };
  } else if (name == "matrix_completion") {
    auto inst = std::make_shared<MatrixCompletionInstance>(
        make_matrix_completion(k.integer("m", 100), k.integer("n", 100),
                               k.integer("r", 5), k.real("osf", 4.0), rng));
    b = {inst->manifold, inst->problem, inst->x0, nullptr};
    b.oracle = [inst](const Point &x, double) {
      const double rmse = completion_heldout_rmse(*inst, x);
      return std::vector<CheckRow>{
          {"heldout_rmse", "matrix_completion", rmse, 1e-6, rmse <= 1e-6}};
    };
  } else if (name == "maxcut") {
    GsetGraph g;
    if (raw.count("gset")) {
      g = read_gset(k.text("gset", ""));
    } else {
      g = random_graph(static_cast<int>(k.integer("n", 200)),
                       k.real("edge_prob", 0.05), rng);
    }
    auto inst =
        std::make_shared<MaxCutInstance>(make_maxcut(g, k.integer("p", 0), rng));
    b = {inst->manifold, inst->problem, inst->x0, nullptr};
    b.oracle = [inst, seed](const Point &, double f) {
      // Cost at 100 random points as a Monte-Carlo baseline.
      Rng r(seed + 1);
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 100; ++i) {
        best = std::min(best, inst->problem.cost(inst->manifold->rand_point(r)));
      }
      return std::vector<CheckRow>{
          {"below_random_cost", "maxcut", f, best, f <= best}};
    };
  } else if (name == "rotation_sync") {
    const double noise = k.real("noise", 0.0);
    auto inst = std::make_shared<RotationSyncInstance>(make_rotation_sync(
        static_cast<int>(k.integer("m", 20)), static_cast<int>(k.integer("d", 3)),
        k.real("edge_prob", 0.3), noise, rng));
    const std::string init = k.text("init", "spectral");
    if (init == "random") {
      inst->x0 = inst->manifold->rand_point(rng);
    } else if (init != "spectral") {
      throw ConfigError("problem.init: expected spectral or random");
    }
    b = {inst->manifold, inst->problem, inst->x0, nullptr};
    b.oracle = [inst, noise](const Point &x, double) {
      if (noise != 0.0) return std::vector<CheckRow>{};
      const double err = rotation_alignment_error(*inst, x);
      return std::vector<CheckRow>{
          {"alignment_error", "rotation_sync", err, 1e-6, err <= 1e-6}};
    };
  } else if (name == "shapefit") {
    auto inst = std::make_shared<ShapeFitInstance>(make_shapefit(
        static_cast<int>(k.integer("n", 50)), static_cast<int>(k.integer("d", 3)),
        k.real("edge_prob", 0.3), rng));
    b = {inst->manifold, inst->problem, inst->x0, nullptr};
    b.oracle = [inst](const Point &x, double) {
      const double err = (x - inst->scaled_truth).cwiseAbs().maxCoeff();
      return std::vector<CheckRow>{
          {"max_point_error", "shapefit", err, 1e-6, err <= 1e-6}};
    };
  } else {
    throw ConfigError("problem.name: unknown problem '" + name + "'");
  }
  return b;
}

SolverResult run_solver(const SolverSpec &spec, const Built &b,
                        std::uint64_t seed, bool slow) {
  if (spec.kind == "rtr") {
    RtrParams p = spec.rtr;
    p.log_points = slow;
    return rtr_run(b.manifold, b.problem, b.x0, p);
  }
  if (spec.kind == "rgd") {
    RgdParams p = spec.rgd;
    p.log_points = slow;
    return rgd_run(b.manifold, b.problem, b.x0, p);
  }
  ArcParams p = spec.arc;
  p.seed = seed;
  p.log_points = slow;
  return arc_run(b.manifold, b.problem, b.x0, p);
}

std::string file_label(const std::string &label) {
  std::string out = label;
  for (char &c : out) {
    if (c == '@' || c == '/' || c == ' ') c = '_';
  }
  return out;
}

int run_seed(const RunConfig &cfg, std::uint64_t seed, std::ostream &log,
             std::mutex &log_mu) {
  auto say = [&](const std::string &msg) {
    std::lock_guard<std::mutex> lock(log_mu);
    log << msg << '\n';
  };
  Built b;
  try {
    b = build(cfg.problem, cfg.problem_keys, seed);
  } catch (const ArgumentError &e) {
    throw ConfigError("problem: " + std::string(e.what()));
  } catch (const ParseError &e) {
    throw ConfigError("problem.gset: " + std::string(e.what()));
  }
  const auto dir = cfg.output_dir / cfg.problem / ("seed_" + std::to_string(seed));
  std::filesystem::create_directories(dir);

  std::vector<CheckRow> checks;
  double l_est = 0.0;
  if (cfg.regularity_points > 0) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const RegularityEstimate reg =
        estimate_regularity(b.manifold, b.problem, cfg.regularity_points, rng);
    l_est = reg.l_est;
    for (std::size_t i = 0; i < reg.a2_slopes.size(); ++i) {
      const double s2 = reg.a2_slopes[i];
      const double s4 = reg.a4_slopes[i];
      const std::string subj = cfg.problem + " point " + std::to_string(i);
      checks.push_back({"a2_slope", subj, s2, 3.0,
                        std::isnan(s2) || std::abs(s2 - 3.0) <= 0.3});
      checks.push_back({"a4_slope", subj, s4, 2.0,
                        std::isnan(s4) || std::abs(s4 - 2.0) <= 0.3});
    }
    checks.push_back({"l_est", cfg.problem, reg.l_est, 0.0, true});
    checks.push_back({"l_prime_est", cfg.problem, reg.l_prime_est, 0.0, true});
  }

  std::ofstream summary(dir / "summary.csv");
  summary << "solver,termination,steps,successful,f_final,grad_norm,"
             "hessvec_count,grad_count,time_s,contained_failures\n";
  int code = 0;
  for (const SolverSpec &spec : cfg.solvers) {
    SolverResult res;
    try {
      res = run_solver(spec, b, seed, cfg.slow_checks);
    } catch (const std::exception &e) {
      say("seed " + std::to_string(seed) + " " + spec.label +
          ": solver failed: " + e.what());
      summary << spec.label << ",error,,,,,,,,\n";
      code = 2;
      continue;
    }
    const Trace &t = res.trace;
    std::ofstream csv(dir / (file_label(spec.label) + ".csv"));
    write_trace_csv(csv, t);
    const IterationRecord &last = t.records.back();
    summary << spec.label << ',' << to_string(t.termination) << ','
            << t.steps() << ',' << t.successful_steps() << ','
            << fmt(t.f_final) << ',' << fmt(last.grad_norm) << ','
            << last.hessvec_count << ',' << last.grad_count << ','
            << fmt(last.time_s) << ',' << t.contained_failures << '\n';
    say("seed " + std::to_string(seed) + " " + spec.label + ": " +
        std::string(to_string(t.termination)) + " after " +
        std::to_string(t.steps()) + " steps, f = " + fmt(t.f_final) +
        ", |grad| = " + fmt(last.grad_norm));

    for (CheckRow row : b.oracle(res.x, t.f_final)) {
      row.subject = spec.label;
      checks.push_back(std::move(row));
    }
    if (spec.kind.rfind("arc", 0) == 0) {
      for (CheckRow row : check_trace(t, spec.arc, l_est)) {
        row.subject = spec.label;
        checks.push_back(std::move(row));
      }
      if (cfg.slow_checks) {
        const int v = check_step_bound(t, b.manifold, b.problem, spec.arc);
        checks.push_back({"step_norm_bound", spec.label, double(v), 0.0, v == 0});
      }
    } else {
      double worst = 0.0;
      for (std::size_t i = 1; i < t.records.size(); ++i) {
        if (t.records[i].accepted) {
          worst = std::max(worst, t.records[i].f - t.records[i - 1].f);
        }
      }
      const double tol = 1e3 * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, std::abs(t.f0));
      checks.push_back({"monotone_descent", spec.label, worst, tol, worst <= tol});
    }
  }
  std::ofstream verify(dir / "verify.csv");
  write_check_csv(verify, checks);
  return code;
}

}  // namespace

void check_problem_keys(const RunConfig &cfg) {
  const auto &table = problem_keys();
  const auto it = table.find(cfg.problem);
  if (it == table.end()) {
    throw ConfigError("problem.name: unknown problem '" + cfg.problem + "'");
  }
  for (const auto &[key, value] : cfg.problem_keys) {
    if (!it->second.count(key)) {
      throw ConfigError("problem." + key + ": unknown key for " + cfg.problem);
    }
  }
}

void write_trace_csv(std::ostream &out, const Trace &trace) {
  out << kTraceCsvHeader << '\n';
  for (const IterationRecord &r : trace.records) {
    out << r.k << ',' << (r.accepted ? 1 : 0) << ',' << fmt(r.f) << ','
        << fmt(r.grad_norm) << ',' << fmt(r.sigma) << ','
        << (r.rho ? fmt(*r.rho) : std::string()) << ',' << fmt(r.step_norm)
        << ',' << r.inner_iters << ',' << r.hessvec_count << ','
        << r.grad_count << ',' << fmt(r.time_s) << '\n';
  }
}

Trace read_trace_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader) {
    throw ConfigError("trace: header must be '" + std::string(kTraceCsvHeader) +
                      "'");
  }
  Trace t;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 11) {
      throw ConfigError("trace: line " + std::to_string(lineno) +
                        ": expected 11 fields");
    }
    try {
      IterationRecord r;
      r.k = std::stoi(f[0]);
      r.accepted = f[1] == "1";
      r.f = std::stod(f[2]);
      r.grad_norm = std::stod(f[3]);
      r.sigma = std::stod(f[4]);
      if (!f[5].empty()) r.rho = std::stod(f[5]);
      r.step_norm = std::stod(f[6]);
      r.inner_iters = std::stoi(f[7]);
      r.hessvec_count = std::stoll(f[8]);
      r.grad_count = std::stoll(f[9]);
      r.time_s = std::stod(f[10]);
      t.records.push_back(std::move(r));
    } catch (const std::exception &) {
      throw ConfigError("trace: line " + std::to_string(lineno) +
                        ": malformed number");
    }
  }
  if (!t.records.empty()) {
    t.f0 = t.records.front().f;
    t.f_final = t.records.back().f;
  }
  return t;
}

int run(const RunConfig &config, std::ostream &log, bool parallel) {
  check_problem_keys(config);
  std::mutex log_mu;
  std::vector<int> codes(config.seeds.size(), 0);
  std::vector<std::string> errors(config.seeds.size());
  auto one = [&](std::size_t i) {
    try {
      codes[i] = run_seed(config, config.seeds[i], log, log_mu);
    } catch (const ConfigError &) {
      throw;
    } catch (const std::exception &e) {
      std::lock_guard<std::mutex> lock(log_mu);
      log << "seed " << config.seeds[i] << ": " << e.what() << '\n';
      codes[i] = 2;
    }
  };
  if (parallel && config.seeds.size() > 1) {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> failures(config.seeds.size());
    for (std::size_t i = 0; i < config.seeds.size(); ++i) {
      threads.emplace_back([&, i] {
        try {
          one(i);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      });
    }
    for (auto &t : threads) t.join();
    for (auto &f : failures) {
      if (f) std::rethrow_exception(f);
    }
  } else {
    for (std::size_t i = 0; i < config.seeds.size(); ++i) one(i);
  }
  int code = 0;
  for (int c : codes) code = std::max(code, c);
  return code;
}

}  // namespace rarc::cli
