#include <fstream>
#include <set>
#include <sstream>

#include "harness.hpp"

namespace rarc::cli {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Typed access to one section's keys; leftovers are reported as unknown.
class Section {
 public:
  Section(std::string path, std::map<std::string, std::string> keys)
      : path_(std::move(path)), keys_(std::move(keys)) {}

  bool has(const std::string &key) const { return keys_.count(key) != 0; }

  double real(const std::string &key, double fallback) {
    if (!take(key)) return fallback;
    const std::string &v = keys_.at(key);
    try {
      std::size_t pos = 0;
      const double out = std::stod(v, &pos);
      if (pos == v.size()) return out;
    } catch (const std::exception &) {
    }
    throw ConfigError(where(key) + ": expected a number, got '" + v + "'");
  }

  long long integer(const std::string &key, long long fallback) {
    if (!take(key)) return fallback;
    const std::string &v = keys_.at(key);
    try {
      std::size_t pos = 0;
      const long long out = std::stoll(v, &pos);
      if (pos == v.size()) return out;
    } catch (const std::exception &) {
    }
    throw ConfigError(where(key) + ": expected an integer, got '" + v + "'");
  }

  bool boolean(const std::string &key, bool fallback) {
    if (!take(key)) return fallback;
    const std::string &v = keys_.at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(where(key) + ": expected true or false, got '" + v + "'");
  }

  std::string text(const std::string &key, const std::string &fallback) {
    if (!take(key)) return fallback;
    return keys_.at(key);
  }

  void finish() const {
    for (const auto &[key, value] : keys_) {
      if (!used_.count(key)) throw ConfigError(where(key) + ": unknown key");
    }
  }

  std::string where(const std::string &key) const { return path_ + "." + key; }

 private:
  bool take(const std::string &key) {
    if (!keys_.count(key)) return false;
    used_.insert(key);
    return true;
  }

  std::string path_;
  std::map<std::string, std::string> keys_;
  std::set<std::string> used_;
};

// Wraps parameter validation so errors carry the section path.
template <typename P>
void validated(const P &p, const std::string &path) {
  try {
    p.validate();
  } catch (const ArgumentError &e) {
    throw ConfigError(path + ": " + e.what());
  }
}

SolverSpec parse_solver(const std::string &label, Section sec) {
  SolverSpec spec;
  spec.label = label;
  spec.kind = label.substr(0, label.find('@'));
  const std::string path = "solver." + label;
  if (spec.kind == "arc-lanczos" || spec.kind == "arc-nlcg") {
    ArcParams &p = spec.arc;
    p.subsolver = spec.kind == "arc-lanczos" ? SubsolverKind::Lanczos
                                             : SubsolverKind::Nlcg;
    p.theta = sec.real("theta", p.theta);
    p.sigma_min = sec.real("sigma_min", p.sigma_min);
    p.sigma_0 = sec.real("sigma_0", p.sigma_0);
    p.eta1 = sec.real("eta1", p.eta1);
    p.eta2 = sec.real("eta2", p.eta2);
    p.gamma1 = sec.real("gamma1", p.gamma1);
    p.gamma2 = sec.real("gamma2", p.gamma2);
    p.gamma3 = sec.real("gamma3", p.gamma3);
    p.grad_tol = sec.real("grad_tol", p.grad_tol);
    p.max_iters = static_cast<int>(sec.integer("max_iters", p.max_iters));
    p.max_inner = static_cast<int>(sec.integer("max_inner", p.max_inner));
    p.second_order = sec.boolean("second_order", p.second_order);
    p.second_order_tol = sec.real("second_order_tol", p.second_order_tol);
    sec.finish();
    validated(p, path);
  } else if (spec.kind == "rtr") {
    RtrParams &p = spec.rtr;
    p.delta_max = sec.real("delta_max", p.delta_max);
    p.delta0 = sec.real("delta0", p.delta0);
    p.rho_accept = sec.real("rho_accept", p.rho_accept);
    p.kappa = sec.real("kappa", p.kappa);
    p.theta_tcg = sec.real("theta_tcg", p.theta_tcg);
    p.grad_tol = sec.real("grad_tol", p.grad_tol);
    p.max_iters = static_cast<int>(sec.integer("max_iters", p.max_iters));
    p.max_inner = static_cast<int>(sec.integer("max_inner", p.max_inner));
    sec.finish();
    validated(p, path);
  } else if (spec.kind == "rgd") {
    RgdParams &p = spec.rgd;
    p.grad_tol = sec.real("grad_tol", p.grad_tol);
    p.max_iters = static_cast<int>(sec.integer("max_iters", p.max_iters));
    p.armijo_c = sec.real("armijo_c", p.armijo_c);
    p.initial_step = sec.real("initial_step", p.initial_step);
    p.max_backtracks =
        static_cast<int>(sec.integer("max_backtracks", p.max_backtracks));
    sec.finish();
    validated(p, path);
  } else {
    throw ConfigError(path + ": unknown solver '" + spec.kind +
                      "' (expected arc-lanczos, arc-nlcg, rtr or rgd)");
  }
  return spec;
}

}  // namespace

RunConfig parse_config(std::istream &in, const std::filesystem::path &base_dir) {
  std::vector<std::pair<std::string, std::map<std::string, std::string>>>
      sections;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty()) continue;
    const std::string at = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + ": unterminated section");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name != "problem" && name != "output" &&
          name.rfind("solver.", 0) != 0) {
        throw ConfigError(name + ": unknown section");
      }
      for (const auto &s : sections) {
        if (s.first == name) throw ConfigError(name + ": duplicate section");
      }
      sections.emplace_back(name, std::map<std::string, std::string>{});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(at + ": expected 'key = value'");
    }
    if (sections.empty()) throw ConfigError(at + ": key outside a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(at + ": empty key");
    auto &keys = sections.back().second;
    if (!keys.emplace(key, value).second) {
      throw ConfigError(sections.back().first + "." + key + ": duplicate key");
    }
  }

  RunConfig cfg;
  bool have_problem = false;
  for (auto &[name, keys] : sections) {
    if (name == "problem") {
      have_problem = true;
      Section sec("problem", keys);
      cfg.problem = sec.text("name", "");
      if (cfg.problem.empty()) throw ConfigError("problem.name: missing");
      if (sec.has("seeds")) {
        std::istringstream ss(sec.text("seeds", ""));
        cfg.seeds.clear();
        std::string tok;
        while (ss >> tok) {
          try {
            std::size_t pos = 0;
            cfg.seeds.push_back(std::stoull(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
          } catch (const std::exception &) {
            throw ConfigError("problem.seeds: bad seed '" + tok + "'");
          }
        }
        if (cfg.seeds.empty()) throw ConfigError("problem.seeds: empty list");
      } else {
        const long long seed = sec.integer("seed", 0);
        if (seed < 0) throw ConfigError("problem.seed: must be >= 0");
        cfg.seeds = {static_cast<std::uint64_t>(seed)};
      }
      for (const auto &[k, v] : keys) {
        if (k != "name" && k != "seed" && k != "seeds") {
          cfg.problem_keys[k] = k == "gset" ? (base_dir / v).string() : v;
        }
      }
    } else if (name == "output") {
      Section sec("output", keys);
      const std::string dir = sec.text("dir", "rarc_out");
      cfg.output_dir = std::filesystem::path(dir).is_absolute()
                           ? std::filesystem::path(dir)
                           : base_dir / dir;
      cfg.slow_checks = sec.boolean("slow_checks", false);
      cfg.regularity_points =
          static_cast<int>(sec.integer("regularity_points", 5));
      if (cfg.regularity_points < 0) {
        throw ConfigError("output.regularity_points: must be >= 0");
      }
      sec.finish();
    } else {
      cfg.solvers.push_back(
          parse_solver(name.substr(7), Section(name, keys)));
    }
  }
  if (!have_problem) throw ConfigError("problem: missing section");
  if (cfg.solvers.empty()) throw ConfigError("solver: no solver sections");
  if (cfg.output_dir == "rarc_out") cfg.output_dir = base_dir / "rarc_out";
  check_problem_keys(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  const auto base = path.has_parent_path() ? path.parent_path()
                                           : std::filesystem::path(".");
  return parse_config(in, base);
}

}  // namespace rarc::cli
