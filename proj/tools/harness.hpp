#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rarc/arc.hpp"
#include "rarc/baselines.hpp"

namespace rarc::cli {

/// Configuration or schema error; what() starts with the offending key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char *kTraceCsvHeader =
    "k,accepted,f,grad_norm,sigma,rho,step_norm,inner_iters,hessvec_count,"
    "grad_count,time_s";

struct SolverSpec {
  /// Section suffix, e.g. "arc-lanczos" or "arc-lanczos@theta2".
  std::string label;
  /// One of arc-lanczos, arc-nlcg, rtr, rgd.
  std::string kind;
  ArcParams arc;
  RtrParams rtr;
  RgdParams rgd;
};

struct RunConfig {
  std::string problem;
  /// Raw [problem] keys other than name/seed/seeds.
  std::map<std::string, std::string> problem_keys;
  std::vector<std::uint64_t> seeds{0};
  std::vector<SolverSpec> solvers;
  std::filesystem::path output_dir = "rarc_out";
  bool slow_checks = false;
  int regularity_points = 5;
};

/// Parses the INI grammar: [problem], [solver.<label>], [output] sections of
/// "key = value" lines; '#' and ';' start comments. Relative paths resolve
/// against base_dir.
RunConfig parse_config(std::istream &in,
                       const std::filesystem::path &base_dir = ".");
RunConfig load_config(const std::filesystem::path &path);
/// Rejects unknown problem names and keys.
void check_problem_keys(const RunConfig &config);

void write_trace_csv(std::ostream &out, const Trace &trace);
/// Reads the CSV columns back (in-memory audit fields stay default).
Trace read_trace_csv(std::istream &in);

/// Runs every solver on every seed. Returns 0 on success, 2 if any solver
/// failed (the failure is logged and the other solvers still run).
int run(const RunConfig &config, std::ostream &log, bool parallel = false);

/// Writes plot_time.csv, plot_oracle.csv and plot_iter.csv next to every
/// group of trace CSVs under dir. Throws ConfigError on schema errors.
int report(const std::filesystem::path &dir, std::ostream &log);

/// Command-line entry point.
int main(int argc, char **argv);

}  // namespace rarc::cli
