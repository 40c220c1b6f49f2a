#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "harness.hpp"

namespace rarc::cli {

namespace {

std::vector<std::string> split(const std::string &line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_trace_file(const std::filesystem::path &p) {
  if (p.extension() != ".csv") return false;
  const std::string name = p.filename().string();
  return name != "summary.csv" && name != "verify.csv" &&
         name.rfind("plot_", 0) != 0;
}

struct Series {
  std::string solver;
  std::vector<double> time, oracle, iter, grad_norm;
};

Series load_series(const std::filesystem::path &path) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError(path.string() + ": empty trace file");
  }
  const std::vector<std::string> header = split(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char *need :
       {"k", "grad_norm", "hessvec_count", "grad_count", "time_s"}) {
    if (!col.count(need)) {
      throw ConfigError(path.string() + ": missing column '" + need + "'");
    }
  }
  Series s;
  s.solver = path.stem().string();
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line);
    if (f.size() != header.size()) {
      throw ConfigError(path.string() + ": line " + std::to_string(lineno) +
                        ": expected " + std::to_string(header.size()) +
                        " fields");
    }
    try {
      s.iter.push_back(std::stod(f[col["k"]]));
      s.grad_norm.push_back(std::stod(f[col["grad_norm"]]));
      s.oracle.push_back(std::stod(f[col["grad_count"]]) +
                         std::stod(f[col["hessvec_count"]]));
      s.time.push_back(std::stod(f[col["time_s"]]));
    } catch (const std::exception &) {
      throw ConfigError(path.string() + ": line " + std::to_string(lineno) +
                        ": malformed number");
    }
  }
  return s;
}

void write_plot(const std::filesystem::path &path, const std::string &x_name,
                const std::vector<Series> &all,
                std::vector<double> Series::*x) {
  std::ofstream out(path);
  out << "solver," << x_name << ",grad_norm\n";
  char buf[64];
  for (const Series &s : all) {
    const std::vector<double> &xs = s.*x;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      out << s.solver << ',';
      std::snprintf(buf, sizeof buf, "%.17g", xs[i]);
      out << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", s.grad_norm[i]);
      out << buf << '\n';
    }
  }
}

}  // namespace

int report(const std::filesystem::path &dir, std::ostream &log) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw ConfigError("report: not a directory: " + dir.string());
  }
  std::map<fs::path, std::vector<fs::path>> groups;
  for (const auto &entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && is_trace_file(entry.path())) {
      groups[entry.path().parent_path()].push_back(entry.path());
    }
  }
  if (groups.empty()) {
    log << "warning: no trace CSVs under " << dir.string() << '\n';
    return 0;
  }
  for (auto &[group, files] : groups) {
    std::sort(files.begin(), files.end());
    std::vector<Series> all;
    for (const fs::path &f : files) all.push_back(load_series(f));
    write_plot(group / "plot_time.csv", "time_s", all, &Series::time);
    write_plot(group / "plot_oracle.csv", "oracle_calls", all, &Series::oracle);
    write_plot(group / "plot_iter.csv", "iteration", all, &Series::iter);
    log << group.string() << ": " << all.size() << " traces\n";
  }
  return 0;
}

}  // namespace rarc::cli
