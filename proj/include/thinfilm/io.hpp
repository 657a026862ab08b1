#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thinfilm/continuation.hpp"
#include "thinfilm/errors.hpp"
#include "thinfilm/grid.hpp"
#include "thinfilm/model.hpp"
#include "thinfilm/spectral_iter.hpp"
#include "thinfilm/stability.hpp"
#include "thinfilm/threshold.hpp"

namespace thinfilm::io {

class IoError : public Error {
 public:
  using Error::Error;
};

/// Round-trip exact, locale independent.
inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path), path_(path) {
    if (!out_) throw IoError("cannot open " + path + " for writing");
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    out_.flush();
  }

  const std::string& path() const { return path_; }

 private:
  std::ofstream out_;
  std::string path_;
};

inline void write_profile_csv(const std::string& path, const PeriodicProfile& u) {
  CsvWriter w(path, {"theta", "u"});
  for (int j = 0; j < u.size(); ++j) w.row({fmt(u.grid.theta(j)), fmt(u.values[j])});
}

/// Reads a theta,u file. The row count fixes the grid; theta must match it.
inline PeriodicProfile read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  std::vector<double> theta, u;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
      throw IoError(path + ":" + std::to_string(line_no) + ": expected theta,u");
    try {
      theta.push_back(std::stod(a));
      u.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw IoError(path + ":" + std::to_string(line_no) + ": not a number");
    }
  }
  Grid grid(static_cast<int>(u.size()));
  for (int j = 0; j < grid.size(); ++j)
    if (std::abs(theta[j] - grid.theta(j)) > 1e-9)
      throw IoError(path + ": theta column is not the uniform grid on [-pi, pi)");
  return {grid, Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()))};
}

inline void write_history_csv(const std::string& path, const IterationReport& r) {
  CsvWriter w(path, {"iter", "diff"});
  for (std::size_t i = 0; i < r.diff_history.size(); ++i) w.row({std::to_string(i + 1), fmt(r.diff_history[i])});
}

inline void write_spectrum_csv(const std::string& path, const SpectrumReport& s) {
  CsvWriter w(path, {"re", "im"});
  for (const auto& ev : s.eigenvalues) w.row({fmt(ev.real()), fmt(ev.imag())});
}

inline const std::vector<std::string>& branch_header() {
  static const std::vector<std::string> h{"omega", "q", "mass", "u_min", "u_max"};
  return h;
}

inline std::vector<std::string> branch_row(const BranchPoint& b) {
  return {fmt(b.omega), fmt(b.q), fmt(b.mass), fmt(b.u_min), fmt(b.u_max)};
}

inline const std::vector<std::string>& probe_header() {
  static const std::vector<std::string> h{"q", "omega", "verdict", "iterations", "u_min", "u_max", "mass"};
  return h;
}

inline std::vector<std::string> probe_row(const Probe& p) {
  return {fmt(p.q), fmt(p.omega), to_string(p.verdict), std::to_string(p.iterations),
          fmt(p.u_min), fmt(p.u_max), fmt(p.mass)};
}

inline void write_probes_csv(const std::string& path, const std::vector<Probe>& probes) {
  CsvWriter w(path, probe_header());
  for (const auto& p : probes) w.row(probe_row(p));
}

}  // namespace thinfilm::io
