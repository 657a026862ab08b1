// Command-line front end: solve, sweep, stability, continue, bench.
//
// Exit codes: 0 success/converged, 2 diverged, 3 iteration budget exhausted,
// 64 usage error, 65 seed solve failed, 66 unreadable input, 70 internal error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thinfilm/thinfilm.hpp"

namespace {

using json = nlohmann::json;
using namespace thinfilm;

constexpr int kExitDiverged = 2;
constexpr int kExitMaxIters = 3;
constexpr int kExitUsage = 64;
constexpr int kExitSeedFailed = 65;
constexpr int kExitNoInput = 66;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string iso_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Relative prefixes land under $THINFILM_OUTPUT_DIR when it is set.
std::string resolve_prefix(const std::string& prefix) {
  const char* dir = std::getenv("THINFILM_OUTPUT_DIR");
  std::filesystem::path p(prefix);
  if (dir && *dir && p.is_relative()) p = std::filesystem::path(dir) / p;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  return p.string();
}

class Manifest {
 public:
  Manifest(std::string subcommand, std::string prefix) : prefix_(std::move(prefix)) {
    doc_["subcommand"] = std::move(subcommand);
    doc_["tool_version"] = kVersion;
    doc_["timestamp"] = iso_timestamp();
    doc_["params"] = json::object();
    doc_["results"] = json::object();
    doc_["outputs"] = json::array();
  }

  json& params() { return doc_["params"]; }
  json& results() { return doc_["results"]; }
  std::string output(const std::string& suffix) {
    std::string path = prefix_ + suffix;
    doc_["outputs"].push_back(path);
    return path;
  }

  void write() {
    const std::string path = prefix_ + ".manifest.json";
    std::ofstream out(path);
    if (!out) throw io::IoError("cannot write " + path);
    out << doc_.dump(2) << '\n';
  }

 private:
  std::string prefix_;
  json doc_;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
};

Range parse_range(const std::string& text, const char* flag) {
  Range r;
  std::stringstream ss(text);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
    throw UsageError(std::string(flag) + " expects LO:HI:COUNT");
  try {
    r.lo = std::stod(a);
    r.hi = std::stod(b);
    r.count = std::stoi(c);
  } catch (const std::exception&) {
    throw UsageError(std::string(flag) + " expects LO:HI:COUNT");
  }
  if (r.count < 1 || !(r.lo > 0.0) || !(r.hi >= r.lo) || (r.count > 1 && r.hi == r.lo))
    throw UsageError(std::string(flag) + ": empty or invalid range");
  return r;
}

int iteration_exit(Verdict v) {
  switch (v) {
    case Verdict::converged: return 0;
    case Verdict::diverged: return kExitDiverged;
    default: return kExitMaxIters;
  }
}

// ---------------------------------------------------------------- solve

struct SolveOptions {
  double omega = 0.0;
  std::optional<double> q;
  std::optional<int> n_points;  // spectral 4096, newton 256
  std::optional<double> tol;
  double gamma = 0.0;
  int max_iters = 500;
  double divergence_cap = IterationConfig{}.divergence_cap;
  std::string guess = "zero";
  std::string method = "spectral";
  std::optional<double> mass;
  std::string out = "thinfilm";
};

// Initial profile as v = u − q/ω, or std::nullopt for the solver default.
std::optional<Eigen::VectorXd> guess_profile(const std::string& guess, const Grid& grid, const ModelParams& p) {
  if (guess == "zero") return std::nullopt;
  if (guess == "twoqw") return initial_guess(InitialGuess::two_q_over_omega, grid, p);
  if (guess == "cos") return initial_guess(InitialGuess::cos, grid, p);
  if (guess == "sin") return initial_guess(InitialGuess::sin, grid, p);
  if (guess == "sech") return initial_guess(InitialGuess::sech, grid, p);
  if (guess.rfind("file:", 0) == 0) {
    const PeriodicProfile u = io::read_profile_csv(guess.substr(5));
    return Eigen::VectorXd(resample(u.grid, u.values, grid).array() - p.shift());
  }
  throw UsageError("unknown --guess " + guess);
}

int run_solve(const SolveOptions& o) {
  if (o.method != "spectral" && o.method != "newton") throw UsageError("--method must be spectral or newton");
  if (o.mass && o.method != "newton") throw UsageError("--mass requires --method newton");
  if (!o.q && !o.mass) throw UsageError("--q is required (or --mass with --method newton)");

  const int n_points = o.n_points.value_or(o.method == "newton" ? 256 : 4096);
  const Grid grid(n_points);
  Manifest manifest("solve", resolve_prefix(o.out));
  auto& prm = manifest.params();
  prm["omega"] = o.omega;
  prm["q"] = o.q ? json(*o.q) : json(nullptr);
  prm["n_exp"] = 3;
  prm["n_points"] = n_points;
  prm["gamma"] = o.gamma;
  prm["guess"] = o.guess;
  prm["method"] = o.method;
  prm["mass"] = o.mass ? json(*o.mass) : json(nullptr);

  if (o.method == "spectral") {
    const ModelParams p(o.omega, *o.q);
    IterationConfig cfg;
    cfg.tol = o.tol.value_or(1e-10);
    cfg.max_iters = o.max_iters;
    cfg.gamma = o.gamma;
    cfg.divergence_cap = o.divergence_cap;
    cfg.initial_guess = guess_profile(o.guess, grid, p);
    prm["tol"] = cfg.tol;
    prm["max_iters"] = cfg.max_iters;
    prm["divergence_cap"] = cfg.divergence_cap;
    const IterationReport r = solve(grid, p, cfg);
    const PeriodicProfile u = r.final_u();
    io::write_profile_csv(manifest.output(".profile.csv"), u);
    io::write_history_csv(manifest.output(".history.csv"), r);
    auto& res = manifest.results();
    res["verdict"] = to_string(r.verdict);
    res["iterations"] = r.iterations;
    res["q_out"] = p.q();
    if (r.converged()) {
      res["mass"] = mass(u);
      res["u_min"] = u.min();
      res["u_max"] = u.max();
      res["residual"] = residual(u, p).values.lpNorm<Eigen::Infinity>();
    } else {
      res["max_abs_u"] = r.max_u_history.back();
      if (!r.failure.empty()) res["failure"] = r.failure;
    }
    manifest.write();
    std::cout << to_string(r.verdict) << " after " << r.iterations << " iterations\n";
    return iteration_exit(r.verdict);
  }

  // Newton / collocation.
  const CollocationOperators ops(grid);
  NewtonConfig cfg;
  cfg.tol = o.tol.value_or(1e-12);
  prm["tol"] = cfg.tol;
  const NewtonReport r = [&] {
    if (o.mass) {
      cfg.mass_target = *o.mass;
      if (o.guess == "zero") return seed_at_mass(ops, o.omega, *o.mass, cfg);
      const double q0 = o.q.value_or(o.omega * *o.mass / (2.0 * std::numbers::pi));
      const ModelParams p(o.omega, q0);
      const Eigen::VectorXd v = guess_profile(o.guess, grid, p).value();
      return newton_solve(ops, p, cfg, PeriodicProfile(grid, (v.array() + p.shift()).matrix()));
    }
    const ModelParams p(o.omega, *o.q);
    PeriodicProfile u0 = approx_steady(grid, p);
    if (auto v = guess_profile(o.guess, grid, p)) u0.values = v->array() + p.shift();
    return newton_solve(ops, p, cfg, u0);
  }();
  io::write_profile_csv(manifest.output(".profile.csv"), r.solution);
  {
    io::CsvWriter hist(manifest.output(".history.csv"), {"iter", "diff"});
    for (std::size_t i = 0; i < r.residual_history.size(); ++i)
      hist.row({std::to_string(i), io::fmt(r.residual_history[i])});
  }
  auto& res = manifest.results();
  res["verdict"] = to_string(r.verdict);
  res["steps"] = r.steps;
  res["q_out"] = r.q_out;
  res["residual"] = r.residual_norm;
  res["mass"] = mass(r.solution);
  res["u_min"] = r.solution.min();
  res["u_max"] = r.solution.max();
  manifest.write();
  std::cout << to_string(r.verdict) << ", q = " << io::fmt(r.q_out) << '\n';
  if (r.converged()) return 0;
  return r.verdict == NewtonVerdict::singular_jacobian ? kExitDiverged : kExitMaxIters;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  std::optional<double> q;
  std::string omega_range;
  std::string q_range;
  bool log_spacing = false;
  bool bisect = false;
  std::optional<double> bisect_hi;
  double bisect_width = 1e-3;
  int n_points = 1024;
  double tol = 1e-10;
  int max_iters = 2000;
  int jobs = 1;
  std::string out = "thinfilm";
};

int run_sweep(const SweepOptions& o) {
  if (o.omega_range.empty()) throw UsageError("--omega-range is required");
  const Range wr = parse_range(o.omega_range, "--omega-range");
  if (o.q && !o.q_range.empty()) throw UsageError("give either --q or --q-range, not both");
  if (!o.q && o.q_range.empty()) throw UsageError("--q or --q-range is required");
  if (o.bisect && !o.q) throw UsageError("--bisect needs a fixed --q");
  if (o.jobs < 1) throw UsageError("--jobs must be >= 1");

  ProbeConfig pc;
  pc.n_points = o.n_points;
  pc.tol = o.tol;
  pc.max_iters = o.max_iters;
  Manifest manifest("sweep", resolve_prefix(o.out));
  auto& prm = manifest.params();
  prm["omega_range"] = o.omega_range;
  prm["log_spacing"] = o.log_spacing;
  prm["n_points"] = pc.n_points;
  prm["tol"] = pc.tol;
  prm["max_iters"] = pc.max_iters;
  prm["divergence_cap"] = pc.divergence_cap;
  prm["jobs"] = o.jobs;

  const AxisRange omega_axis{wr.lo, wr.hi, wr.count, o.log_spacing};
  std::vector<Probe> probes;
  if (o.q) {
    prm["q"] = *o.q;
    probes = sweep_omega(*o.q, omega_axis.values(), pc, o.jobs);
  } else {
    const Range qr = parse_range(o.q_range, "--q-range");
    prm["q_range"] = o.q_range;
    const ScanGrid g = scan_grid(omega_axis, AxisRange{qr.lo, qr.hi, qr.count, o.log_spacing}, pc, o.jobs);
    probes = g.cells;
  }
  io::write_probes_csv(manifest.output(".sweep.csv"), probes);

  int converged = 0, above_bound = 0;
  for (const auto& p : probes) {
    converged += p.converged();
    above_bound += p.converged() && p.q > nonexistence_flux(p.omega);
  }
  auto& res = manifest.results();
  res["probes"] = probes.size();
  res["converged"] = converged;
  res["converged_above_nonexistence_bound"] = above_bound;

  if (o.bisect) {
    const double hi = o.bisect_hi.value_or(wr.hi);
    prm["bisect_hi"] = hi;
    prm["bisect_width"] = o.bisect_width;
    try {
      const ThresholdScan scan = bisect_threshold(*o.q, theoretical_omega(*o.q), hi, pc, o.bisect_width);
      io::write_probes_csv(manifest.output(".bisect.csv"), scan.probes);
      res["omega_empirical"] = scan.omega_empirical;
      res["omega_theoretical"] = scan.omega_theoretical;
      res["last_converged_mass"] = scan.last_converged.mass;
      res["last_converged_u_min"] = scan.last_converged.u_min;
      res["last_converged_u_max"] = scan.last_converged.u_max;
    } catch (const ParameterError& e) {
      manifest.write();
      std::cerr << "bisection: " << e.what() << '\n';
      return kExitSeedFailed;
    }
  }
  manifest.write();
  std::cout << converged << "/" << probes.size() << " probes converged\n";
  return 0;
}

// ---------------------------------------------------------------- stability

struct StabilityOptions {
  std::string profile;
  std::optional<double> omega;
  std::optional<double> q;
  std::optional<double> mass;
  int n_points = 256;
  int solve_points = 256;
  bool dominant_only = false;
  std::string out = "thinfilm";
};

int run_stability(const StabilityOptions& o) {
  if (!o.omega) throw UsageError("--omega is required");
  Manifest manifest("stability", resolve_prefix(o.out));
  auto& prm = manifest.params();
  prm["omega"] = *o.omega;
  prm["n_points"] = o.n_points;
  prm["mode"] = o.dominant_only ? "dominant" : "full";

  PeriodicProfile u(Grid(8));
  double q = 0.0;
  if (!o.profile.empty()) {
    if (!o.q) throw UsageError("--profile needs --q");
    q = *o.q;
    prm["profile"] = o.profile;
    try {
      u = io::read_profile_csv(o.profile);
    } catch (const Error& e) {
      std::cerr << e.what() << '\n';
      return kExitNoInput;
    }
  } else if (o.mass) {
    prm["mass"] = *o.mass;
    prm["solve_points"] = o.solve_points;
    const CollocationOperators ops{Grid(o.solve_points)};
    NewtonConfig nc;
    nc.tol = 1e-11;
    const NewtonReport r = seed_at_mass(ops, *o.omega, *o.mass, nc);
    if (!r.converged()) {
      std::cerr << "mass-constrained seed did not converge\n";
      return kExitSeedFailed;
    }
    u = r.solution;
    q = r.q_out;
  } else if (o.q) {
    prm["solve_points"] = o.solve_points;
    IterationConfig ic;
    ic.max_iters = 5000;
    const IterationReport r = solve(Grid(o.solve_points), ModelParams(*o.omega, *o.q), ic);
    if (!r.converged()) {
      std::cerr << "spectral iteration did not converge at the requested (omega, q)\n";
      return kExitSeedFailed;
    }
    u = r.final_u();
    q = *o.q;
  } else {
    throw UsageError("give --profile FILE, --mass M or --q Q");
  }
  prm["q"] = q;
  const ModelParams p(*o.omega, q);
  auto& res = manifest.results();
  res["q"] = q;
  res["mass"] = mass(u);

  if (o.dominant_only) {
    const Grid grid(o.n_points);
    const PeriodicProfile v(grid, resample(u.grid, u.values, grid).array() - p.shift());
    const auto pw = power_iteration(v, p);
    res["dominant"] = pw.eigenvalue;
    res["dominant_modulus"] = std::abs(pw.eigenvalue);
    res["power_iterations"] = pw.iterations;
    res["power_converged"] = pw.converged;
    res["fate"] = std::abs(pw.eigenvalue) < 1.0 ? "attracting" : "repelling";
    manifest.write();
    std::cout << "dominant eigenvalue " << io::fmt(pw.eigenvalue) << '\n';
    return 0;
  }
  const SpectrumReport s = spectrum_on_grid(u, p, o.n_points);
  io::write_spectrum_csv(manifest.output(".spectrum.csv"), s);
  res["dominant_re"] = s.dominant.real();
  res["dominant_im"] = s.dominant.imag();
  res["dominant_modulus"] = s.dominant_modulus;
  res["stable"] = s.stable;
  res["fate"] = to_string(predict_iteration_fate(s));
  if (s.power_estimate) res["power_estimate"] = *s.power_estimate;
  manifest.write();
  std::cout << "dominant |lambda| = " << io::fmt(s.dominant_modulus) << " (" << to_string(predict_iteration_fate(s))
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------- continue

struct ContinueOptions {
  std::vector<std::string> fix;
  std::optional<double> seed_q;
  std::optional<double> seed_mass;
  std::optional<double> seed_omega;
  int n_points = 128;
  double step = 0.02;
  double max_step = 0.2;
  int max_points = 400;
  int direction = 0;
  double mass_min = 1e-3;
  double mass_max = 5.0;
  double omega_min = 1e-3;
  std::optional<double> report_q;
  std::string out = "thinfilm";
};

int run_continue(const ContinueOptions& o) {
  if (o.fix.size() != 2) throw UsageError("--fix expects {omega|mass} VALUE");
  double value = 0.0;
  try {
    value = std::stod(o.fix[1]);
  } catch (const std::exception&) {
    throw UsageError("--fix value must be a number");
  }
  if (!(value > 0.0)) throw UsageError("--fix value must be positive");
  const bool fix_omega = o.fix[0] == "omega";
  if (!fix_omega && o.fix[0] != "mass") throw UsageError("--fix expects omega or mass");

  const CollocationOperators ops{Grid(o.n_points)};
  Manifest manifest("continue", resolve_prefix(o.out));
  auto& prm = manifest.params();
  prm["fix"] = o.fix[0];
  prm["value"] = value;
  prm["n_points"] = o.n_points;
  prm["step"] = o.step;
  prm["max_step"] = o.max_step;
  prm["max_points"] = o.max_points;

  NewtonConfig nc;
  nc.tol = 1e-11;
  ContinuationConfig cc;
  cc.initial_step = o.step;
  cc.max_step = o.max_step;
  cc.max_points = o.max_points;

  BranchPoint start;
  if (fix_omega) {
    const double omega = value;
    std::optional<NewtonReport> seed;
    if (o.seed_mass) {
      prm["seed_mass"] = *o.seed_mass;
      seed = seed_at_mass(ops, omega, *o.seed_mass, nc);
    } else {
      const double q0 = o.seed_q.value_or(0.1 * nonexistence_flux(omega));
      prm["seed_q"] = q0;
      try {
        seed = seed_small_amplitude(ops, ModelParams(omega, q0), nc);
      } catch (const Error& e) {
        std::cerr << "seed: " << e.what() << '\n';
        return kExitSeedFailed;
      }
    }
    if (!seed->converged()) {
      std::cerr << "seed solve did not converge\n";
      return kExitSeedFailed;
    }
    start = make_branch_point(seed->solution, ModelParams(omega, seed->q_out), true);
    cc.direction = o.direction;
    cc.mass_min = o.mass_min;
    cc.mass_max = o.mass_max;
    prm["mass_min"] = o.mass_min;
    prm["mass_max"] = o.mass_max;
  } else {
    const double omega0 = o.seed_omega.value_or(1.0);
    prm["seed_omega"] = omega0;
    const NewtonReport seed = seed_at_mass(ops, omega0, value, nc);
    if (!seed.converged()) {
      std::cerr << "seed solve did not converge\n";
      return kExitSeedFailed;
    }
    start = make_branch_point(seed.solution, ModelParams(omega0, seed.q_out), true);
    cc.direction = o.direction != 0 ? o.direction : -1;
    cc.param_min = o.omega_min;
    prm["omega_min"] = o.omega_min;
  }
  prm["direction"] = cc.direction;

  auto trace = [&](const ContinuationConfig& c) {
    return fix_omega ? trace_fixed_omega(ops, value, start, c) : trace_fixed_mass(ops, value, start, c);
  };
  io::CsvWriter csv(manifest.output(".branch.csv"), io::branch_header());
  Branch branch;
  if (cc.direction != 0) {
    cc.on_point = [&](const BranchPoint& b) { csv.row(io::branch_row(b)); };
    branch = trace(cc);
  } else {
    // Both directions from the seed; rows are written once the branch is joined.
    ContinuationConfig back = cc, fwd = cc;
    back.direction = -1;
    fwd.direction = +1;
    branch = join_branches(trace(back), trace(fwd));
    for (const BranchPoint& b : branch.points) csv.row(io::branch_row(b));
  }

  auto& res = manifest.results();
  res["points"] = branch.points.size();
  res["steps_rejected"] = branch.steps_rejected;
  res["termination"] = branch.termination;
  json folds = json::array();
  for (const Fold& f : detect_folds(branch))
    folds.push_back({{"index", f.index}, {"parameter", f.parameter}, {"label", f.label}});
  res["folds"] = folds;
  if (o.report_q && fix_omega) {
    prm["report_q"] = *o.report_q;
    json sols = json::array();
    for (const BranchPoint& b : solutions_at_flux(ops, branch, *o.report_q, nc))
      sols.push_back({{"q", b.q}, {"mass", b.mass}, {"u_min", b.u_min}, {"u_max", b.u_max}});
    res["solutions_at_q"] = sols;
  }
  manifest.write();
  std::cout << branch.points.size() << " points, " << folds.size() << " folds (" << branch.termination << ")\n";
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
  bool table1 = false;
  double omega = 0.2;
  double q = 0.001153;
  int n_points = 4096;
  double tol = 1e-10;
  int max_iters = 500;
  std::vector<std::string> guesses;
  std::vector<double> gammas;
  std::string out = "thinfilm";
};

int run_bench(BenchOptions o) {
  if (o.table1) {
    o.omega = 0.2;
    o.q = 0.001153;
    o.n_points = 4096;
    o.tol = 1e-10;
  }
  if (o.guesses.empty()) o.guesses = {"twoqw", "cos", "sech", "sin"};
  if (o.gammas.empty()) o.gammas = {-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75};
  std::vector<InitialGuess> kinds;
  for (const auto& g : o.guesses) {
    if (g == "twoqw") kinds.push_back(InitialGuess::two_q_over_omega);
    else if (g == "cos") kinds.push_back(InitialGuess::cos);
    else if (g == "sin") kinds.push_back(InitialGuess::sin);
    else if (g == "sech") kinds.push_back(InitialGuess::sech);
    else if (g == "zero") kinds.push_back(InitialGuess::zero);
    else throw UsageError("unknown guess " + g);
  }
  const Grid grid(o.n_points);
  const ModelParams p(o.omega, o.q);
  const Eigen::MatrixXi counts = iteration_table(grid, p, kinds, o.gammas, o.tol, o.max_iters);

  Manifest manifest("bench", resolve_prefix(o.out));
  auto& prm = manifest.params();
  prm["omega"] = o.omega;
  prm["q"] = o.q;
  prm["n_points"] = o.n_points;
  prm["tol"] = o.tol;
  prm["max_iters"] = o.max_iters;
  prm["guesses"] = o.guesses;
  prm["gammas"] = o.gammas;

  std::vector<std::string> header{"guess"};
  for (double g : o.gammas) header.push_back(io::fmt(g));
  io::CsvWriter csv(manifest.output(".table1.csv"), header);
  for (Eigen::Index r = 0; r < counts.rows(); ++r) {
    std::vector<std::string> row{o.guesses[static_cast<std::size_t>(r)]};
    for (Eigen::Index c = 0; c < counts.cols(); ++c) row.push_back(std::to_string(counts(r, c)));
    csv.row(row);
    std::cout << row[0];
    for (std::size_t i = 1; i < row.size(); ++i) std::cout << '\t' << row[i];
    std::cout << '\n';
  }
  manifest.write();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady states of the thin-film equation on a rotating cylinder"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SolveOptions so;
  auto* solve_cmd = app.add_subcommand("solve", "Solve for one steady state");
  solve_cmd->add_option("--omega", so.omega, "Rotation rate")->required();
  solve_cmd->add_option("--q", so.q, "Flux");
  solve_cmd->add_option("--n-points", so.n_points, "Grid size (even; default 4096 spectral, 256 newton)");
  solve_cmd->add_option("--tol", so.tol, "Tolerance (spectral: successive difference; newton: residual)");
  solve_cmd->add_option("--gamma", so.gamma, "Renormalization exponent");
  solve_cmd->add_option("--max-iters", so.max_iters, "Iteration budget");
  solve_cmd->add_option("--divergence-cap", so.divergence_cap, "max|v| treated as divergence");
  solve_cmd->add_option("--guess", so.guess, "zero|twoqw|cos|sin|sech|file:PATH");
  solve_cmd->add_option("--method", so.method, "spectral|newton");
  solve_cmd->add_option("--mass", so.mass, "Mass constraint (newton only)");
  solve_cmd->add_option("--out", so.out, "Output prefix");

  SweepOptions sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Convergence scan over (omega, q)");
  sweep_cmd->add_option("--q", sw.q, "Fixed flux");
  sweep_cmd->add_option("--omega-range", sw.omega_range, "LO:HI:COUNT");
  sweep_cmd->add_option("--q-range", sw.q_range, "LO:HI:COUNT (grid scan)");
  sweep_cmd->add_flag("--log-spacing", sw.log_spacing, "Log-spaced samples");
  sweep_cmd->add_flag("--bisect", sw.bisect, "Bisect the convergence threshold at fixed q");
  sweep_cmd->add_option("--bisect-hi", sw.bisect_hi, "Upper (converging) end of the bisection bracket");
  sweep_cmd->add_option("--bisect-width", sw.bisect_width, "Relative bracket width");
  sweep_cmd->add_option("--n-points", sw.n_points, "Grid size");
  sweep_cmd->add_option("--tol", sw.tol, "Tolerance");
  sweep_cmd->add_option("--max-iters", sw.max_iters, "Iteration budget per probe");
  sweep_cmd->add_option("--jobs", sw.jobs, "Worker threads");
  sweep_cmd->add_option("--out", sw.out, "Output prefix");

  StabilityOptions st;
  auto* stab_cmd = app.add_subcommand("stability", "Spectrum of the linearized iteration");
  stab_cmd->add_option("--profile", st.profile, "theta,u CSV");
  stab_cmd->add_option("--omega", st.omega, "Rotation rate");
  stab_cmd->add_option("--q", st.q, "Flux");
  stab_cmd->add_option("--mass", st.mass, "Solve the mass-constrained steady state first");
  stab_cmd->add_option("--n-points", st.n_points, "Grid of the discretized operator");
  stab_cmd->add_option("--solve-points", st.solve_points, "Grid used to compute the steady state");
  auto* full = stab_cmd->add_flag("--full-spectrum", "Dense eigendecomposition (default)");
  stab_cmd->add_flag("--dominant", st.dominant_only, "Power iteration only")->excludes(full);
  stab_cmd->add_option("--out", st.out, "Output prefix");

  ContinueOptions co;
  auto* cont_cmd = app.add_subcommand("continue", "Pseudo-arclength branch tracing");
  cont_cmd->add_option("--fix", co.fix, "omega VALUE | mass VALUE")->expected(2)->required();
  cont_cmd->add_option("--seed-q", co.seed_q, "Flux of the small-amplitude seed (fixed omega)");
  cont_cmd->add_option("--seed-mass", co.seed_mass, "Mass of the seed (fixed omega)");
  cont_cmd->add_option("--seed-omega", co.seed_omega, "Starting omega (fixed mass)");
  cont_cmd->add_option("--n-points", co.n_points, "Grid size");
  cont_cmd->add_option("--step", co.step, "Initial arclength step");
  cont_cmd->add_option("--max-step", co.max_step, "Largest arclength step");
  cont_cmd->add_option("--max-points", co.max_points, "Branch length limit");
  cont_cmd->add_option("--direction", co.direction, "+1 or -1 along the continuation parameter, 0 for both (fixed omega)");
  cont_cmd->add_option("--mass-min", co.mass_min, "Stop below this mass (fixed omega)");
  cont_cmd->add_option("--mass-max", co.mass_max, "Stop above this mass (fixed omega)");
  cont_cmd->add_option("--omega-min", co.omega_min, "Stop below this omega (fixed mass)");
  cont_cmd->add_option("--report-q", co.report_q, "List every branch solution at this flux");
  cont_cmd->add_option("--out", co.out, "Output prefix");

  BenchOptions bo;
  auto* bench_cmd = app.add_subcommand("bench", "Iteration counts over initial guesses and gamma");
  bench_cmd->add_flag("--table1", bo.table1, "omega=0.2, q=0.001153, 4096 points, tol 1e-10");
  bench_cmd->add_option("--omega", bo.omega, "Rotation rate");
  bench_cmd->add_option("--q", bo.q, "Flux");
  bench_cmd->add_option("--n-points", bo.n_points, "Grid size");
  bench_cmd->add_option("--tol", bo.tol, "Tolerance");
  bench_cmd->add_option("--max-iters", bo.max_iters, "Iteration budget");
  bench_cmd->add_option("--guesses", bo.guesses, "twoqw cos sech sin zero");
  bench_cmd->add_option("--gammas", bo.gammas, "Renormalization exponents");
  bench_cmd->add_option("--out", bo.out, "Output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (*solve_cmd) return run_solve(so);
    if (*sweep_cmd) return run_sweep(sw);
    if (*stab_cmd) return run_stability(st);
    if (*cont_cmd) return run_continue(co);
    if (*bench_cmd) return run_bench(bo);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const io::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 70;
  }
  return kExitUsage;
}
