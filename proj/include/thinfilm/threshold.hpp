#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "thinfilm/errors.hpp"
#include "thinfilm/grid.hpp"
#include "thinfilm/model.hpp"
#include "thinfilm/spectral_iter.hpp"

namespace thinfilm {

/// ω below which no positive steady state exists at flux q: (3/2) q^{2/3}.
inline double theoretical_omega(double q) {
  if (!(q > 0.0)) throw ParameterError("theoretical_omega: q must be positive");
  return 1.5 * std::cbrt(q * q);
}

/// "Failed to converge in a reasonable number of iterations": 2000 sweeps at
/// tol 1e−10 on 2¹⁰ points, or the divergence cap.
struct ProbeConfig {
  int n_points = 1024;
  double tol = 1e-10;
  int max_iters = 2000;
  double divergence_cap = IterationConfig{}.divergence_cap;
};

/// One cold-started spectral solve at (ω, q).
struct Probe {
  double q = 0.0;
  double omega = 0.0;
  Verdict verdict = Verdict::max_iters_reached;
  int iterations = 0;
  double u_min = std::nan("");
  double u_max = std::nan("");
  double mass = std::nan("");

  bool converged() const noexcept { return verdict == Verdict::converged; }
};

inline Probe run_probe(double omega, double q, const ProbeConfig& cfg = {}) {
  const Grid grid(cfg.n_points);
  const ModelParams p(omega, q);
  IterationConfig ic;
  ic.tol = cfg.tol;
  ic.max_iters = cfg.max_iters;
  ic.divergence_cap = cfg.divergence_cap;
  const IterationReport r = solve(grid, p, ic);
  Probe probe;
  probe.q = q;
  probe.omega = omega;
  probe.verdict = r.verdict;
  probe.iterations = r.iterations;
  if (r.converged()) {
    const PeriodicProfile u = r.final_u();
    probe.u_min = u.min();
    probe.u_max = u.max();
    probe.mass = mass(u);
  }
  return probe;
}

/// Runs `count` independent tasks on up to `jobs` threads; results land at
/// their own index, so output order never depends on scheduling.
template <typename Task>
void parallel_for(int count, int jobs, Task&& task) {
  jobs = std::clamp(jobs, 1, std::max(count, 1));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> workers;
  for (int t = 0; t < jobs; ++t)
    workers.emplace_back([&] {
      for (int i = next++; i < count; i = next++) task(i);
    });
}

inline std::vector<Probe> sweep_omega(double q, const std::vector<double>& omegas, const ProbeConfig& cfg = {},
                                      int jobs = 1) {
  std::vector<Probe> out(omegas.size());
  parallel_for(static_cast<int>(omegas.size()), jobs, [&](int i) { out[i] = run_probe(omegas[i], q, cfg); });
  return out;
}

struct ThresholdScan {
  double q_fixed = 0.0;
  /// Every probe in evaluation order (bracket ends first, then bisection midpoints).
  std::vector<Probe> probes;
  /// Smallest ω at which the iteration converged.
  double omega_empirical = 0.0;
  /// Largest ω at which it failed.
  double omega_failed = 0.0;
  double omega_theoretical = 0.0;
  /// Probe at omega_empirical (the last converged solution).
  Probe last_converged;
};

/// Bisection on ω for the convergence boundary of the cold-started iteration.
/// Requires failure at omega_lo and convergence at omega_hi; stops once
/// (hi − lo)/hi ≤ rel_width.
inline ThresholdScan bisect_threshold(double q, double omega_lo, double omega_hi, const ProbeConfig& cfg = {},
                                      double rel_width = 1e-3) {
  if (!(omega_lo > 0.0) || !(omega_hi > omega_lo)) throw ParameterError("bisect_threshold: need 0 < lo < hi");
  ThresholdScan scan;
  scan.q_fixed = q;
  scan.omega_theoretical = theoretical_omega(q);
  Probe lo = run_probe(omega_lo, q, cfg);
  Probe hi = run_probe(omega_hi, q, cfg);
  scan.probes = {lo, hi};
  if (lo.converged() || !hi.converged())
    throw ParameterError("bisect_threshold: bracket invalid (need failure at lo, convergence at hi)");
  while ((hi.omega - lo.omega) / hi.omega > rel_width) {
    Probe mid = run_probe(0.5 * (lo.omega + hi.omega), q, cfg);
    scan.probes.push_back(mid);
    (mid.converged() ? hi : lo) = mid;
  }
  scan.omega_empirical = hi.omega;
  scan.omega_failed = lo.omega;
  scan.last_converged = hi;
  return scan;
}

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  bool log = true;

  std::vector<double> values() const {
    if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw ParameterError("invalid range");
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      v[i] = log ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
    }
    return v;
  }
};

struct ScanGrid {
  std::vector<double> omegas;
  std::vector<double> qs;
  /// Row-major: cells[iq * omegas.size() + iw].
  std::vector<Probe> cells;

  const Probe& at(std::size_t iq, std::size_t iw) const { return cells[iq * omegas.size() + iw]; }
};

/// Convergence verdict on every (ω, q) cell; cells run independently.
inline ScanGrid scan_grid(const AxisRange& omega_range, const AxisRange& q_range, const ProbeConfig& cfg = {},
                          int jobs = 1) {
  ScanGrid grid{omega_range.values(), q_range.values(), {}};
  const std::size_t nw = grid.omegas.size();
  grid.cells.resize(nw * grid.qs.size());
  parallel_for(static_cast<int>(grid.cells.size()), jobs, [&](int i) {
    grid.cells[i] = run_probe(grid.omegas[i % nw], grid.qs[i / nw], cfg);
  });
  return grid;
}

}  // namespace thinfilm
