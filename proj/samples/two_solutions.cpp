// Two steady states with the same flux at omega = 0.09, and which one the
// spectral iteration finds.

#include <cstdio>

#include "thinfilm/thinfilm.hpp"

using namespace thinfilm;

int main() {
  const double omega = 0.09;
  const double q = 0.0114039;
  const Grid grid(256);
  const CollocationOperators ops(grid);

  NewtonConfig nc;
  nc.tol = 1e-11;
  const NewtonReport seed = seed_at_mass(ops, omega, 1.0, nc);
  if (!seed.converged()) {
    std::fprintf(stderr, "mass-constrained seed failed: %s\n", to_string(seed.verdict));
    return 1;
  }

  ContinuationConfig cc;
  cc.mass_min = 0.5;
  cc.mass_max = 1.5;
  const BranchPoint start = make_branch_point(seed.solution, ModelParams(omega, seed.q_out), true);
  cc.direction = -1;
  const Branch back = trace_fixed_omega(ops, omega, start, cc);
  cc.direction = +1;
  const Branch branch = join_branches(back, trace_fixed_omega(ops, omega, start, cc));

  for (const Fold& f : detect_folds(branch)) std::printf("fold at q = %.8f, mass = %.6f\n", f.parameter, f.label);

  std::printf("\nsteady states at q = %.7f:\n", q);
  for (const BranchPoint& b : solutions_at_flux(ops, branch, q, nc)) {
    const SpectrumReport s = spectrum(PeriodicProfile(grid, b.profile->values.array() - q / omega), ModelParams(omega, q));
    std::printf("  mass %.8f  u in [%.4f, %.4f]  |lambda| = %.6f (%s)\n", b.mass, b.u_min, b.u_max,
                s.dominant_modulus, to_string(predict_iteration_fate(s)));
  }

  IterationConfig ic;
  ic.max_iters = 2000;
  const IterationReport r = solve(grid, ModelParams(omega, q), ic);
  std::printf("\nspectral iteration from v = 0: %s after %d iterations", to_string(r.verdict), r.iterations);
  if (r.converged()) std::printf(", mass %.8f", mass(r.final_u()));
  std::printf("\n");
  return 0;
}
