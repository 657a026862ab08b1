#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "thinfilm/errors.hpp"
#include "thinfilm/grid.hpp"
#include "thinfilm/model.hpp"
#include "thinfilm/spectral_iter.hpp"

namespace thinfilm {

/// Largest grid for which spectrum() runs the dense eigensolver.
inline constexpr int kMaxDenseSpectrum = 2048;

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;  // sorted by decreasing modulus
  double dominant_modulus = 0.0;
  std::complex<double> dominant = 0.0;
  bool stable = true;
  int n_points = 0;
  /// Power-iteration estimate of the dominant eigenvalue, when it converged.
  std::optional<double> power_estimate;
};

enum class IterationFate { attracting, repelling };

inline const char* to_string(IterationFate f) { return f == IterationFate::attracting ? "attracting" : "repelling"; }

/// (D³ + D + (ω⁴/q³) I)⁻¹ diag(F′(v)) with dense band-limited D, applied through
/// one LU factorization of the bracket.
inline Eigen::MatrixXd linearized_operator(const PeriodicProfile& v, const ModelParams& p) {
  const Grid& grid = v.grid;
  const Eigen::VectorXd fp = detail::nonlinear_F_prime(v.values, p);
  Eigen::MatrixXd bracket = diff_matrix(grid, 3) + diff_matrix(grid, 1);
  bracket.diagonal().array() += p.c();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(bracket);
  Eigen::MatrixXd rhs = fp.asDiagonal();
  return lu.solve(rhs);
}

/// Matrix-free action p ↦ L⁻¹(F′(v) p) through the transform path.
inline Eigen::VectorXd apply_linearized(const PeriodicProfile& v, const ModelParams& p, const Eigen::VectorXd& x) {
  const Eigen::VectorXd fp = detail::nonlinear_F_prime(v.values, p);
  const Eigen::VectorXd prod = fp.cwiseProduct(x);
  return synthesize(apply_Linv(analyze(v.grid, prod), p));
}

struct PowerIterationResult {
  double eigenvalue = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Power iteration for a real dominant eigenvalue of the matrix-free map.
/// Stops when the Rayleigh quotient changes by less than tol between sweeps.
inline PowerIterationResult power_iteration(const PeriodicProfile& v, const ModelParams& p, double tol = 1e-10,
                                            int max_iters = 10000, unsigned seed = 12345) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(v.size());
  for (auto& xi : x) xi = normal(rng);
  x.normalize();
  PowerIterationResult out;
  double previous = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    Eigen::VectorXd y = apply_linearized(v, p, x);
    const double rq = x.dot(y);
    const double norm = y.norm();
    out.iterations = it;
    out.eigenvalue = rq;
    if (norm == 0.0 || !std::isfinite(norm)) break;
    x = y / norm;
    if (it > 1 && std::abs(rq - previous) < tol) {
      out.converged = true;
      break;
    }
    previous = rq;
  }
  return out;
}

/// Dense eigendecomposition of the linearized iteration operator (N ≤ 2048),
/// with the dominant eigenvalue cross-checked by power iteration.
inline SpectrumReport spectrum(const PeriodicProfile& v, const ModelParams& p, bool cross_check = true) {
  if (v.size() > kMaxDenseSpectrum)
    throw ParameterError("dense spectrum limited to " + std::to_string(kMaxDenseSpectrum) + " points");
  SpectrumReport report;
  report.n_points = v.size();
  const Eigen::MatrixXd a = linearized_operator(v, p);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
  if (solver.info() != Eigen::Success) throw EigenSolverError("eigensolver failed to converge");
  const Eigen::VectorXcd ev = solver.eigenvalues();
  report.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::stable_sort(report.eigenvalues.begin(), report.eigenvalues.end(),
                   [](auto a, auto b) { return std::abs(a) > std::abs(b); });
  if (!report.eigenvalues.empty()) {
    report.dominant = report.eigenvalues.front();
    report.dominant_modulus = std::abs(report.dominant);
  }
  report.stable = report.dominant_modulus < 1.0;
  if (cross_check && report.dominant_modulus > 0.0) {
    const auto pw = power_iteration(v, p);
    if (pw.converged) report.power_estimate = pw.eigenvalue;
  }
  return report;
}

/// Spectrum at a thickness profile u resolved on a finer grid, carried onto
/// n_points by band-limited interpolation before the operator is assembled.
inline SpectrumReport spectrum_on_grid(const PeriodicProfile& u, const ModelParams& p, int n_points,
                                       bool cross_check = true) {
  const Grid grid(n_points);
  const Eigen::VectorXd v = resample(u.grid, u.values, grid).array() - p.shift();
  return spectrum(PeriodicProfile(grid, v), p, cross_check);
}

/// Perturbations decay under the iteration iff the spectral radius is below 1;
/// radius exactly 1 counts as repelling.
inline IterationFate predict_iteration_fate(const SpectrumReport& report) {
  return report.dominant_modulus < 1.0 ? IterationFate::attracting : IterationFate::repelling;
}

}  // namespace thinfilm
