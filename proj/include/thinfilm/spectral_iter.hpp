#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thinfilm/errors.hpp"
#include "thinfilm/grid.hpp"
#include "thinfilm/model.hpp"

namespace thinfilm {

struct IterationConfig {
  double tol = 1e-10;
  int max_iters = 500;
  double gamma = 0.0;
  double divergence_cap = 1e5;
  /// Starting v = u − q/ω; zero when empty.
  std::optional<Eigen::VectorXd> initial_guess;
  /// Record Λ_j even when γ = 0.
  bool record_lambda = false;
};

enum class Verdict { converged, diverged, max_iters_reached };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::diverged: return "diverged";
    default: return "max_iters_reached";
  }
}

struct IterationReport {
  Verdict verdict = Verdict::max_iters_reached;
  int iterations = 0;
  /// max_j |v^{(i)} − v^{(i−1)}| for i = 1..iterations.
  std::vector<double> diff_history;
  /// max_j |u^{(i)}| for i = 0..iterations.
  std::vector<double> max_u_history;
  std::vector<std::complex<double>> lambda_history;
  PeriodicProfile final_v;
  double shift = 0.0;
  /// Set when the run stopped on a touchdown or non-finite sample.
  std::string failure;

  bool converged() const noexcept { return verdict == Verdict::converged; }
  PeriodicProfile final_u() const {
    return {final_v.grid, (final_v.values.array() + shift).matrix()};
  }
};

/// Symbol of L = ∂³ + ∂ + ω⁴/q³ at slot idx: −ik³ + ik + c. The Nyquist mode
/// carries no odd derivative, so its symbol is c.
inline std::complex<double> iteration_symbol(int n, int idx, const ModelParams& p) {
  if (idx == n / 2) return p.c();
  const double k = idx < n / 2 ? idx : idx - n;
  return {p.c(), k - k * k * k};
}

inline SpectralCoeffs apply_Linv(const SpectralCoeffs& c, const ModelParams& p) {
  SpectralCoeffs out = c;
  const int n = c.size();
  for (int i = 0; i < n; ++i) out.values[i] /= iteration_symbol(n, i, p);
  return out;
}

/// Λ = Σ symbol_k |v̂_k|² / Σ r̂_k conj(v̂_k), where r̂ holds the coefficients
/// of the full right-hand side sin θ + F(v). With the forcing included Λ → 1
/// at a fixed point, so Λ^γ leaves solutions invariant.
/// Throws DegenerateDenominator when |Σ r̂_k conj(v̂_k)| ≤ 1e−300.
inline std::complex<double> renorm_constant(const SpectralCoeffs& v, const SpectralCoeffs& rhs_hat,
                                            const ModelParams& p) {
  if (v.size() != rhs_hat.size()) throw LengthMismatch("renorm_constant: coefficient sizes differ");
  const int n = v.size();
  std::complex<double> num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += iteration_symbol(n, i, p) * std::norm(v.values[i]);
    den += rhs_hat.values[i] * std::conj(v.values[i]);
  }
  if (!(std::abs(den) > 1e-300)) throw DegenerateDenominator("renormalization denominator vanished");
  return num / den;
}

/// Coefficients of sin θ + F(v), with the forcing placed exactly at k = ±1.
inline SpectralCoeffs iteration_rhs(const Grid& grid, const Eigen::VectorXd& v, const ModelParams& p) {
  SpectralCoeffs rhs = analyze(grid, detail::nonlinear_F(v, p));
  rhs.at(1) += 1.0 / std::complex<double>(0.0, 2.0);
  rhs.at(-1) -= 1.0 / std::complex<double>(0.0, 2.0);
  return rhs;
}

struct StepResult {
  Eigen::VectorXd v;
  std::optional<std::complex<double>> lambda;
};

namespace detail {

inline StepResult iterate_step(const Grid& grid, const Eigen::VectorXd& v, const ModelParams& p,
                               double gamma, bool want_lambda) {
  const SpectralCoeffs rhs = iteration_rhs(grid, v, p);
  SpectralCoeffs next = apply_Linv(rhs, p);
  StepResult out;
  if (gamma != 0.0 || want_lambda) {
    std::complex<double> lambda = 1.0;
    try {
      lambda = renorm_constant(analyze(grid, v), rhs, p);
    } catch (const DegenerateDenominator&) {
      lambda = 1.0;
    }
    out.lambda = lambda;
    if (gamma != 0.0) next.values *= std::pow(lambda, gamma);
  }
  out.v = synthesize(next);
  return out;
}

}  // namespace detail

/// One update v ← Λ^γ L⁻¹[sin θ + F(v)] = Λ^γ [(q³/ω⁴) sin θ + L⁻¹F(v)]; Λ^γ ≡ 1 when γ = 0.
inline PeriodicProfile iterate_step(const PeriodicProfile& v, const ModelParams& p, double gamma = 0.0) {
  return {v.grid, detail::iterate_step(v.grid, v.values, p, gamma, false).v};
}

/// Fixed-point iteration until successive iterates differ by at most tol in
/// max-norm, max|v| exceeds the divergence cap (or goes non-finite), or the
/// iteration budget runs out.
inline IterationReport solve(const Grid& grid, const ModelParams& p, const IterationConfig& cfg = {}) {
  if (p.n_exp() != 3) throw ParameterError("the spectral iteration is derived for n = 3 only");
  if (!(cfg.tol > 0.0) || cfg.max_iters < 1) throw ParameterError("tol must be > 0 and max_iters >= 1");

  IterationReport report{Verdict::max_iters_reached, 0, {}, {}, {}, PeriodicProfile(grid), p.shift(), {}};
  Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.size());
  if (cfg.initial_guess) {
    detail::check_length(grid, cfg.initial_guess->size(), "initial guess");
    v = *cfg.initial_guess;
  }
  report.max_u_history.push_back((v.array() + p.shift()).abs().maxCoeff());

  for (int it = 1; it <= cfg.max_iters; ++it) {
    StepResult step;
    try {
      step = detail::iterate_step(grid, v, p, cfg.gamma, cfg.record_lambda);
    } catch (const TouchdownError& e) {
      report.verdict = Verdict::diverged;
      report.failure = e.what();
      break;
    }
    if (step.lambda) report.lambda_history.push_back(*step.lambda);
    report.iterations = it;
    const double diff = (step.v - v).lpNorm<Eigen::Infinity>();
    v = std::move(step.v);
    report.diff_history.push_back(diff);
    report.max_u_history.push_back((v.array() + p.shift()).abs().maxCoeff());
    if (!v.allFinite() || !std::isfinite(diff)) {
      report.verdict = Verdict::diverged;
      report.failure = "non-finite iterate";
      break;
    }
    if (v.lpNorm<Eigen::Infinity>() > cfg.divergence_cap) {
      report.verdict = Verdict::diverged;
      report.failure = "divergence cap exceeded";
      break;
    }
    if (diff <= cfg.tol) {
      report.verdict = Verdict::converged;
      break;
    }
  }
  report.final_v.values = std::move(v);
  return report;
}

/// Named starting profiles, expressed as v = u − q/ω.
enum class InitialGuess { zero, two_q_over_omega, cos, sin, sech };

inline Eigen::VectorXd initial_guess(InitialGuess kind, const Grid& grid, const ModelParams& p) {
  const double amp = 1.0 / p.c();
  switch (kind) {
    case InitialGuess::zero: return Eigen::VectorXd::Zero(grid.size());
    case InitialGuess::two_q_over_omega: return Eigen::VectorXd::Constant(grid.size(), p.shift());
    case InitialGuess::cos: return grid.sample([&](double t) { return amp * std::cos(t); });
    case InitialGuess::sin: return grid.sample([&](double t) { return amp * std::sin(t); });
    case InitialGuess::sech: return grid.sample([&](double t) { return amp / std::cosh(t); });
  }
  return Eigen::VectorXd::Zero(grid.size());
}

/// Iteration counts for every (initial guess, γ) pair: rows follow `guesses`,
/// columns follow `gammas`. Cells of runs that did not converge hold −1.
inline Eigen::MatrixXi iteration_table(const Grid& grid, const ModelParams& p, const std::vector<InitialGuess>& guesses,
                                       const std::vector<double>& gammas, double tol = 1e-10, int max_iters = 500) {
  Eigen::MatrixXi counts(static_cast<Eigen::Index>(guesses.size()), static_cast<Eigen::Index>(gammas.size()));
  for (std::size_t r = 0; r < guesses.size(); ++r)
    for (std::size_t c = 0; c < gammas.size(); ++c) {
      IterationConfig cfg;
      cfg.tol = tol;
      cfg.max_iters = max_iters;
      cfg.gamma = gammas[c];
      cfg.initial_guess = initial_guess(guesses[r], grid, p);
      const IterationReport rep = solve(grid, p, cfg);
      counts(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rep.converged() ? rep.iterations : -1;
    }
  return counts;
}

}  // namespace thinfilm
