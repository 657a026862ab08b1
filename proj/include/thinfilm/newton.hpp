#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thinfilm/errors.hpp"
#include "thinfilm/grid.hpp"
#include "thinfilm/model.hpp"

namespace thinfilm {

/// Dense band-limited operators for collocating the flux equation on a grid.
struct CollocationOperators {
  Grid grid;
  Eigen::MatrixXd d1;
  Eigen::MatrixXd d3;
  Eigen::VectorXd sin_theta;
  Eigen::VectorXd weights;

  explicit CollocationOperators(const Grid& g)
      : grid(g),
        d1(diff_matrix(g, 1)),
        d3(diff_matrix(g, 3)),
        sin_theta(g.theta().array().sin()),
        weights(quadrature_weights(g)) {}
};

struct NewtonConfig {
  double tol = 1e-12;
  int max_steps = 50;
  double damping = 0.5;
  int max_halvings = 30;
  /// When set, q becomes an unknown and ∫u dθ = mass_target is appended.
  std::optional<double> mass_target;
};

enum class NewtonVerdict { converged, stalled, singular_jacobian };

inline const char* to_string(NewtonVerdict v) {
  switch (v) {
    case NewtonVerdict::converged: return "converged";
    case NewtonVerdict::stalled: return "stalled";
    default: return "singular_jacobian";
  }
}

struct NewtonReport {
  NewtonVerdict verdict = NewtonVerdict::stalled;
  PeriodicProfile solution;
  double q_out = 0.0;
  double residual_norm = 0.0;
  int steps = 0;
  std::vector<double> residual_history;

  bool converged() const noexcept { return verdict == NewtonVerdict::converged; }
};

/// R_j = u_j³ (D³u + Du − sin θ)_j + ω u_j − q, with u^n for general n.
inline Eigen::VectorXd newton_residual(const CollocationOperators& ops, const Eigen::VectorXd& u, double q,
                                       const ModelParams& p) {
  detail::check_length(ops.grid, u.size(), "newton_residual");
  const Eigen::VectorXd inner = ops.d3 * u + ops.d1 * u - ops.sin_theta;
  return u.array().pow(p.n_exp()) * inner.array() + p.omega() * u.array() - q;
}

inline Eigen::VectorXd newton_residual(const PeriodicProfile& u, double q, const ModelParams& p) {
  return newton_residual(CollocationOperators(u.grid), u.values, q, p);
}

/// ∂R/∂u = diag(n u^{n−1}(D³u + Du − sin θ) + ω) + diag(u^n)(D³ + D).
/// With `bordered`, the matrix grows by the column ∂R/∂q = −1 and the row of
/// quadrature weights (the mass equation).
inline Eigen::MatrixXd newton_jacobian(const CollocationOperators& ops, const Eigen::VectorXd& u,
                                       const ModelParams& p, bool bordered = false) {
  detail::check_length(ops.grid, u.size(), "newton_jacobian");
  const int n = ops.grid.size();
  const int m = bordered ? n + 1 : n;
  const int e = p.n_exp();
  const Eigen::VectorXd inner = ops.d3 * u + ops.d1 * u - ops.sin_theta;
  const Eigen::ArrayXd un = u.array().pow(e);
  const Eigen::ArrayXd diag = e * u.array().pow(e - 1) * inner.array() + p.omega();

  Eigen::MatrixXd j(m, m);
  j.topLeftCorner(n, n) = un.matrix().asDiagonal() * (ops.d3 + ops.d1);
  j.topLeftCorner(n, n).diagonal() += diag.matrix();
  if (bordered) {
    j.topRightCorner(n, 1).setConstant(-1.0);
    j.bottomLeftCorner(1, n) = ops.weights.transpose();
    j(n, n) = 0.0;
  }
  return j;
}

namespace detail {

inline Eigen::VectorXd full_residual(const CollocationOperators& ops, const Eigen::VectorXd& u, double q,
                                     const ModelParams& p, const std::optional<double>& mass_target) {
  Eigen::VectorXd r = newton_residual(ops, u, q, p);
  if (!mass_target) return r;
  Eigen::VectorXd out(r.size() + 1);
  out << r, ops.weights.dot(u) - *mass_target;
  return out;
}

}  // namespace detail

/// Damped Newton on the collocated flux equation, optionally with the mass
/// constraint (bordered system in (u, q)). Steps are halved until the residual
/// max-norm decreases and u stays positive.
inline NewtonReport newton_solve(const CollocationOperators& ops, const ModelParams& p, const NewtonConfig& cfg,
                                 const PeriodicProfile& u0) {
  detail::check_length(ops.grid, u0.values.size(), "newton_solve");
  if (!(u0.min() > 0.0)) throw ParameterError("newton_solve: initial profile must be strictly positive");
  if (!(cfg.tol > 0.0)) throw ParameterError("newton_solve: tol must be positive");

  const int n = ops.grid.size();
  const bool bordered = cfg.mass_target.has_value();
  Eigen::VectorXd u = u0.values;
  double q = p.q();
  NewtonReport report{NewtonVerdict::stalled, u0, q, 0.0, 0, {}};

  auto params_at = [&](double qq) { return bordered ? p.with_q(qq) : p; };
  Eigen::VectorXd r = detail::full_residual(ops, u, q, p, cfg.mass_target);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  report.residual_history.push_back(rnorm);

  while (true) {
    if (rnorm <= cfg.tol) {
      report.verdict = NewtonVerdict::converged;
      break;
    }
    if (report.steps >= cfg.max_steps) {
      report.verdict = NewtonVerdict::stalled;
      break;
    }
    const Eigen::MatrixXd jac = newton_jacobian(ops, u, params_at(q), bordered);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    if (!(lu.rcond() > 1e-15)) {
      report.verdict = NewtonVerdict::singular_jacobian;
      break;
    }
    const Eigen::VectorXd delta = -lu.solve(r);
    if (!delta.allFinite()) {
      report.verdict = NewtonVerdict::singular_jacobian;
      break;
    }

    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_halvings; ++h, step *= cfg.damping) {
      Eigen::VectorXd u_try = u + step * delta.head(n);
      const double q_try = bordered ? q + step * delta[n] : q;
      if (!(u_try.minCoeff() > 0.0) || !(q_try > 0.0)) continue;
      Eigen::VectorXd r_try = detail::full_residual(ops, u_try, q_try, params_at(q_try), cfg.mass_target);
      const double norm_try = r_try.lpNorm<Eigen::Infinity>();
      if (norm_try < rnorm) {
        u = std::move(u_try);
        q = q_try;
        r = std::move(r_try);
        rnorm = norm_try;
        accepted = true;
        break;
      }
    }
    ++report.steps;
    if (!accepted) {
      report.verdict = NewtonVerdict::stalled;
      break;
    }
    report.residual_history.push_back(rnorm);
  }

  report.solution = PeriodicProfile(ops.grid, u);
  report.q_out = q;
  report.residual_norm = rnorm;
  return report;
}

inline NewtonReport newton_solve(const ModelParams& p, const NewtonConfig& cfg, const PeriodicProfile& u0) {
  return newton_solve(CollocationOperators(u0.grid), p, cfg, u0);
}

}  // namespace thinfilm
