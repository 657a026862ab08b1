#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thinfilm/errors.hpp"
#include "thinfilm/grid.hpp"
#include "thinfilm/model.hpp"
#include "thinfilm/newton.hpp"

namespace thinfilm {

struct BranchPoint {
  double omega = 0.0;
  double q = 0.0;
  double mass = 0.0;
  double u_min = 0.0;
  double u_max = 0.0;
  /// Transform-path residual max-norm of the stored profile.
  double residual = 0.0;
  std::optional<PeriodicProfile> profile;
};

enum class FixedParameter { omega, mass };

struct Branch {
  std::vector<BranchPoint> points;
  FixedParameter fixed = FixedParameter::omega;
  int steps_rejected = 0;
  std::string termination;
};

struct ContinuationConfig {
  double initial_step = 0.02;
  double max_step = 0.2;
  double min_step = 1e-10;
  int max_points = 400;
  /// Initial sign of the change in the continuation parameter (q, or ω at fixed mass).
  int direction = +1;
  /// Corrector: max-norm target on the collocated equations, relative to q,
  /// and iteration budget.
  double corrector_tol = 1e-9;
  int corrector_max_steps = 10;
  /// Accepted points must satisfy the transform-path residual bound.
  double accept_residual = 1e-10;
  /// Largest angle (radians, scaled metric) between the predictor direction
  /// and the accepted secant; larger turns halve the step. Keeps folds sampled.
  double max_turn = 0.2;
  /// Stop once the continuation parameter leaves [param_min, param_max]
  /// or the mass leaves [mass_min, mass_max].
  double param_min = 0.0;
  double param_max = std::numeric_limits<double>::infinity();
  double mass_min = 0.0;
  double mass_max = std::numeric_limits<double>::infinity();
  bool store_profiles = true;
  /// Invoked for every accepted point, in order (streaming output).
  std::function<void(const BranchPoint&)> on_point;
};

struct Fold {
  int index = 0;  // branch point nearest the turning point
  double parameter = 0.0;  // extremal value of the continuation parameter
  double label = 0.0;  // mass (fixed ω) or q (fixed mass) at the turning point
};

inline BranchPoint make_branch_point(const PeriodicProfile& u, const ModelParams& p, bool store_profile) {
  BranchPoint bp;
  bp.omega = p.omega();
  bp.q = p.q();
  bp.mass = mass(u);
  bp.u_min = u.min();
  bp.u_max = u.max();
  bp.residual = residual(u, p).values.lpNorm<Eigen::Infinity>();
  if (store_profile) bp.profile = u;
  return bp;
}

namespace detail {

// Unknowns z = (u, q) at fixed ω, or z = (u, q, ω) at fixed mass. The last
// entry is the continuation parameter.
struct ArclengthSystem {
  const CollocationOperators& ops;
  FixedParameter fixed;
  double omega_fixed;
  double mass_fixed;

  int n() const { return ops.grid.size(); }
  int dim() const { return fixed == FixedParameter::omega ? n() + 1 : n() + 2; }
  double q_of(const Eigen::VectorXd& z) const { return z[n()]; }
  double omega_of(const Eigen::VectorXd& z) const {
    return fixed == FixedParameter::omega ? omega_fixed : z[n() + 1];
  }
  double parameter(const Eigen::VectorXd& z) const { return z[dim() - 1]; }
  ModelParams params(const Eigen::VectorXd& z) const { return {omega_of(z), q_of(z)}; }

  // dim − 1 equations.
  Eigen::VectorXd equations(const Eigen::VectorXd& z) const {
    const Eigen::VectorXd u = z.head(n());
    Eigen::VectorXd r = newton_residual(ops, u, q_of(z), params(z));
    if (fixed == FixedParameter::omega) return r;
    Eigen::VectorXd out(n() + 1);
    out << r, ops.weights.dot(u) - mass_fixed;
    return out;
  }

  // (dim − 1) × dim Jacobian.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& z) const {
    const Eigen::VectorXd u = z.head(n());
    const ModelParams p = params(z);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dim() - 1, dim());
    if (fixed == FixedParameter::omega) {
      j.leftCols(n()) = newton_jacobian(ops, u, p, false);
      j.col(n()).setConstant(-1.0);
    } else {
      j.leftCols(n() + 1) = newton_jacobian(ops, u, p, true);
      j.col(n() + 1).head(n()) = u;  // ∂R/∂ω
    }
    return j;
  }

  // Size of the largest term summed in any equation row, for roundoff floors.
  double equation_scale(const Eigen::VectorXd& z) const {
    const Eigen::ArrayXd u = z.head(n()).array();
    const Eigen::VectorXd ua = u.abs().matrix();
    const Eigen::ArrayXd derivs = (ops.d3.cwiseAbs() * ua + ops.d1.cwiseAbs() * ua).array() + 1.0;
    return (u.abs().cube() * derivs + omega_of(z) * u.abs()).maxCoeff() + q_of(z);
  }

  // Metric weights: u by 1/(max u · √N), parameters by their relative size.
  Eigen::VectorXd weights(const Eigen::VectorXd& z) const {
    Eigen::VectorXd w(dim());
    w.head(n()).setConstant(1.0 / (z.head(n()).maxCoeff() * std::sqrt(static_cast<double>(n()))));
    for (int i = n(); i < dim(); ++i) w[i] = 1.0 / std::abs(z[i]);
    return w;
  }
};

inline Eigen::VectorXd initial_tangent(const ArclengthSystem& sys, const Eigen::VectorXd& z, int direction) {
  const int d = sys.dim();
  Eigen::MatrixXd a(d, d);
  a.topRows(d - 1) = sys.jacobian(z);
  a.row(d - 1).setZero();
  a(d - 1, d - 1) = 1.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  rhs[d - 1] = direction >= 0 ? 1.0 : -1.0;
  return a.partialPivLu().solve(rhs);
}

struct CorrectorResult {
  Eigen::VectorXd z;
  int steps = 0;
  bool converged = false;
};

// Newton on G(z) = 0 with the hyperplane t·W(z − z_pred) = 0.
inline CorrectorResult correct(const ArclengthSystem& sys, Eigen::VectorXd z, const Eigen::VectorXd& tangent_scaled,
                               const Eigen::VectorXd& w, const ContinuationConfig& cfg) {
  const int d = sys.dim();
  const Eigen::VectorXd z_pred = z;
  const double floor = 4.0 * std::numeric_limits<double>::epsilon() * sys.equation_scale(z);
  CorrectorResult out;
  for (int it = 0; it <= cfg.corrector_max_steps; ++it) {
    if (!(z.head(sys.n()).minCoeff() > 0.0) || !(sys.q_of(z) > 0.0) || !(sys.omega_of(z) > 0.0)) break;
    Eigen::VectorXd g(d);
    g.head(d - 1) = sys.equations(z);
    g[d - 1] = tangent_scaled.dot(w.cwiseProduct(z - z_pred));
    if (!g.allFinite()) break;
    if (g.head(d - 1).lpNorm<Eigen::Infinity>() <= std::max(cfg.corrector_tol * sys.q_of(z), floor) && std::abs(g[d - 1]) <= 1e-12) {
      out.converged = true;
      break;
    }
    if (it == cfg.corrector_max_steps) break;
    // Solve in metric-scaled unknowns with equilibrated rows; the raw system
    // mixes entries of wildly different size once q is small.
    Eigen::MatrixXd a(d, d);
    a.topRows(d - 1) = sys.jacobian(z) * w.cwiseInverse().asDiagonal();
    a.row(d - 1) = tangent_scaled.transpose();
    const Eigen::VectorXd row_scale = a.rowwise().lpNorm<Eigen::Infinity>().cwiseInverse();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(row_scale.asDiagonal() * a);
    if (!(lu.rcond() > 1e-15)) break;
    z -= lu.solve(row_scale.cwiseProduct(g)).cwiseQuotient(w);
    out.steps = it + 1;
  }
  out.z = std::move(z);
  return out;
}

inline Branch trace(const ArclengthSystem& sys, const Eigen::VectorXd& z_start, const ContinuationConfig& cfg) {
  Branch branch;
  branch.fixed = sys.fixed;
  const int n = sys.n();

  auto accept = [&](const Eigen::VectorXd& z) {
    const ModelParams p = sys.params(z);
    BranchPoint bp = make_branch_point(PeriodicProfile(sys.ops.grid, z.head(n)), p, cfg.store_profiles);
    branch.points.push_back(bp);
    if (cfg.on_point) cfg.on_point(branch.points.back());
  };

  Eigen::VectorXd z = z_start;
  accept(z);
  Eigen::VectorXd w = sys.weights(z);
  Eigen::VectorXd t = w.cwiseProduct(initial_tangent(sys, z, cfg.direction));
  t.normalize();
  double ds = cfg.initial_step;
  Eigen::VectorXd z_prev_scaled;

  while (static_cast<int>(branch.points.size()) < cfg.max_points) {
    // Predictor in scaled coordinates, mapped back.
    Eigen::VectorXd z_pred = z + (ds * t).cwiseQuotient(w);
    CorrectorResult cr = correct(sys, z_pred, t, w, cfg);
    bool ok = cr.converged;
    BranchPoint check;
    if (ok) {
      const ModelParams p = sys.params(cr.z);
      const PeriodicProfile u(sys.ops.grid, cr.z.head(n));
      const double res = residual(u, p).values.lpNorm<Eigen::Infinity>();
      ok = res < cfg.accept_residual && u.min() > 0.0;
      const Eigen::VectorXd step = w.cwiseProduct(cr.z - z);
      if (ok && step.norm() > 0.0) ok = t.dot(step) / step.norm() >= std::cos(cfg.max_turn);
    }
    if (!ok) {
      ++branch.steps_rejected;
      ds *= 0.5;
      if (ds < cfg.min_step) {
        branch.termination = "step collapse";
        return branch;
      }
      continue;
    }

    const double q_new = sys.q_of(cr.z), w_new = sys.omega_of(cr.z);
    if (!(q_new < nonexistence_flux(w_new))) {
      branch.termination = "nonexistence bound reached";
      return branch;
    }
    // Secant tangent in the metric of the previous point.
    Eigen::VectorXd secant = w.cwiseProduct(cr.z - z);
    if (secant.norm() > 0.0) t = secant.normalized();
    z = cr.z;
    accept(z);
    // Re-express the tangent in the new point's metric.
    const Eigen::VectorXd w_new_metric = sys.weights(z);
    t = t.cwiseQuotient(w).cwiseProduct(w_new_metric).normalized();
    w = w_new_metric;

    if (cr.steps <= 3) ds = std::min(2.0 * ds, cfg.max_step);

    const double param = sys.parameter(z);
    const double m = branch.points.back().mass;
    if (param < cfg.param_min || param > cfg.param_max) {
      branch.termination = "parameter bound";
      return branch;
    }
    if (m < cfg.mass_min || m > cfg.mass_max) {
      branch.termination = "mass bound";
      return branch;
    }
  }
  branch.termination = "max points";
  return branch;
}

}  // namespace detail

/// Pseudo-arclength continuation in (u, q) at fixed ω. The start profile must
/// already solve the flux equation at (ω, start.q).
inline Branch trace_fixed_omega(const CollocationOperators& ops, double omega, const BranchPoint& start,
                                const ContinuationConfig& cfg = {}) {
  if (!start.profile) throw ParameterError("trace_fixed_omega: start point needs a profile");
  detail::ArclengthSystem sys{ops, FixedParameter::omega, omega, 0.0};
  Eigen::VectorXd z(sys.dim());
  z << resample(start.profile->grid, start.profile->values, ops.grid), start.q;
  if (sys.equations(z).lpNorm<Eigen::Infinity>() > 1e-8)
    throw ParameterError("trace_fixed_omega: start point is not a converged solution");
  return detail::trace(sys, z, cfg);
}

/// Pseudo-arclength continuation in ω at fixed mass; the unknowns are (u, q, ω).
inline Branch trace_fixed_mass(const CollocationOperators& ops, double mass_value, const BranchPoint& start,
                               const ContinuationConfig& cfg = {}) {
  if (!start.profile) throw ParameterError("trace_fixed_mass: start point needs a profile");
  detail::ArclengthSystem sys{ops, FixedParameter::mass, start.omega, mass_value};
  Eigen::VectorXd z(sys.dim());
  z << resample(start.profile->grid, start.profile->values, ops.grid), start.q, start.omega;
  if (sys.equations(z).lpNorm<Eigen::Infinity>() > 1e-8)
    throw ParameterError("trace_fixed_mass: start point does not satisfy the mass constraint");
  return detail::trace(sys, z, cfg);
}

/// Joins two traces from the same start point into one branch ordered from
/// the far end of `backward` through the start to the far end of `forward`.
inline Branch join_branches(const Branch& backward, const Branch& forward) {
  Branch out;
  out.fixed = forward.fixed;
  out.steps_rejected = backward.steps_rejected + forward.steps_rejected;
  out.termination = backward.termination + " / " + forward.termination;
  out.points.assign(backward.points.rbegin(), backward.points.rend());
  if (!out.points.empty() && !forward.points.empty()) out.points.pop_back();
  out.points.insert(out.points.end(), forward.points.begin(), forward.points.end());
  return out;
}

/// Turning points of the continuation parameter (q at fixed ω, ω at fixed
/// mass), each refined by the vertex of a quadratic through the three points
/// around the reversal.
inline std::vector<Fold> detect_folds(const Branch& branch) {
  std::vector<Fold> folds;
  const auto& pts = branch.points;
  if (pts.size() < 3) return folds;
  auto param = [&](const BranchPoint& b) { return branch.fixed == FixedParameter::omega ? b.q : b.omega; };
  auto label = [&](const BranchPoint& b) { return branch.fixed == FixedParameter::omega ? b.mass : b.q; };
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double a = param(pts[i]) - param(pts[i - 1]);
    const double b = param(pts[i + 1]) - param(pts[i]);
    if (!(a * b < 0.0)) continue;
    Fold f{static_cast<int>(i), param(pts[i]), label(pts[i])};
    // Quadratic p(s) through the three labels; vertex gives the fold.
    const double s0 = label(pts[i - 1]), s1 = label(pts[i]), s2 = label(pts[i + 1]);
    const double p0 = param(pts[i - 1]), p1 = param(pts[i]), p2 = param(pts[i + 1]);
    if ((s1 - s0) * (s2 - s1) > 0.0) {
      const double d01 = (p1 - p0) / (s1 - s0), d12 = (p2 - p1) / (s2 - s1);
      const double curv = (d12 - d01) / (s2 - s0);
      if (curv != 0.0) {
        const double lin = d01 - curv * (s0 + s1);
        const double s_star = -lin / (2.0 * curv);
        if (s_star >= std::min(s0, s2) && s_star <= std::max(s0, s2)) {
          f.label = s_star;
          f.parameter = p0 + d01 * (s_star - s0) + curv * (s_star - s0) * (s_star - s1);
        }
      }
    }
    folds.push_back(f);
  }
  return folds;
}

/// Newton-solved point at flux q for every place the branch crosses q,
/// started from linear interpolation between the bracketing points.
inline std::vector<BranchPoint> solutions_at_flux(const CollocationOperators& ops, const Branch& branch, double q,
                                                  const NewtonConfig& newton = {}) {
  std::vector<BranchPoint> out;
  const auto& pts = branch.points;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i].q - q, b = pts[i + 1].q - q;
    if (a != 0.0 && !(a * b <= 0.0)) continue;
    if (b == 0.0 && i + 2 < pts.size()) continue;  // counted at the next segment
    if (!pts[i].profile || !pts[i + 1].profile) throw ParameterError("solutions_at_flux: profiles not stored");
    const double t = (a == b) ? 0.0 : a / (a - b);
    const Eigen::VectorXd ua = resample(pts[i].profile->grid, pts[i].profile->values, ops.grid);
    const Eigen::VectorXd ub = resample(pts[i + 1].profile->grid, pts[i + 1].profile->values, ops.grid);
    const double omega = pts[i].omega + t * (pts[i + 1].omega - pts[i].omega);
    const ModelParams p(omega, q);
    NewtonConfig cfg = newton;
    cfg.mass_target.reset();
    const NewtonReport r = newton_solve(ops, p, cfg, PeriodicProfile(ops.grid, (1.0 - t) * ua + t * ub));
    if (r.converged()) out.push_back(make_branch_point(r.solution, p, true));
  }
  return out;
}

/// Solution of prescribed mass at ω_target, reached by natural continuation in
/// log ω at fixed mass from the small-amplitude regime (large ω).
inline NewtonReport seed_at_mass(const CollocationOperators& ops, double omega_target, double mass_value,
                                 NewtonConfig newton = {}) {
  if (!(mass_value > 0.0) || !(omega_target > 0.0)) throw ParameterError("seed_at_mass: need positive mass and ω");
  newton.mass_target = mass_value;
  const Grid& grid = ops.grid;
  // Start where q = ωM/2π sits well below the nonexistence curve.
  const double crit = std::pow(mass_value / (2.0 * std::numbers::pi * std::pow(2.0 / 3.0, 1.5)), 2.0);
  const double omega_start = std::max({1.0, 10.0 * crit, omega_target});
  double q = omega_start * mass_value / (2.0 * std::numbers::pi);
  NewtonReport r = newton_solve(ops, ModelParams(omega_start, q), newton, approx_steady(grid, omega_start, q));
  if (!r.converged()) return r;
  double log_w = std::log(omega_start);
  const double log_target = std::log(omega_target);
  double dl = -0.1;
  while (log_w > log_target) {
    const double next = std::max(log_w + dl, log_target);
    NewtonReport trial = newton_solve(ops, ModelParams(std::exp(next), r.q_out), newton, r.solution);
    if (!trial.converged()) {
      dl *= 0.5;
      if (std::abs(dl) < 1e-8) return trial;
      continue;
    }
    r = std::move(trial);
    log_w = next;
    if (r.steps <= 3) dl = std::max(2.0 * dl, -0.2);
  }
  return r;
}

/// Flux-fixed solution on the small-amplitude branch, from approx_steady.
inline NewtonReport seed_small_amplitude(const CollocationOperators& ops, const ModelParams& p,
                                         const NewtonConfig& newton = {}) {
  NewtonConfig cfg = newton;
  cfg.mass_target.reset();
  return newton_solve(ops, p, cfg, approx_steady(ops.grid, p));
}

}  // namespace thinfilm
