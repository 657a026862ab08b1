#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "thinfilm/errors.hpp"
#include "thinfilm/grid.hpp"

namespace thinfilm {

/// Rotation rate ω, flux q and mobility exponent n of the steady flux equation
///   u^n (u‴ + u′ − sin θ) + ω u = q.
/// The shift constant c = ω⁴/q³ of the iteration operator is cached.
class ModelParams {
 public:
  ModelParams(double omega, double q, int n_exp = 3) : omega_(omega), q_(q), n_exp_(n_exp) {
    if (!(omega > 0.0) || !std::isfinite(omega))
      throw ParameterError("omega must be positive and finite, got " + std::to_string(omega));
    if (!(q > 0.0) || !std::isfinite(q))
      throw ParameterError("q must be positive and finite, got " + std::to_string(q));
    if (n_exp != 2 && n_exp != 3)
      throw ParameterError("mobility exponent must be 2 or 3, got " + std::to_string(n_exp));
    c_ = std::pow(omega, 4) / std::pow(q, 3);
    if (!std::isfinite(c_) || !(c_ > 0.0))
      throw ParameterError("omega^4/q^3 is not a finite positive number");
  }

  double omega() const noexcept { return omega_; }
  double q() const noexcept { return q_; }
  int n_exp() const noexcept { return n_exp_; }
  double c() const noexcept { return c_; }
  /// Mean film thickness q/ω of the near-constant state; u = v + q/ω.
  double shift() const noexcept { return q_ / omega_; }

  ModelParams with_q(double q) const { return {omega_, q, n_exp_}; }
  ModelParams with_omega(double omega) const { return {omega, q_, n_exp_}; }

 private:
  double omega_;
  double q_;
  int n_exp_;
  double c_;
};

/// Real samples on a grid: either the thickness u or the shifted variable v = u − q/ω.
struct PeriodicProfile {
  Grid grid;
  Eigen::VectorXd values;

  PeriodicProfile(Grid g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    detail::check_length(grid, values.size(), "PeriodicProfile");
  }
  explicit PeriodicProfile(const Grid& g) : grid(g), values(Eigen::VectorXd::Zero(g.size())) {}

  int size() const noexcept { return grid.size(); }
  double min() const { return values.minCoeff(); }
  double max() const { return values.maxCoeff(); }
};

namespace detail {

inline void check_touchdown(const Eigen::VectorXd& v, const ModelParams& p) {
  const double guard = 1e-14 * p.q();
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double denom = p.q() + p.omega() * v[j];
    if (!(std::abs(denom) >= guard)) throw TouchdownError(static_cast<int>(j), denom / p.omega());
  }
}

inline Eigen::VectorXd nonlinear_F(const Eigen::VectorXd& v, const ModelParams& p) {
  check_touchdown(v, p);
  const double w = p.omega(), q = p.q();
  const double scale = std::pow(w, 5) / std::pow(q, 3);
  return v.unaryExpr([=](double x) {
    const double d = q + w * x;
    return scale * x * x * (3.0 * q * q + 3.0 * q * w * x + w * w * x * x) / (d * d * d);
  });
}

inline Eigen::VectorXd nonlinear_F_prime(const Eigen::VectorXd& v, const ModelParams& p) {
  check_touchdown(v, p);
  const double w = p.omega(), q = p.q();
  const double scale = std::pow(w, 5) / std::pow(q, 3);
  return v.unaryExpr([=](double x) {
    const double d = q + w * x;
    const double d2 = d * d;
    return scale * x *
           (6.0 * q * q * q + 6.0 * q * q * w * x + 4.0 * q * w * w * x * x + w * w * w * x * x * x) /
           (d2 * d2);
  });
}

}  // namespace detail

/// F(v) = (ω⁵/q³) v² (3q² + 3qωv + ω²v²)/(q + ωv)³, the O(v²) remainder of
/// (∂³ + ∂ + ω⁴/q³) v = sin θ + F(v).
/// Throws TouchdownError where |q + ωv| < 1e−14 q.
inline PeriodicProfile nonlinear_F(const PeriodicProfile& v, const ModelParams& p) {
  return {v.grid, detail::nonlinear_F(v.values, p)};
}

/// dF/dv, evaluated pointwise.
inline PeriodicProfile nonlinear_F_prime(const PeriodicProfile& v, const ModelParams& p) {
  return {v.grid, detail::nonlinear_F_prime(v.values, p)};
}

/// u^n (u‴ + u′ − sin θ) + ω u − q with spectral derivatives.
inline PeriodicProfile residual(const PeriodicProfile& u, const ModelParams& p) {
  const SpectralCoeffs c = analyze(u.grid, u.values);
  const Eigen::VectorXd d1 = synthesize(differentiate(c, 1));
  const Eigen::VectorXd d3 = synthesize(differentiate(c, 3));
  const Eigen::VectorXd sin_t = u.grid.theta().array().sin();
  const Eigen::VectorXd un = u.values.array().pow(p.n_exp());
  Eigen::VectorXd r = un.array() * (d3 + d1 - sin_t).array() + p.omega() * u.values.array() - p.q();
  return {u.grid, std::move(r)};
}

/// M = ∫ u dθ over one period.
inline double mass(const PeriodicProfile& u) { return quadrature(u.values); }

/// Small-amplitude asymptotic profile u ≈ q/ω + (1/ω)(q/ω)^n sin θ, n ∈ {2, 3}.
/// Accepts q = 0 (returns u ≡ 0), which ModelParams itself rejects.
inline PeriodicProfile approx_steady(const Grid& grid, double omega, double q, int n_exp = 3) {
  if (n_exp != 2 && n_exp != 3)
    throw ParameterError("approx_steady supports n = 2 or 3, got " + std::to_string(n_exp));
  if (!(omega > 0.0)) throw ParameterError("omega must be positive");
  const double base = q / omega;
  const double amp = std::pow(base, n_exp) / omega;
  return {grid, grid.sample([&](double t) { return base + amp * std::sin(t); })};
}

inline PeriodicProfile approx_steady(const Grid& grid, const ModelParams& p) {
  return approx_steady(grid, p.omega(), p.q(), p.n_exp());
}

/// q < (2/3)^{3/2} ω^{3/2}; outside this region no positive steady state exists (n = 3).
inline double nonexistence_flux(double omega) { return std::pow(2.0 / 3.0, 1.5) * std::pow(omega, 1.5); }

}  // namespace thinfilm
