#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "thinfilm/detail/fftw_plan.hpp"
#include "thinfilm/errors.hpp"

namespace thinfilm {

/// Uniform periodic grid θ_j = −π + 2πj/n on [−π, π).
class Grid {
 public:
  explicit Grid(int n_points) : n_(n_points) {
    if (n_points < 8 || n_points % 2 != 0)
      throw ParameterError("grid size must be even and >= 8, got " + std::to_string(n_points));
    theta_.resize(n_);
    for (int j = 0; j < n_; ++j) theta_[j] = -std::numbers::pi + 2.0 * std::numbers::pi * j / n_;
  }

  int size() const noexcept { return n_; }
  double spacing() const noexcept { return 2.0 * std::numbers::pi / n_; }
  const Eigen::VectorXd& theta() const noexcept { return theta_; }
  double theta(int j) const { return theta_[j]; }

  /// Wavenumber stored at slot `idx` of a SpectralCoeffs vector.
  int wavenumber(int idx) const noexcept { return idx < n_ / 2 ? idx : idx - n_; }
  /// Inverse of wavenumber(): slot holding wavenumber k, for −n/2 ≤ k < n/2.
  int slot(int k) const noexcept { return k >= 0 ? k : k + n_; }
  int nyquist_slot() const noexcept { return n_ / 2; }

  /// Samples of f(θ) on the grid.
  template <typename F>
  Eigen::VectorXd sample(F&& f) const {
    Eigen::VectorXd out(n_);
    for (int j = 0; j < n_; ++j) out[j] = f(theta_[j]);
    return out;
  }

  friend bool operator==(const Grid& a, const Grid& b) noexcept { return a.n_ == b.n_; }

 private:
  int n_;
  Eigen::VectorXd theta_;
};

/// Fourier coefficients ĉ_k = (1/n) Σ_j p_j e^{−ikθ_j}, so ĉ_0 is the sample mean.
///
/// Storage follows the usual FFT ordering: slot i holds k = i for i < n/2 and
/// k = i − n otherwise, so the Nyquist wavenumber −n/2 lives in slot n/2.
struct SpectralCoeffs {
  Eigen::VectorXcd values;

  int size() const noexcept { return static_cast<int>(values.size()); }
  std::complex<double>& at(int k) { return values[k >= 0 ? k : k + size()]; }
  std::complex<double> at(int k) const { return values[k >= 0 ? k : k + size()]; }
};

namespace detail {

inline void check_length(const Grid& grid, Eigen::Index n, const char* what) {
  if (n != grid.size())
    throw LengthMismatch(std::string(what) + ": expected " + std::to_string(grid.size()) +
                         " samples, got " + std::to_string(n));
}

// (−1)^k with the grid offset θ_0 = −π folded in.
inline double phase_sign(int idx) { return (idx % 2 == 0) ? 1.0 : -1.0; }

}  // namespace detail

inline SpectralCoeffs analyze(const Grid& grid, const Eigen::VectorXd& samples) {
  detail::check_length(grid, samples.size(), "analyze");
  const int n = grid.size();
  Eigen::VectorXcd in = samples.cast<std::complex<double>>();
  Eigen::VectorXcd out(n);
  detail::dft(in.data(), out.data(), n, FFTW_FORWARD);
  for (int i = 0; i < n; ++i) out[i] *= detail::phase_sign(i) / n;
  return {std::move(out)};
}

inline Eigen::VectorXcd synthesize_complex(const SpectralCoeffs& c) {
  const int n = c.size();
  Eigen::VectorXcd in(n), out(n);
  for (int i = 0; i < n; ++i) in[i] = c.values[i] * detail::phase_sign(i);
  detail::dft(in.data(), out.data(), n, FFTW_BACKWARD);
  return out;
}

/// Inverse of analyze(); the imaginary part is discarded, which enforces
/// conjugate symmetry on the result.
inline Eigen::VectorXd synthesize(const SpectralCoeffs& c) { return synthesize_complex(c).real(); }

/// Multiplier (ik)^order for slot idx. Odd orders zero the Nyquist mode.
inline std::complex<double> derivative_symbol(int n, int idx, int order) {
  if (idx == n / 2 && order % 2 == 1) return 0.0;
  const int k = idx < n / 2 ? idx : idx - n;
  return std::pow(std::complex<double>(0.0, static_cast<double>(k)), order);
}

inline SpectralCoeffs differentiate(const SpectralCoeffs& c, int order) {
  if (order < 1 || order > 4)
    throw ParameterError("derivative order must be in 1..4, got " + std::to_string(order));
  SpectralCoeffs out = c;
  const int n = c.size();
  for (int i = 0; i < n; ++i) out.values[i] *= derivative_symbol(n, i, order);
  return out;
}

/// d^order p / dθ^order by the transform path.
inline Eigen::VectorXd derivative(const Grid& grid, const Eigen::VectorXd& samples, int order) {
  return synthesize(differentiate(analyze(grid, samples), order));
}

/// Zero every mode with |k| > n/3 (2/3-rule truncation).
inline SpectralCoeffs dealias(const SpectralCoeffs& c) {
  SpectralCoeffs out = c;
  const int n = c.size();
  for (int i = 0; i < n; ++i) {
    const int k = i < n / 2 ? i : i - n;
    if (3 * std::abs(k) > n) out.values[i] = 0.0;
  }
  return out;
}

/// Dense circulant matrix D with D·p equal to derivative(grid, p, order).
///
/// Entries come from the kernel κ_m = (1/n) Σ_k (ik)^order e^{ikmh}; for odd
/// orders κ is computed on m ≤ n/2 and mirrored so that D is antisymmetric exactly.
inline Eigen::MatrixXd diff_matrix(const Grid& grid, int order) {
  if (order < 1 || order > 4)
    throw ParameterError("derivative order must be in 1..4, got " + std::to_string(order));
  const int n = grid.size();
  const double h = grid.spacing();
  const bool odd = order % 2 == 1;
  Eigen::VectorXd kernel = Eigen::VectorXd::Zero(n);
  for (int m = 0; m <= n / 2; ++m) {
    double sum = 0.0;
    // Pair ±k for 1 ≤ k < n/2: (ik)^o e^{ikmh} + (−ik)^o e^{−ikmh}.
    for (int k = n / 2 - 1; k >= 1; --k) {
      const double kp = std::pow(static_cast<double>(k), order);
      const double s = std::sin(k * m * h), co = std::cos(k * m * h);
      switch (order) {
        case 1: sum += -2.0 * kp * s; break;
        case 2: sum += -2.0 * kp * co; break;
        case 3: sum += 2.0 * kp * s; break;
        default: sum += 2.0 * kp * co; break;
      }
    }
    if (!odd) {
      // Nyquist mode keeps (ik)^order = (−1)^{order/2} k^order; e^{−iπm} = (−1)^m.
      const double kn = std::pow(n / 2.0, order);
      const double sign = (order == 2 ? -1.0 : 1.0) * (m % 2 == 0 ? 1.0 : -1.0);
      sum += sign * kn;
    }
    kernel[m] = sum / n;
  }
  if (odd) {
    kernel[0] = 0.0;
    kernel[n / 2] = 0.0;
    for (int m = 1; m < n / 2; ++m) kernel[n - m] = -kernel[m];
  } else {
    for (int m = 1; m < n / 2; ++m) kernel[n - m] = kernel[m];
  }
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d(i, j) = kernel[((i - j) % n + n) % n];
  return d;
}

/// ∫_{−π}^{π} p dθ by the periodic trapezoid rule (2π × sample mean).
inline double quadrature(const Eigen::VectorXd& samples) {
  return 2.0 * std::numbers::pi * samples.mean();
}

/// Quadrature weights w_j with Σ w_j p_j = quadrature(p).
inline Eigen::VectorXd quadrature_weights(const Grid& grid) {
  return Eigen::VectorXd::Constant(grid.size(), grid.spacing());
}

/// Evaluate the band-limited interpolant of `samples` on another grid.
///
/// The source Nyquist mode is split evenly between ±n/2 so the interpolant is
/// real; modes are then aliased onto the target wavenumbers, which makes this
/// exact for both refinement and coarsening.
inline Eigen::VectorXd resample(const Grid& from, const Eigen::VectorXd& samples, const Grid& to) {
  if (from == to) {
    detail::check_length(from, samples.size(), "resample");
    return samples;
  }
  const SpectralCoeffs c = analyze(from, samples);
  const int n = from.size(), m = to.size();
  SpectralCoeffs target{Eigen::VectorXcd::Zero(m)};
  auto add = [&](int k, std::complex<double> value) {
    const int slot = ((k % m) + m) % m;
    target.values[slot] += value;
  };
  for (int i = 0; i < n; ++i) {
    const int k = from.wavenumber(i);
    if (i == n / 2) {
      add(-n / 2, 0.5 * c.values[i]);
      add(n / 2, 0.5 * c.values[i]);
    } else {
      add(k, c.values[i]);
    }
  }
  return synthesize(target);
}

}  // namespace thinfilm
