#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace thinfilm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sample count does not match the grid it is paired with.
class LengthMismatch : public Error {
 public:
  using Error::Error;
};

/// Parameters outside the supported regime (ω ≤ 0, q ≤ 0, unsupported exponent, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// q + ωv vanished at a sample: the film thickness u touched zero.
class TouchdownError : public Error {
 public:
  TouchdownError(int index, double u)
      : Error(describe(index, u)),
        index_(index),
        u_(u) {}
  int index() const noexcept { return index_; }

  double thickness() const noexcept { return u_; }

 private:
  static std::string describe(int index, double u) {
    std::ostringstream os;
    os << "touchdown: u = " << u << " at sample " << index;
    return os.str();
  }

  int index_;
  double u_;
};

/// The renormalization denominator Σ F̂_k conj(v̂_k) vanished.
class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};

class EigenSolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace thinfilm
