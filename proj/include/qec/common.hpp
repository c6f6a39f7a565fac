#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace qec {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealMat = Eigen::MatrixXd;

inline constexpr cxd imag_unit{0.0, 1.0};

/// Thrown when a domain invariant or structural precondition is violated.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an iterative learning run produces a non-finite objective.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

// sin(x)/x, stable near zero.
inline double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
  }
  return std::sin(x) / x;
}

// (1 - cos(x))/x via the half-angle form, stable near zero.
inline double versinc(double x) {
  if (x == 0.0) return 0.0;
  const double h = std::sin(0.5 * x);
  return 2.0 * h * h / x;
}

inline bool all_finite(const RealMat& m) { return m.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace qec
