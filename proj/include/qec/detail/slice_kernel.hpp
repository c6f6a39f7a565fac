#pragma once

#include <vector>

#include "qec/common.hpp"

namespace qec::detail {

// Per-slice propagation kernel. For a slice Hamiltonian H held constant over
// a step of length dt it produces
//   U = exp(-i H dt)
// and, when requested, the slice averages of conjugated operators
//   avg[m] = (1/dt) * integral_0^dt exp(+i H s) B_m exp(-i H s) ds,
// which make control gradients exact for piecewise-constant controls.
//
// The generic implementation diagonalizes H; in the eigenbasis the average is
// an entrywise filter (B)_{jk} * e^{i w dt / 2} * sinc(w dt / 2) with
// w = lambda_j - lambda_k.
template <int Dim>
class SliceKernel {
 public:
  using Matrix = Eigen::Matrix<cxd, Dim, Dim>;

  explicit SliceKernel(Eigen::Index d) : dim_(d) {
    if constexpr (Dim == Eigen::Dynamic) {
      phases_.resize(d);
      filter_.resize(d, d);
      congr_.resize(d, d);
      scratch_.resize(d, d);
    } else {
      require(d == Dim, "SliceKernel: dimension mismatch");
    }
  }

  void propagator(const Matrix& h, double dt, Matrix& u) {
    solver_.compute(h);
    apply_exponential(dt, u);
  }

  void propagator_and_averages(const Matrix& h, double dt, const std::vector<Matrix>& ops,
                               Matrix& u, Matrix* avg) {
    solver_.compute(h);
    apply_exponential(dt, u);
    const auto& lam = solver_.eigenvalues();
    const auto& v = solver_.eigenvectors();
    const Eigen::Index d = dim_;
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index k = 0; k < d; ++k) {
        const double half = 0.5 * (lam(j) - lam(k)) * dt;
        filter_(j, k) = sinc(half) * cxd(std::cos(half), std::sin(half));
      }
    }
    for (std::size_t m = 0; m < ops.size(); ++m) {
      congr_.noalias() = v.adjoint() * ops[m] * v;
      congr_.array() *= filter_.array();
      scratch_.noalias() = v * congr_;
      avg[m].noalias() = scratch_ * v.adjoint();
    }
  }

 private:
  void apply_exponential(double dt, Matrix& u) {
    const auto& lam = solver_.eigenvalues();
    const auto& v = solver_.eigenvectors();
    for (Eigen::Index j = 0; j < dim_; ++j) {
      const double phase = -lam(j) * dt;
      phases_(j) = cxd(std::cos(phase), std::sin(phase));
    }
    scratch_.noalias() = v * phases_.asDiagonal();
    u.noalias() = scratch_ * v.adjoint();
  }

  Eigen::Index dim_;
  Eigen::SelfAdjointEigenSolver<Matrix> solver_;
  Eigen::Matrix<cxd, Dim, 1> phases_{};
  Matrix filter_{};
  Matrix congr_{};
  Matrix scratch_{};
};

// Two-level specialization. A 2x2 Hermitian H = alpha I + b . sigma has the
// closed-form exponential
//   exp(-i H dt) = e^{-i alpha dt} (cos(|b| dt) I - i sin(|b| dt) (bhat . sigma)),
// and conjugation rotates a Pauli vector d about bhat by the angle -2|b|s, so
// the slice average reduces to averaged rotation coefficients.
template <>
class SliceKernel<2> {
 public:
  using Matrix = Eigen::Matrix2cd;

  explicit SliceKernel(Eigen::Index d) { require(d == 2, "SliceKernel<2>: dimension must be 2"); }

  void propagator(const Matrix& h, double dt, Matrix& u) {
    decompose(h);
    fill_propagator(dt, u);
  }

  void propagator_and_averages(const Matrix& h, double dt, const std::vector<Matrix>& ops,
                               Matrix& u, Matrix* avg) {
    decompose(h);
    fill_propagator(dt, u);

    double sc = 1.0, ss = 0.0, nx = 0.0, ny = 0.0, nz = 0.0;
    if (r_ > 0.0) {
      const double theta = 2.0 * r_ * dt;
      sc = sinc(theta);
      ss = versinc(theta);
      nx = bx_ / r_;
      ny = by_ / r_;
      nz = bz_ / r_;
    }
    for (std::size_t m = 0; m < ops.size(); ++m) {
      const Matrix& b = ops[m];
      const double beta = 0.5 * (b(0, 0).real() + b(1, 1).real());
      const double dx = b(0, 1).real();
      const double dy = -b(0, 1).imag();
      const double dz = 0.5 * (b(0, 0).real() - b(1, 1).real());
      double vx = dx, vy = dy, vz = dz;
      if (r_ > 0.0) {
        const double along = nx * dx + ny * dy + nz * dz;
        const double cx = ny * dz - nz * dy;
        const double cy = nz * dx - nx * dz;
        const double cz = nx * dy - ny * dx;
        vx = sc * dx - ss * cx + (1.0 - sc) * along * nx;
        vy = sc * dy - ss * cy + (1.0 - sc) * along * ny;
        vz = sc * dz - ss * cz + (1.0 - sc) * along * nz;
      }
      avg[m](0, 0) = cxd(beta + vz, 0.0);
      avg[m](0, 1) = cxd(vx, -vy);
      avg[m](1, 0) = cxd(vx, vy);
      avg[m](1, 1) = cxd(beta - vz, 0.0);
    }
  }

 private:
  void decompose(const Matrix& h) {
    alpha_ = 0.5 * (h(0, 0).real() + h(1, 1).real());
    bz_ = 0.5 * (h(0, 0).real() - h(1, 1).real());
    bx_ = h(0, 1).real();
    by_ = -h(0, 1).imag();
    r_ = std::sqrt(bx_ * bx_ + by_ * by_ + bz_ * bz_);
  }

  void fill_propagator(double dt, Matrix& u) const {
    const cxd phase{std::cos(alpha_ * dt), -std::sin(alpha_ * dt)};
    if (r_ == 0.0) {
      u(0, 0) = phase;
      u(0, 1) = cxd(0, 0);
      u(1, 0) = cxd(0, 0);
      u(1, 1) = phase;
      return;
    }
    const double c = std::cos(r_ * dt);
    const double f = std::sin(r_ * dt) / r_;
    u(0, 0) = phase * cxd(c, -f * bz_);
    u(0, 1) = phase * (-imag_unit * f * cxd(bx_, -by_));
    u(1, 0) = phase * (-imag_unit * f * cxd(bx_, by_));
    u(1, 1) = phase * cxd(c, f * bz_);
  }

  double alpha_ = 0.0, bx_ = 0.0, by_ = 0.0, bz_ = 0.0, r_ = 0.0;
};

}  // namespace qec::detail
