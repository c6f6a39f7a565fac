#pragma once

#include <vector>

#include "qec/detail/slice_kernel.hpp"
#include "qec/dynamics.hpp"

namespace qec::detail {

// One-member evaluation pass: transfer probability J = |<psi(T)|target>|^2
// and, on request, the exact gradient of J with respect to the piecewise
// constant control values, expressed as the slice average of the functional
// derivative (the discrete partial derivative equals dt times each entry).
//
// The pass stores per-slice propagators U_q and averaged control operators,
// then assembles every gradient entry from the forward state phi_q and the
// back-propagated costate chi_q:
//   grad(m, q) = 2 gu Im( <psi(T)|target> * chi_q^H avg_m(q) phi_q ).
template <int Dim>
class MemberEngine {
 public:
  using Matrix = Eigen::Matrix<cxd, Dim, Dim>;
  using Vector = Eigen::Matrix<cxd, Dim, 1>;

  MemberEngine(const HamiltonianModel& model, const TimeGrid& grid)
      : model_(&model),
        slices_(grid.slices),
        channels_(model.channels()),
        dt_(grid.dt()),
        kernel_(model.dim()) {
    const Eigen::Index d = model.dim();
    drift_ = model.free().entries();
    ops_.reserve(size_t(channels_));
    for (const auto& op : model.control_ops()) ops_.emplace_back(op.entries());
    resize_all(d);
  }

  double objective(const MemberParams& member, const RealMat& u, const Vector& initial,
                   const Vector& target) {
    const double g0 = model_->free_scaling(member.eps0);
    const double gu = model_->control_scaling(member.epsu);
    psi_ = initial;
    for (int q = 0; q < slices_; ++q) {
      build_hamiltonian(g0, gu, u, q);
      kernel_.propagator(h_, dt_, u_);
      tmp_.noalias() = u_ * psi_;
      psi_.swap(tmp_);
    }
    return std::norm(psi_.dot(target));
  }

  double objective_and_gradient(const MemberParams& member, const RealMat& u,
                                const Vector& initial, const Vector& target,
                                RealMat& grad) {
    const double g0 = model_->free_scaling(member.eps0);
    const double gu = model_->control_scaling(member.epsu);
    grad.resize(channels_, slices_);

    psi_ = initial;
    for (int q = 0; q < slices_; ++q) {
      build_hamiltonian(g0, gu, u, q);
      kernel_.propagator_and_averages(h_, dt_, ops_, slice_props_[size_t(q)],
                                      &averages_[size_t(q) * size_t(channels_)]);
      tmp_.noalias() = slice_props_[size_t(q)] * psi_;
      psi_.swap(tmp_);
    }
    const cxd overlap = psi_.dot(target);

    // chi_0 = U(T)^H target, then chi and phi march forward together.
    chi_ = target;
    for (int q = slices_ - 1; q >= 0; --q) {
      tmp_.noalias() = slice_props_[size_t(q)].adjoint() * chi_;
      chi_.swap(tmp_);
    }
    phi_ = initial;
    for (int q = 0; q < slices_; ++q) {
      for (int m = 0; m < channels_; ++m) {
        tmp_.noalias() = averages_[size_t(q) * size_t(channels_) + size_t(m)] * phi_;
        grad(m, q) = 2.0 * gu * (overlap * chi_.dot(tmp_)).imag();
      }
      tmp_.noalias() = slice_props_[size_t(q)] * phi_;
      phi_.swap(tmp_);
      tmp_.noalias() = slice_props_[size_t(q)] * chi_;
      chi_.swap(tmp_);
    }
    return std::norm(overlap);
  }

 private:
  void build_hamiltonian(double g0, double gu, const RealMat& u, int q) {
    h_ = g0 * drift_;
    for (int m = 0; m < channels_; ++m) {
      h_ += (gu * u(m, q)) * ops_[size_t(m)];
    }
  }

  void resize_all(Eigen::Index d) {
    if constexpr (Dim == Eigen::Dynamic) {
      h_.resize(d, d);
      u_.resize(d, d);
      psi_.resize(d);
      phi_.resize(d);
      chi_.resize(d);
      tmp_.resize(d);
      Matrix zero = Matrix::Zero(d, d);
      slice_props_.assign(size_t(slices_), zero);
      averages_.assign(size_t(slices_) * size_t(channels_), zero);
    } else {
      slice_props_.resize(size_t(slices_));
      averages_.resize(size_t(slices_) * size_t(channels_));
    }
  }

  const HamiltonianModel* model_;
  int slices_;
  int channels_;
  double dt_;
  SliceKernel<Dim> kernel_;
  Matrix drift_{};
  std::vector<Matrix> ops_;
  Matrix h_{}, u_{};
  Vector psi_{}, phi_{}, chi_{}, tmp_{};
  std::vector<Matrix> slice_props_;
  std::vector<Matrix> averages_;
};

// Calls fn with an integral-constant dimension tag: compile-time 2 or 3 for
// the hot system sizes, dynamic otherwise.
template <class Fn>
decltype(auto) dispatch_dimension(Eigen::Index d, Fn&& fn) {
  switch (d) {
    case 2:
      return fn(std::integral_constant<int, 2>{});
    case 3:
      return fn(std::integral_constant<int, 3>{});
    default:
      return fn(std::integral_constant<int, Eigen::Dynamic>{});
  }
}

}  // namespace qec::detail
