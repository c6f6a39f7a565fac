#pragma once

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "qec/common.hpp"

namespace qec {

inline constexpr double kStateNormTol = 1e-10;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;

/// Pure state: unit complex amplitude vector of dimension d.
class QuantumState {
 public:
  explicit QuantumState(Vec amplitudes) : amps_(std::move(amplitudes)) {
    require(amps_.size() >= 1, "QuantumState: empty amplitude vector");
    require(amps_.allFinite(), "QuantumState: non-finite amplitudes");
    require(std::abs(amps_.norm() - 1.0) <= kStateNormTol,
            "QuantumState: amplitudes are not normalized (norm = " +
                std::to_string(amps_.norm()) + ")");
  }

  static QuantumState basis(Eigen::Index dim, Eigen::Index k) {
    require(dim >= 1 && k >= 0 && k < dim, "QuantumState::basis: index out of range");
    Vec v = Vec::Zero(dim);
    v(k) = 1.0;
    return QuantumState(std::move(v));
  }

  /// Equal-weight superposition (1/sqrt(d), ..., 1/sqrt(d)).
  static QuantumState uniform(Eigen::Index dim) {
    require(dim >= 1, "QuantumState::uniform: dimension must be positive");
    Vec v = Vec::Constant(dim, cxd(1.0 / std::sqrt(double(dim)), 0.0));
    return QuantumState(std::move(v));
  }

  const Vec& amplitudes() const noexcept { return amps_; }
  Eigen::Index dim() const noexcept { return amps_.size(); }

 private:
  Vec amps_;
};

/// Self-adjoint d x d operator; validated against its conjugate transpose.
class HermitianOperator {
 public:
  explicit HermitianOperator(Mat entries) : entries_(std::move(entries)) {
    require(entries_.rows() == entries_.cols() && entries_.rows() >= 1,
            "HermitianOperator: matrix must be square");
    require(entries_.allFinite(), "HermitianOperator: non-finite entries");
    const double dev = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
    require(dev <= kHermitianTol,
            "HermitianOperator: matrix is not Hermitian (max deviation " +
                std::to_string(dev) + ")");
  }

  const Mat& entries() const noexcept { return entries_; }
  Eigen::Index dim() const noexcept { return entries_.rows(); }

 private:
  Mat entries_;
};

/// Unitary d x d operator; validated via the max-norm of U'U - I.
class UnitaryOperator {
 public:
  explicit UnitaryOperator(Mat entries) : entries_(std::move(entries)) {
    require(entries_.rows() == entries_.cols() && entries_.rows() >= 1,
            "UnitaryOperator: matrix must be square");
    const Mat gram = entries_.adjoint() * entries_;
    const double dev =
        (gram - Mat::Identity(entries_.rows(), entries_.cols())).cwiseAbs().maxCoeff();
    require(dev <= kUnitaryTol,
            "UnitaryOperator: matrix is not unitary (max deviation " +
                std::to_string(dev) + ")");
  }

  const Mat& entries() const noexcept { return entries_; }
  Eigen::Index dim() const noexcept { return entries_.rows(); }

 private:
  Mat entries_;
};

/// Scalar map applied to an inhomogeneity parameter; identity by default.
using ScalingFn = std::function<double(double)>;

inline ScalingFn identity_scaling() {
  return [](double eps) { return eps; };
}

/// Drift plus control operators, shared by every member of an ensemble class.
/// A member's Hamiltonian is g0(eps0) H0 + gu(epsu) sum_m u_m H_m.
class HamiltonianModel {
 public:
  HamiltonianModel(HermitianOperator free, std::vector<HermitianOperator> control_ops,
                   ScalingFn free_scaling = identity_scaling(),
                   ScalingFn control_scaling = identity_scaling())
      : free_(std::move(free)),
        controls_(std::move(control_ops)),
        g0_(std::move(free_scaling)),
        gu_(std::move(control_scaling)) {
    require(!controls_.empty(), "HamiltonianModel: at least one control operator required");
    for (const auto& op : controls_) {
      require(op.dim() == free_.dim(),
              "HamiltonianModel: control operator dimension mismatch");
    }
    require(static_cast<bool>(g0_) && static_cast<bool>(gu_),
            "HamiltonianModel: scaling functions must be callable");
  }

  const HermitianOperator& free() const noexcept { return free_; }
  const std::vector<HermitianOperator>& control_ops() const noexcept { return controls_; }
  Eigen::Index dim() const noexcept { return free_.dim(); }
  int channels() const noexcept { return static_cast<int>(controls_.size()); }
  double free_scaling(double eps0) const { return g0_(eps0); }
  double control_scaling(double epsu) const { return gu_(epsu); }

 private:
  HermitianOperator free_;
  std::vector<HermitianOperator> controls_;
  ScalingFn g0_;
  ScalingFn gu_;
};

/// Uniform time discretization of [0, T] into Q slices.
struct TimeGrid {
  double horizon = 0.0;
  int slices = 0;

  TimeGrid(double horizon_, int slices_) : horizon(horizon_), slices(slices_) {
    require(std::isfinite(horizon) && horizon > 0.0, "TimeGrid: horizon must be positive");
    require(slices >= 1, "TimeGrid: slice count must be >= 1");
  }

  double dt() const noexcept { return horizon / slices; }
  /// Left endpoint of slice q.
  double time_at(int q) const noexcept { return q * dt(); }
};

/// Piecewise-constant control amplitudes; entry (m, q) is channel m on slice q.
class ControlStrategy {
 public:
  explicit ControlStrategy(RealMat values) : values_(std::move(values)) {
    require(values_.rows() >= 1 && values_.cols() >= 1,
            "ControlStrategy: empty control matrix");
    require(values_.allFinite(), "ControlStrategy: non-finite control values");
  }

  static ControlStrategy zero(int channels, int slices) {
    return ControlStrategy(RealMat::Zero(channels, slices));
  }

  /// u_m(t_q) = sin(t_q) on every channel, sampled at slice left endpoints.
  static ControlStrategy sine(int channels, const TimeGrid& grid) {
    RealMat v(channels, grid.slices);
    for (int q = 0; q < grid.slices; ++q) {
      const double s = std::sin(grid.time_at(q));
      for (int m = 0; m < channels; ++m) v(m, q) = s;
    }
    return ControlStrategy(std::move(v));
  }

  const RealMat& values() const noexcept { return values_; }
  RealMat& values() noexcept { return values_; }
  int channels() const noexcept { return static_cast<int>(values_.rows()); }
  int slices() const noexcept { return static_cast<int>(values_.cols()); }
  double max_amplitude() const { return values_.cwiseAbs().maxCoeff(); }

 private:
  RealMat values_;
};

/// Per-slice and cumulative propagators; cumulative[q] = U(t_q), cumulative[0] = I.
struct PropagatorCache {
  std::vector<Mat> per_slice;   // Q entries
  std::vector<Mat> cumulative;  // Q + 1 entries
};

/// Inhomogeneity parameters of one ensemble member.
struct MemberParams {
  double eps0 = 1.0;
  double epsu = 1.0;
  std::string label;
};

namespace detail {

// Eigendecomposition-based exp(-i H dt); H is validated Hermitian by the caller.
inline Mat hermitian_exp(const Mat& h, double dt) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  require(es.info() == Eigen::Success, "hermitian_exp: eigendecomposition failed");
  const Vec phases =
      (-imag_unit * dt * es.eigenvalues().array().cast<cxd>()).exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

/// Hamiltonian of one member under a fixed control column (Eq. of motion drift
/// plus scaled control terms).
inline HermitianOperator build_hamiltonian(const HamiltonianModel& model,
                                           const MemberParams& member,
                                           const Eigen::VectorXd& control_column) {
  require(control_column.size() == model.channels(),
          "build_hamiltonian: control column length must equal channel count");
  require(std::isfinite(member.eps0) && std::isfinite(member.epsu),
          "build_hamiltonian: member parameters must be finite");
  Mat h = model.free_scaling(member.eps0) * model.free().entries();
  const double gu = model.control_scaling(member.epsu);
  for (int m = 0; m < model.channels(); ++m) {
    h += gu * control_column(m) * model.control_ops()[size_t(m)].entries();
  }
  return HermitianOperator(std::move(h));
}

/// exp(-i H dt) by exact Hermitian eigendecomposition.
inline UnitaryOperator slice_propagator(const HermitianOperator& h, double dt) {
  require(std::isfinite(dt), "slice_propagator: dt must be finite");
  return UnitaryOperator(detail::hermitian_exp(h.entries(), dt));
}

struct PropagationResult {
  QuantumState final;
  PropagatorCache cache;
  std::vector<QuantumState> trajectory;  // empty unless requested; Q+1 states
};

/// Propagates `initial` under the member's Hamiltonian with piecewise-constant
/// controls. The trajectory (states at every slice boundary) is recorded only
/// on request; learning loops need just the cache and the final state.
inline PropagationResult propagate(const HamiltonianModel& model, const MemberParams& member,
                                   const ControlStrategy& u, const TimeGrid& grid,
                                   const QuantumState& initial,
                                   bool record_trajectory = false) {
  require(u.channels() == model.channels(),
          "propagate: control channels do not match model");
  require(u.slices() == grid.slices, "propagate: control slices do not match time grid");
  require(initial.dim() == model.dim(), "propagate: state dimension mismatch");

  const int q_count = grid.slices;
  const double dt = grid.dt();
  const Eigen::Index d = model.dim();

  PropagatorCache cache;
  cache.per_slice.reserve(size_t(q_count));
  cache.cumulative.reserve(size_t(q_count) + 1);
  cache.cumulative.push_back(Mat::Identity(d, d));

  Mat h = Mat::Zero(d, d);
  const Mat drift = model.free_scaling(member.eps0) * model.free().entries();
  const double gu = model.control_scaling(member.epsu);
  for (int q = 0; q < q_count; ++q) {
    h = drift;
    for (int m = 0; m < model.channels(); ++m) {
      h += gu * u.values()(m, q) * model.control_ops()[size_t(m)].entries();
    }
    Mat uq = detail::hermitian_exp(h, dt);
    cache.cumulative.push_back(uq * cache.cumulative.back());
    cache.per_slice.push_back(std::move(uq));
  }

  std::vector<QuantumState> trajectory;
  if (record_trajectory) {
    trajectory.reserve(size_t(q_count) + 1);
    for (const Mat& cum : cache.cumulative) {
      trajectory.emplace_back(Vec(cum * initial.amplitudes()));
    }
  }
  QuantumState final_state(Vec(cache.cumulative.back() * initial.amplitudes()));
  return PropagationResult{std::move(final_state), std::move(cache), std::move(trajectory)};
}

/// Bloch vector (x, y, z) of a two-level pure state.
inline std::array<double, 3> bloch_vector(const QuantumState& state) {
  if (state.dim() != 2) {
    throw ValidationError("bloch_vector: only defined for two-level states (d = " +
                          std::to_string(state.dim()) + ")");
  }
  const cxd c0 = state.amplitudes()(0);
  const cxd c1 = state.amplitudes()(1);
  const cxd cross = std::conj(c0) * c1;
  return {2.0 * cross.real(), 2.0 * cross.imag(), std::norm(c0) - std::norm(c1)};
}

}  // namespace qec
