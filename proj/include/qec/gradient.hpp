#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qec/detail/member_engine.hpp"
#include "qec/ensemble.hpp"
#include "qec/parallel.hpp"

namespace qec {

/// Gradient of a performance function with respect to the control values;
/// entry (m, q) is the slice-averaged functional derivative on slice q, so
/// the discrete partial derivative of the objective equals dt * entry.
class GradientField {
 public:
  explicit GradientField(RealMat values) : values_(std::move(values)) {
    require(values_.allFinite(), "GradientField: non-finite entries");
  }

  const RealMat& values() const noexcept { return values_; }
  int channels() const noexcept { return static_cast<int>(values_.rows()); }
  int slices() const noexcept { return static_cast<int>(values_.cols()); }

 private:
  RealMat values_;
};

/// Dynamics and target state of one class; members of the class share these
/// and differ only in their (eps0, epsu) parameters.
struct ClassModel {
  std::string label;
  HamiltonianModel model;
  QuantumState target;
};

namespace detail {

inline void check_control_shape(const ControlStrategy& u, const HamiltonianModel& model,
                                const TimeGrid& grid, const char* where) {
  require(u.channels() == model.channels(),
          std::string(where) + ": control channel count does not match model");
  require(u.slices() == grid.slices,
          std::string(where) + ": control slice count does not match time grid");
}

// Shared machinery for class-averaged objectives and gradients over a
// training set. Per-member evaluations run in parallel; the reduction always
// walks members in storage order, so results do not depend on worker count.
class EnsembleEvaluator {
 public:
  struct Result {
    double objective = 0.0;
    std::vector<double> per_class;  // class-mean objectives, class order
    RealMat gradient;               // empty unless requested
  };

  EnsembleEvaluator(const std::vector<ClassModel>& classes, const TrainingSet& training,
                    const TimeGrid& grid, const QuantumState& initial,
                    std::vector<double> weights)
      : classes_(&classes),
        training_(&training),
        grid_(grid),
        initial_(initial),
        weights_(std::move(weights)) {
    require(!classes.empty(), "EnsembleEvaluator: no classes");
    require(weights_.size() == classes.size(),
            "EnsembleEvaluator: one weight per class required");
    double sum = 0.0;
    for (double w : weights_) {
      require(w >= 0.0, "EnsembleEvaluator: weights must be nonnegative");
      sum += w;
    }
    require(std::abs(sum - 1.0) <= 1e-12, "EnsembleEvaluator: weights must sum to 1");

    const Eigen::Index d = classes.front().model.dim();
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      require(classes[c].model.dim() == d && classes[c].target.dim() == d,
              "EnsembleEvaluator: all classes must share the state dimension");
      require(initial.dim() == d, "EnsembleEvaluator: initial state dimension mismatch");
      require(index.emplace(classes[c].label, c).second,
              "EnsembleEvaluator: duplicate class label '" + classes[c].label + "'");
    }

    std::vector<int> counts(classes.size(), 0);
    member_class_.reserve(training.members.size());
    for (const auto& member : training.members) {
      auto it = index.find(member.label);
      require(it != index.end(),
              "EnsembleEvaluator: training member with unknown label '" + member.label + "'");
      require(std::isfinite(member.eps0) && std::isfinite(member.epsu),
              "EnsembleEvaluator: non-finite member parameters");
      member_class_.push_back(it->second);
      ++counts[it->second];
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
      require(counts[c] >= 1, "EnsembleEvaluator: class '" + classes[c].label +
                                  "' has no training members");
    }
    class_counts_ = std::move(counts);
  }

  Result evaluate(const ControlStrategy& u, bool with_gradient) const {
    const Eigen::Index d = classes_->front().model.dim();
    return detail::dispatch_dimension(d, [&](auto dim_tag) {
      return evaluate_impl<decltype(dim_tag)::value>(u, with_gradient);
    });
  }

  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  template <int Dim>
  Result evaluate_impl(const ControlStrategy& u, bool with_gradient) const {
    using Vector = typename MemberEngine<Dim>::Vector;
    const auto& classes = *classes_;
    const auto& members = training_->members;
    const std::size_t n = members.size();

    for (const auto& cls : classes) {
      check_control_shape(u, cls.model, grid_, "EnsembleEvaluator");
    }

    std::vector<double> objectives(n, 0.0);
    std::vector<RealMat> gradients(with_gradient ? n : 0);

    struct WorkerState {
      std::vector<MemberEngine<Dim>> engines;  // one per class
      Vector initial;
      std::vector<Vector> targets;
    };
    auto make_state = [&] {
      WorkerState state;
      state.engines.reserve(classes.size());
      state.targets.reserve(classes.size());
      for (const auto& cls : classes) {
        state.engines.emplace_back(cls.model, grid_);
        state.targets.emplace_back(cls.target.amplitudes());
      }
      state.initial = initial_.amplitudes();
      return state;
    };
    parallel::parallel_for_stateful(
        n, make_state, [&](WorkerState& state, std::size_t i) {
          const std::size_t c = member_class_[i];
          if (with_gradient) {
            objectives[i] = state.engines[c].objective_and_gradient(
                members[i], u.values(), state.initial, state.targets[c], gradients[i]);
          } else {
            objectives[i] =
                state.engines[c].objective(members[i], u.values(), state.initial,
                                           state.targets[c]);
          }
        });

    Result result;
    result.per_class.assign(classes.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      result.per_class[member_class_[i]] += objectives[i];
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
      result.per_class[c] /= class_counts_[c];
      result.objective += weights_[c] * result.per_class[c];
    }
    if (with_gradient) {
      result.gradient = RealMat::Zero(u.channels(), u.slices());
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = member_class_[i];
        result.gradient += (weights_[c] / class_counts_[c]) * gradients[i];
      }
    }
    return result;
  }

  const std::vector<ClassModel>* classes_;
  const TrainingSet* training_;
  TimeGrid grid_;
  QuantumState initial_;
  std::vector<double> weights_;
  std::vector<std::size_t> member_class_;
  std::vector<int> class_counts_;
};

}  // namespace detail

/// Gradient of the single-member transfer probability |<psi(T)|target>|^2.
inline GradientField fidelity_gradient(const HamiltonianModel& model,
                                       const MemberParams& member, const ControlStrategy& u,
                                       const TimeGrid& grid, const QuantumState& initial,
                                       const QuantumState& target) {
  detail::check_control_shape(u, model, grid, "fidelity_gradient");
  require(initial.dim() == model.dim() && target.dim() == model.dim(),
          "fidelity_gradient: state dimension mismatch");
  RealMat grad;
  detail::dispatch_dimension(model.dim(), [&](auto dim_tag) {
    constexpr int Dim = decltype(dim_tag)::value;
    detail::MemberEngine<Dim> engine(model, grid);
    typename detail::MemberEngine<Dim>::Vector psi0 = initial.amplitudes();
    typename detail::MemberEngine<Dim>::Vector tgt = target.amplitudes();
    engine.objective_and_gradient(member, u.values(), psi0, tgt, grad);
  });
  return GradientField(std::move(grad));
}

/// Class-averaged, weight-combined gradient of the training objective
/// J_N = sum_c w_c (1/N_c) sum_{members of c} J_member.
inline GradientField ensemble_gradient(const std::vector<ClassModel>& classes,
                                       const TrainingSet& training, const ControlStrategy& u,
                                       const TimeGrid& grid, const QuantumState& initial,
                                       const std::vector<double>& weights) {
  detail::EnsembleEvaluator evaluator(classes, training, grid, initial, weights);
  auto result = evaluator.evaluate(u, /*with_gradient=*/true);
  return GradientField(std::move(result.gradient));
}

/// Central-difference gradient of a black-box objective; the verification
/// oracle for the analytic expressions. Entries are
/// (J(u + delta e_mq) - J(u - delta e_mq)) / (2 delta).
template <class Objective>
GradientField finite_difference_gradient(Objective&& objective, const ControlStrategy& u,
                                         double delta) {
  require(delta > 0.0, "finite_difference_gradient: delta must be positive");
  RealMat grad(u.channels(), u.slices());
  RealMat work = u.values();
  for (int m = 0; m < u.channels(); ++m) {
    for (int q = 0; q < u.slices(); ++q) {
      const double base = work(m, q);
      work(m, q) = base + delta;
      const double plus = objective(ControlStrategy(work));
      work(m, q) = base - delta;
      const double minus = objective(ControlStrategy(work));
      work(m, q) = base;
      grad(m, q) = (plus - minus) / (2.0 * delta);
    }
  }
  return GradientField(std::move(grad));
}

}  // namespace qec
