#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qec/learning.hpp"

namespace qec {

/// State-transfer fidelity |<state|target>| between pure states.
inline double fidelity(const QuantumState& state, const QuantumState& target) {
  require(state.dim() == target.dim(), "fidelity: state dimensions differ");
  return std::abs(state.amplitudes().dot(target.amplitudes()));
}

struct ClassReport {
  std::string label;
  double mean_fidelity = 0.0;     // mean F over the test draw
  double mean_sq_fidelity = 0.0;  // mean F^2; feeds the accuracy
  std::vector<double> fidelity_samples;  // populated only on request
};

/// Monte-Carlo scoring of a control on freshly drawn test members.
struct EvaluationReport {
  std::vector<ClassReport> per_class;
  double accuracy = 0.0;  // weighted mean of per-class mean squared fidelities
  int sample_count = 0;   // per class
  std::uint64_t seed = 0;
};

/// Dynamics, target, and parameter law of one class under evaluation.
struct ClassEvaluationSpec {
  ClassModel cls;
  DistributionSpec dist;
};

/// Draws n_test members per class, propagates each under the control, and
/// returns the classification accuracy zeta = sum_c w_c mean(F^2) together
/// with per-class statistics. Equal class weights by default.
inline EvaluationReport classification_accuracy(
    const std::vector<ClassEvaluationSpec>& specs, const ControlStrategy& u,
    const TimeGrid& grid, const QuantumState& initial, int n_test, std::uint64_t seed,
    std::vector<double> weights = {}, bool keep_samples = false) {
  require(!specs.empty(), "classification_accuracy: no classes");
  require(n_test >= 1, "classification_accuracy: n_test must be >= 1");
  if (weights.empty()) weights.assign(specs.size(), 1.0 / double(specs.size()));
  require(weights.size() == specs.size(),
          "classification_accuracy: one weight per class required");

  EvaluationReport report;
  report.sample_count = n_test;
  report.seed = seed;

  for (std::size_t c = 0; c < specs.size(); ++c) {
    const auto& spec = specs[c];
    detail::check_control_shape(u, spec.cls.model, grid, "classification_accuracy");
    require(initial.dim() == spec.cls.model.dim() &&
                spec.cls.target.dim() == spec.cls.model.dim(),
            "classification_accuracy: state dimension mismatch");

    const std::vector<MemberParams> members =
        draw_test_samples(spec.dist, n_test, detail::derive_seed(seed, c), spec.cls.label);

    std::vector<double> sq(members.size(), 0.0);
    detail::dispatch_dimension(spec.cls.model.dim(), [&](auto dim_tag) {
      constexpr int Dim = decltype(dim_tag)::value;
      using Engine = detail::MemberEngine<Dim>;
      using Vector = typename Engine::Vector;
      struct WorkerState {
        Engine engine;
        Vector initial;
        Vector target;
      };
      parallel::parallel_for_stateful(
          members.size(),
          [&] {
            return WorkerState{Engine(spec.cls.model, grid), Vector(initial.amplitudes()),
                               Vector(spec.cls.target.amplitudes())};
          },
          [&](WorkerState& state, std::size_t i) {
            sq[i] = state.engine.objective(members[i], u.values(), state.initial,
                                           state.target);
          });
    });

    ClassReport cls_report;
    cls_report.label = spec.cls.label;
    double sum_f = 0.0, sum_sq = 0.0;
    for (double v : sq) {
      sum_sq += v;
      sum_f += std::sqrt(v);
    }
    cls_report.mean_fidelity = sum_f / double(members.size());
    cls_report.mean_sq_fidelity = sum_sq / double(members.size());
    if (keep_samples) {
      cls_report.fidelity_samples.reserve(sq.size());
      for (double v : sq) cls_report.fidelity_samples.push_back(std::sqrt(v));
    }
    report.accuracy += weights[c] * cls_report.mean_sq_fidelity;
    report.per_class.push_back(std::move(cls_report));
  }
  return report;
}

/// One point of the dispersion/difference accuracy surface.
struct ParetoPoint {
  double disp = 0.0;  // shared 3-sigma of all parameter laws
  double diff = 0.0;  // mean separation between the classes, per axis
  std::optional<double> accuracy;  // empty when training failed
  bool converged = false;
  int iterations = 0;
  std::string error;  // failure note when accuracy is empty
};

struct ParetoSweepConfig {
  HamiltonianModel model;
  QuantumState initial;
  QuantumState target_a;
  QuantumState target_b;
  TimeGrid grid;
  SampleGridSpec samples;
  LearnConfig learn;
  std::vector<double> disp_values;
  std::vector<double> diff_values;
  int n_test = 10000;
  std::uint64_t seed = 1;
  std::function<void(const ParetoPoint&)> progress;
};

/// For every (Disp, Diff) pair, trains a fresh binary classifier on symmetric
/// class laws (means 1 -+ Diff/2 on both axes, shared 3-sigma = Disp) and
/// scores it by Monte Carlo. A failed point is recorded and the sweep
/// continues. Points are ordered Disp-major.
inline std::vector<ParetoPoint> pareto_sweep(const ParetoSweepConfig& cfg) {
  require(!cfg.disp_values.empty() && !cfg.diff_values.empty(),
          "pareto_sweep: value grids must be nonempty");
  std::vector<ParetoPoint> points;
  points.reserve(cfg.disp_values.size() * cfg.diff_values.size());
  std::size_t point_index = 0;
  for (double disp : cfg.disp_values) {
    for (double diff : cfg.diff_values) {
      ParetoPoint point;
      point.disp = disp;
      point.diff = diff;
      try {
        require(disp > 0.0, "pareto_sweep: Disp must be positive");
        require(diff >= 0.0, "pareto_sweep: Diff must be nonnegative");
        DistributionSpec dist_a{1.0 - 0.5 * diff, disp, 1.0 - 0.5 * diff, disp,
                                {}, {}, {}, {}};
        DistributionSpec dist_b{1.0 + 0.5 * diff, disp, 1.0 + 0.5 * diff, disp,
                                {}, {}, {}, {}};
        const TrainingSet training = build_training_set(
            {{dist_a, cfg.samples, "A"}, {dist_b, cfg.samples, "B"}});
        std::vector<ClassModel> classes{ClassModel{"A", cfg.model, cfg.target_a},
                                        ClassModel{"B", cfg.model, cfg.target_b}};
        const LearnResult learned =
            train_classifier(classes, training, cfg.grid, cfg.initial, cfg.learn);
        point.converged = learned.converged;
        point.iterations = learned.iterations_used;
        const EvaluationReport report = classification_accuracy(
            {{classes[0], dist_a}, {classes[1], dist_b}}, learned.optimal_control,
            cfg.grid, cfg.initial, cfg.n_test, detail::derive_seed(cfg.seed, point_index));
        point.accuracy = report.accuracy;
      } catch (const std::exception& e) {
        point.accuracy.reset();
        point.error = e.what();
      }
      if (cfg.progress) cfg.progress(point);
      points.push_back(std::move(point));
      ++point_index;
    }
  }
  return points;
}

/// Bloch-sphere trace of one member under a control.
struct BlochTrajectory {
  std::vector<double> times;                   // slice boundaries, Q + 1 entries
  std::vector<std::array<double, 3>> points;   // unit vectors
  MemberParams member;
};

/// Trajectories of two-level members at every slice boundary.
inline std::vector<BlochTrajectory> bloch_trajectories(const HamiltonianModel& model,
                                                       const std::vector<MemberParams>& members,
                                                       const ControlStrategy& u,
                                                       const TimeGrid& grid,
                                                       const QuantumState& initial) {
  if (model.dim() != 2) {
    throw ValidationError("bloch_trajectories: only defined for two-level systems");
  }
  std::vector<BlochTrajectory> trajectories(members.size());
  parallel::parallel_for(members.size(), [&](std::size_t i) {
    const PropagationResult run =
        propagate(model, members[i], u, grid, initial, /*record_trajectory=*/true);
    BlochTrajectory traj;
    traj.member = members[i];
    traj.times.reserve(size_t(grid.slices) + 1);
    traj.points.reserve(size_t(grid.slices) + 1);
    for (int q = 0; q <= grid.slices; ++q) {
      traj.times.push_back(grid.time_at(q));
      traj.points.push_back(bloch_vector(run.trajectory[size_t(q)]));
    }
    trajectories[i] = std::move(traj);
  });
  return trajectories;
}

}  // namespace qec
