#pragma once

#include <functional>
#include <iostream>
#include <optional>
#include <utility>
#include <vector>

#include "qec/gradient.hpp"

namespace qec {

/// Convergence rule: stop once the objective change stays below epsilon for
/// `patience` consecutive steps, or after max_iters iterations.
struct StoppingRule {
  double epsilon = 1e-4;
  int patience = 100;
  int max_iters = 50000;

  void validate() const {
    require(epsilon > 0.0, "StoppingRule: epsilon must be positive");
    require(patience >= 1, "StoppingRule: patience must be >= 1");
    require(max_iters >= 1, "StoppingRule: max_iters must be >= 1");
  }
};

namespace detail {

inline bool deltas_settled(const std::vector<double>& history, const StoppingRule& rule) {
  if (static_cast<int>(history.size()) < rule.patience + 1) return false;
  const std::size_t last = history.size() - 1;
  for (int i = 0; i < rule.patience; ++i) {
    if (std::abs(history[last - i] - history[last - i - 1]) >= rule.epsilon) return false;
  }
  return true;
}

}  // namespace detail

/// True iff the last `patience` consecutive objective deltas are all below
/// epsilon in magnitude, or the history has outgrown the iteration cap.
inline bool stopping_check(const std::vector<double>& history, const StoppingRule& rule) {
  rule.validate();
  if (static_cast<long>(history.size()) > rule.max_iters) return true;
  return detail::deltas_settled(history, rule);
}

/// Settings of one gradient-flow learning run.
struct LearnConfig {
  double learning_rate = 0.2;
  std::vector<double> weights;  // per class; empty selects equal weights
  StoppingRule stopping;
  std::optional<ControlStrategy> initial_control;  // default: sin(t) on every channel
  std::function<double(int)> rate_schedule;        // optional eta_k hook
  std::function<void(int, double)> progress;       // optional per-iteration callback

  void validate() const {
    require(std::isfinite(learning_rate) && learning_rate > 0.0,
            "LearnConfig: learning rate must be positive");
    stopping.validate();
  }
};

struct LearnResult {
  ControlStrategy optimal_control;
  std::vector<double> objective_history;            // J(u^k), k = 0..iterations_used
  std::vector<std::string> class_labels;            // order of per_class_history
  std::vector<std::vector<double>> per_class_history;
  int iterations_used = 0;
  bool converged = false;
};

namespace detail {

inline std::vector<double> resolve_weights(const LearnConfig& config, std::size_t k) {
  if (config.weights.empty()) {
    return std::vector<double>(k, 1.0 / double(k));
  }
  require(config.weights.size() == k, "LearnConfig: one weight per class required");
  return config.weights;
}

inline void warn_if_not_orthogonal(const std::vector<ClassModel>& classes) {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (std::size_t j = i + 1; j < classes.size(); ++j) {
      const double overlap = std::abs(
          classes[i].target.amplitudes().dot(classes[j].target.amplitudes()));
      if (overlap > 1e-9) {
        std::cerr << "qec: warning: targets of classes '" << classes[i].label << "' and '"
                  << classes[j].label << "' are not orthogonal (|<a|b>| = " << overlap
                  << "); classification cannot be perfect\n";
      }
    }
  }
}

inline LearnResult run_gradient_ascent(const std::vector<ClassModel>& classes,
                                       const TrainingSet& training, const TimeGrid& grid,
                                       const QuantumState& initial,
                                       const LearnConfig& config) {
  config.validate();
  warn_if_not_orthogonal(classes);
  const std::vector<double> weights = resolve_weights(config, classes.size());
  const EnsembleEvaluator evaluator(classes, training, grid, initial, weights);

  const int channels = classes.front().model.channels();
  ControlStrategy u = config.initial_control
                          ? *config.initial_control
                          : ControlStrategy::sine(channels, grid);
  check_control_shape(u, classes.front().model, grid, "run_gradient_ascent");

  LearnResult result{std::move(u), {}, {}, {}, 0, false};
  for (const auto& cls : classes) result.class_labels.push_back(cls.label);
  result.per_class_history.resize(classes.size());

  for (int k = 0;; ++k) {
    const auto eval = evaluator.evaluate(result.optimal_control, /*with_gradient=*/true);
    if (!std::isfinite(eval.objective)) {
      throw DivergenceError("learning objective became non-finite", k);
    }
    result.objective_history.push_back(eval.objective);
    for (std::size_t c = 0; c < classes.size(); ++c) {
      result.per_class_history[c].push_back(eval.per_class[c]);
    }
    if (config.progress) config.progress(k, eval.objective);

    if (detail::deltas_settled(result.objective_history, config.stopping)) {
      result.converged = true;
      break;
    }
    if (k >= config.stopping.max_iters) break;

    const double eta =
        config.rate_schedule ? config.rate_schedule(k) : config.learning_rate;
    result.optimal_control.values() += eta * eval.gradient;
  }
  result.iterations_used = static_cast<int>(result.objective_history.size()) - 1;
  return result;
}

}  // namespace detail

/// Two-system discrimination: gradient-flow ascent on
/// J = w_a |<psi_a(T)|target_a>|^2 + w_b |<psi_b(T)|target_b>|^2.
inline LearnResult discriminate(const HamiltonianModel& model, const MemberParams& member_a,
                                const MemberParams& member_b, const TimeGrid& grid,
                                const QuantumState& initial, const QuantumState& target_a,
                                const QuantumState& target_b, const LearnConfig& config) {
  const std::string label_a = member_a.label.empty() ? "a" : member_a.label;
  const std::string label_b = member_b.label.empty() ? "b" : member_b.label;
  require(label_a != label_b, "discriminate: the two systems need distinct labels");

  std::vector<ClassModel> classes;
  classes.push_back(ClassModel{label_a, model, target_a});
  classes.push_back(ClassModel{label_b, model, target_b});

  TrainingSet training;
  training.members = {MemberParams{member_a.eps0, member_a.epsu, label_a},
                      MemberParams{member_b.eps0, member_b.epsu, label_b}};
  training.partition = {{label_a, 1}, {label_b, 1}};

  LearnConfig cfg = config;
  if (cfg.weights.empty()) cfg.weights = {0.5, 0.5};
  return detail::run_gradient_ascent(classes, training, grid, initial, cfg);
}

/// Sampling-based learning over a training set: gradient-flow ascent on the
/// class-averaged objective J_N; covers binary and K-class problems alike.
inline LearnResult train_classifier(const std::vector<ClassModel>& classes,
                                    const TrainingSet& training, const TimeGrid& grid,
                                    const QuantumState& initial, const LearnConfig& config) {
  require(classes.size() >= 2, "train_classifier: at least two classes required");
  return detail::run_gradient_ascent(classes, training, grid, initial, config);
}

}  // namespace qec
