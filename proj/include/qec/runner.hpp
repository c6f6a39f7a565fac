#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qec/config.hpp"
#include "qec/io.hpp"

namespace qec {

struct RunOptions {
  std::optional<std::string> out_dir;  // overrides output.directory
  std::optional<std::uint64_t> seed;   // overrides eval.seed
  std::optional<int> threads;          // worker count; 0 = hardware default
  bool verbose = false;                // progress notes on stderr
};

/// Files produced by one run; every file is listed in the manifest with its
/// content hash.
struct OutputBundle {
  std::filesystem::path directory;
  std::vector<std::string> files;  // relative to directory
  std::filesystem::path manifest;
};

namespace run_detail {

using nlohmann::json;

struct Writer {
  std::filesystem::path dir;
  std::vector<std::string> files;

  std::filesystem::path path_of(const std::string& name) const { return dir / name; }

  void note(const std::string& name) { files.push_back(name); }
};

inline json learn_summary(const LearnResult& result) {
  json j;
  j["iterations"] = result.iterations_used;
  j["converged"] = result.converged;
  j["final_objective"] = result.objective_history.back();
  j["max_control_amplitude"] = result.optimal_control.max_amplitude();
  json per_class = json::object();
  for (std::size_t c = 0; c < result.class_labels.size(); ++c) {
    per_class[result.class_labels[c]] = result.per_class_history[c].back();
  }
  j["per_class_final"] = std::move(per_class);
  return j;
}

inline json eval_summary(const EvaluationReport& report) {
  json j;
  j["accuracy"] = report.accuracy;
  j["sample_count"] = report.sample_count;
  j["seed"] = report.seed;
  json per_class = json::array();
  for (const auto& cls : report.per_class) {
    per_class.push_back({{"label", cls.label},
                         {"mean_fidelity", cls.mean_fidelity},
                         {"mean_sq_fidelity", cls.mean_sq_fidelity}});
  }
  j["per_class"] = std::move(per_class);
  return j;
}

inline std::vector<ClassModel> class_models(const ExperimentConfig& config) {
  std::vector<ClassModel> models;
  for (const auto& cls : config.classes) {
    require(cls.target.has_value(), "run: class '" + cls.label + "' lacks a target");
    models.push_back(ClassModel{cls.label, config.model, *cls.target});
  }
  return models;
}

inline std::vector<ClassEvaluationSpec> evaluation_specs(const ExperimentConfig& config) {
  std::vector<ClassEvaluationSpec> specs;
  for (const auto& cls : config.classes) {
    specs.push_back(ClassEvaluationSpec{ClassModel{cls.label, config.model, *cls.target},
                                        *cls.dist});
  }
  return specs;
}

inline std::vector<double> class_weights(const ExperimentConfig& config) {
  std::vector<double> weights;
  for (const auto& cls : config.classes) {
    if (cls.weight) weights.push_back(*cls.weight);
  }
  if (weights.empty()) {
    weights.assign(config.classes.size(), 1.0 / double(config.classes.size()));
  }
  return weights;
}

inline TrainingSet training_set(const ExperimentConfig& config) {
  std::vector<ClassSamplingSpec> specs;
  for (const auto& cls : config.classes) {
    specs.push_back(ClassSamplingSpec{*cls.dist, *cls.grid, cls.label});
  }
  return build_training_set(specs);
}

inline std::vector<MemberParams> grid_members(const ExperimentConfig& config) {
  std::vector<MemberParams> members;
  for (const auto& cls : config.classes) {
    auto cls_members = grid_samples(*cls.dist, *cls.grid, cls.label);
    members.insert(members.end(), cls_members.begin(), cls_members.end());
  }
  return members;
}

inline LearnConfig with_progress(const ExperimentConfig& config, bool verbose) {
  LearnConfig learn = config.learn;
  if (verbose) {
    learn.progress = [](int k, double objective) {
      if (k % 1000 == 0) {
        std::cerr << "  iter " << k << "  J = " << objective << "\n";
      }
    };
  }
  return learn;
}

inline ControlStrategy load_control(const ExperimentConfig& config) {
  require(config.control_csv.has_value(), "run: missing control CSV path");
  io::ControlCsv loaded = io::read_control_csv(*config.control_csv);
  require(loaded.control.slices() == config.time.slices,
          "run: control CSV slice count does not match the time grid");
  require(loaded.control.channels() == config.model.channels(),
          "run: control CSV channel count does not match the system");
  return loaded.control;
}

}  // namespace run_detail

/// Executes one experiment and persists its artifacts. Returns the produced
/// bundle; throws ConfigError / ValidationError / DivergenceError / IoError.
inline OutputBundle run(const ExperimentConfig& config, const RunOptions& opts = {}) {
  using run_detail::Writer;
  using json = nlohmann::json;

  if (opts.threads) parallel::set_worker_count(*opts.threads);

  ExperimentConfig cfg = config;  // local copy so the seed override stays local
  if (opts.seed && cfg.eval) cfg.eval->seed = *opts.seed;
  if (opts.out_dir) cfg.output.directory = *opts.out_dir;

  Writer out{std::filesystem::path(cfg.output.directory), {}};
  json report;
  report["mode"] = to_string(cfg.mode);
  report["system"] = {{"dimension", cfg.model.dim()}, {"channels", cfg.model.channels()}};
  report["time"] = {{"horizon", cfg.time.horizon}, {"slices", cfg.time.slices}};

  switch (cfg.mode) {
    case RunMode::Discriminate: {
      LearnConfig learn = run_detail::with_progress(cfg, opts.verbose);
      if (learn.weights.empty()) learn.weights = run_detail::class_weights(cfg);
      const LearnResult result = discriminate(
          cfg.model, *cfg.classes[0].member, *cfg.classes[1].member, cfg.time, cfg.initial,
          *cfg.classes[0].target, *cfg.classes[1].target, learn);
      io::write_control_csv(out.path_of("control.csv"), result.optimal_control, cfg.time);
      out.note("control.csv");
      io::write_history_csv(out.path_of("history.csv"), result);
      out.note("history.csv");
      report["learn"] = run_detail::learn_summary(result);
      if (cfg.output.bloch) {
        auto trajectories = bloch_trajectories(
            cfg.model, {*cfg.classes[0].member, *cfg.classes[1].member},
            result.optimal_control, cfg.time, cfg.initial);
        io::write_bloch_csv(out.path_of("bloch.csv"), trajectories);
        out.note("bloch.csv");
      }
      break;
    }
    case RunMode::TrainBinary:
    case RunMode::TrainMulticlass: {
      auto models = run_detail::class_models(cfg);
      const TrainingSet training = run_detail::training_set(cfg);
      LearnConfig learn = run_detail::with_progress(cfg, opts.verbose);
      if (learn.weights.empty()) learn.weights = run_detail::class_weights(cfg);
      const LearnResult result =
          train_classifier(models, training, cfg.time, cfg.initial, learn);
      io::write_control_csv(out.path_of("control.csv"), result.optimal_control, cfg.time);
      out.note("control.csv");
      io::write_history_csv(out.path_of("history.csv"), result);
      out.note("history.csv");
      report["learn"] = run_detail::learn_summary(result);
      if (cfg.eval) {
        const EvaluationReport eval_report = classification_accuracy(
            run_detail::evaluation_specs(cfg), result.optimal_control, cfg.time, cfg.initial,
            cfg.eval->n_test, cfg.eval->seed, run_detail::class_weights(cfg));
        report["evaluation"] = run_detail::eval_summary(eval_report);
      }
      if (cfg.output.bloch) {
        auto trajectories =
            bloch_trajectories(cfg.model, run_detail::grid_members(cfg),
                               result.optimal_control, cfg.time, cfg.initial);
        io::write_bloch_csv(out.path_of("bloch.csv"), trajectories);
        out.note("bloch.csv");
      }
      break;
    }
    case RunMode::Evaluate: {
      const ControlStrategy control = run_detail::load_control(cfg);
      const EvaluationReport eval_report = classification_accuracy(
          run_detail::evaluation_specs(cfg), control, cfg.time, cfg.initial,
          cfg.eval->n_test, cfg.eval->seed, run_detail::class_weights(cfg));
      report["evaluation"] = run_detail::eval_summary(eval_report);
      break;
    }
    case RunMode::Pareto: {
      ParetoSweepConfig sweep_cfg{cfg.model,
                                  cfg.initial,
                                  QuantumState::basis(cfg.model.dim(), 0),
                                  QuantumState::basis(cfg.model.dim(), 1),
                                  cfg.time,
                                  SampleGridSpec{5, 5},
                                  run_detail::with_progress(cfg, false),
                                  cfg.pareto->disp_values,
                                  cfg.pareto->diff_values,
                                  cfg.eval->n_test,
                                  cfg.eval->seed,
                                  {}};
      if (opts.verbose) {
        sweep_cfg.progress = [](const ParetoPoint& p) {
          std::cerr << "  point (Disp = " << p.disp << ", Diff = " << p.diff << "): ";
          if (p.accuracy) {
            std::cerr << "accuracy " << *p.accuracy << " after " << p.iterations
                      << " iterations\n";
          } else {
            std::cerr << "failed: " << p.error << "\n";
          }
        };
      }
      const std::vector<ParetoPoint> points = pareto_sweep(sweep_cfg);
      io::write_sweep_csv(out.path_of("sweep.csv"), points);
      out.note("sweep.csv");
      json points_json = json::array();
      for (const auto& p : points) {
        json pj = {{"disp", p.disp},
                   {"diff", p.diff},
                   {"converged", p.converged},
                   {"iterations", p.iterations}};
        if (p.accuracy) pj["accuracy"] = *p.accuracy;
        if (!p.error.empty()) pj["error"] = p.error;
        points_json.push_back(std::move(pj));
      }
      report["pareto"] = std::move(points_json);
      break;
    }
    case RunMode::BlochExport: {
      const ControlStrategy control = run_detail::load_control(cfg);
      auto trajectories = bloch_trajectories(cfg.model, run_detail::grid_members(cfg),
                                             control, cfg.time, cfg.initial);
      io::write_bloch_csv(out.path_of("bloch.csv"), trajectories);
      out.note("bloch.csv");
      report["bloch"] = {{"members", trajectories.size()},
                         {"points_per_member", cfg.time.slices + 1}};
      break;
    }
  }

  io::write_json(out.path_of("report.json"), report);
  out.note("report.json");

  // Manifest last, listing every artifact with its content hash.
  json manifest;
  manifest["algorithm"] = "fnv1a64";
  json files = json::array();
  for (const auto& name : out.files) {
    files.push_back({{"path", name}, {"hash", io::hash_hex(io::hash_file(out.path_of(name)))}});
  }
  manifest["files"] = std::move(files);
  io::write_json(out.path_of("manifest.json"), manifest);

  return OutputBundle{out.dir, out.files, out.path_of("manifest.json")};
}

inline OutputBundle run_config_file(const std::filesystem::path& path,
                                    const RunOptions& opts = {}) {
  return run(load_config(path), opts);
}

}  // namespace qec
