#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qec/learning.hpp"
#include "qec/systems.hpp"

namespace qec {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class RunMode { Discriminate, TrainBinary, TrainMulticlass, Evaluate, Pareto, BlochExport };

inline std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Discriminate: return "discriminate";
    case RunMode::TrainBinary: return "train-binary";
    case RunMode::TrainMulticlass: return "train-multiclass";
    case RunMode::Evaluate: return "evaluate";
    case RunMode::Pareto: return "pareto";
    case RunMode::BlochExport: return "bloch-export";
  }
  return "?";
}

struct ClassConfig {
  std::string label;
  std::optional<QuantumState> target;
  std::optional<double> weight;
  std::optional<DistributionSpec> dist;
  std::optional<SampleGridSpec> grid;
  std::optional<MemberParams> member;
};

struct EvalConfig {
  int n_test = 10000;
  std::uint64_t seed = 1;
};

struct ParetoConfig {
  std::vector<double> disp_values;
  std::vector<double> diff_values;
};

struct OutputConfig {
  std::string directory = "out";
  bool bloch = false;
};

/// Fully validated experiment description; building one runs every
/// module-level invariant before any computation starts.
struct ExperimentConfig {
  RunMode mode;
  HamiltonianModel model;
  TimeGrid time;
  QuantumState initial;
  std::vector<ClassConfig> classes;
  bool midpoint_truncation = false;
  LearnConfig learn;
  std::optional<EvalConfig> eval;
  std::optional<ParetoConfig> pareto;
  std::optional<std::string> control_csv;
  OutputConfig output;
};

namespace cfg_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

inline void check_keys(const json& obj, const std::string& where,
                       std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) fail(where, "unknown key '" + key + "'");
  }
}

inline const json& require_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing required key '") + key + "'");
  return *it;
}

inline double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

inline int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

inline std::uint64_t as_seed(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !j.is_number_integer()) fail(where, "expected an integer seed");
  const auto v = j.get<std::int64_t>();
  if (v < 0) fail(where, "seed must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

inline std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

inline bool as_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected a boolean");
  return j.get<bool>();
}

inline cxd as_complex(const json& j, const std::string& where) {
  if (j.is_number()) return cxd(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return cxd(j[0].get<double>(), j[1].get<double>());
  }
  fail(where, "expected a number or an [re, im] pair");
}

inline Mat parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Mat m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[size_t(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
      fail(where, "matrix must be square");
    }
    for (Eigen::Index c = 0; c < rows; ++c) {
      m(r, c) = as_complex(row[size_t(c)], where);
    }
  }
  return m;
}

inline QuantumState parse_state(const json& j, Eigen::Index dim, const std::string& where) {
  try {
    if (j.is_string()) {
      const std::string s = j.get<std::string>();
      if (s == "uniform") return QuantumState::uniform(dim);
      if (s.rfind("basis:", 0) == 0) {
        const int k = std::stoi(s.substr(6));
        return QuantumState::basis(dim, k);
      }
      fail(where, "unknown state shorthand '" + s + "' (use 'uniform' or 'basis:K')");
    }
    if (j.is_array()) {
      if (static_cast<Eigen::Index>(j.size()) != dim) {
        fail(where, "state length does not match system dimension");
      }
      Vec v(dim);
      for (Eigen::Index i = 0; i < dim; ++i) v(i) = as_complex(j[size_t(i)], where);
      return QuantumState(std::move(v));
    }
  } catch (const ValidationError& e) {
    fail(where, e.what());
  } catch (const std::invalid_argument&) {
    fail(where, "malformed basis index");
  }
  fail(where, "expected a state array or shorthand string");
}

inline HamiltonianModel parse_system(const json& j) {
  const std::string where = "system";
  check_keys(j, where, {"operators", "dimension", "free", "controls"});
  const std::string kind = as_string(require_field(j, "operators", where), where + ".operators");
  if (kind == "spin-half") {
    if (j.contains("dimension") && as_int(j["dimension"], where + ".dimension") != 2) {
      fail(where, "spin-half systems have dimension 2");
    }
    return spin_half_model();
  }
  if (kind == "lambda3") {
    if (j.contains("dimension") && as_int(j["dimension"], where + ".dimension") != 3) {
      fail(where, "lambda3 systems have dimension 3");
    }
    return lambda_system_model();
  }
  if (kind == "explicit") {
    try {
      Mat free = parse_matrix(require_field(j, "free", where), where + ".free");
      const json& controls = require_field(j, "controls", where);
      if (!controls.is_array() || controls.empty()) {
        fail(where + ".controls", "expected a nonempty array of matrices");
      }
      std::vector<HermitianOperator> ops;
      for (const auto& c : controls) {
        ops.emplace_back(parse_matrix(c, where + ".controls"));
      }
      if (j.contains("dimension") &&
          as_int(j["dimension"], where + ".dimension") != free.rows()) {
        fail(where, "dimension does not match the operator size");
      }
      return HamiltonianModel(HermitianOperator(std::move(free)), std::move(ops));
    } catch (const ValidationError& e) {
      fail(where, e.what());
    }
  }
  fail(where + ".operators", "expected 'spin-half', 'lambda3' or 'explicit'");
}

inline DistributionSpec parse_dist(const json& j, const std::string& where) {
  check_keys(j, where,
             {"mean0", "threesigma0", "meanu", "threesigmau", "lower0", "upper0",
              "loweru", "upperu"});
  DistributionSpec dist;
  dist.mean0 = as_number(require_field(j, "mean0", where), where + ".mean0");
  dist.threesigma0 = as_number(require_field(j, "threesigma0", where), where + ".threesigma0");
  dist.meanu = as_number(require_field(j, "meanu", where), where + ".meanu");
  dist.threesigmau = as_number(require_field(j, "threesigmau", where), where + ".threesigmau");
  auto bound = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    return as_number(j[key], where + "." + key);
  };
  dist.lower0 = bound("lower0");
  dist.upper0 = bound("upper0");
  dist.loweru = bound("loweru");
  dist.upperu = bound("upperu");
  try {
    dist.validate();
  } catch (const ValidationError& e) {
    fail(where, e.what());
  }
  return dist;
}

inline SampleGridSpec parse_grid(const json& j, const std::string& where) {
  check_keys(j, where, {"n0", "nu"});
  SampleGridSpec grid;
  grid.n0 = as_int(require_field(j, "n0", where), where + ".n0");
  grid.nu = as_int(require_field(j, "nu", where), where + ".nu");
  try {
    grid.validate();
  } catch (const ValidationError& e) {
    fail(where, e.what());
  }
  return grid;
}

inline void validate_label(const std::string& label, const std::string& where) {
  if (label.empty()) fail(where, "label must be nonempty");
  for (char c : label) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) fail(where, "label '" + label + "' may use only letters, digits, '_' and '-'");
  }
}

}  // namespace cfg_detail

/// Parses and fully validates an experiment description. Unknown keys are
/// rejected; every referenced domain invariant is checked here, before any
/// computation.
inline ExperimentConfig parse_config(const nlohmann::json& root) {
  using namespace cfg_detail;
  check_keys(root, "top level",
             {"mode", "system", "time", "initial_state", "classes", "truncation", "learn",
              "eval", "pareto", "control_csv", "output"});

  const std::string mode_str = as_string(require_field(root, "mode", "top level"), "mode");
  RunMode mode;
  if (mode_str == "discriminate") mode = RunMode::Discriminate;
  else if (mode_str == "train-binary") mode = RunMode::TrainBinary;
  else if (mode_str == "train-multiclass") mode = RunMode::TrainMulticlass;
  else if (mode_str == "evaluate") mode = RunMode::Evaluate;
  else if (mode_str == "pareto") mode = RunMode::Pareto;
  else if (mode_str == "bloch-export") mode = RunMode::BlochExport;
  else fail("mode", "unknown mode '" + mode_str + "'");

  HamiltonianModel model = parse_system(require_field(root, "system", "top level"));
  const Eigen::Index dim = model.dim();

  const json& time_block = require_field(root, "time", "top level");
  check_keys(time_block, "time", {"horizon", "slices"});
  double horizon = as_number(require_field(time_block, "horizon", "time"), "time.horizon");
  int slices = as_int(require_field(time_block, "slices", "time"), "time.slices");
  std::optional<TimeGrid> grid;
  try {
    grid.emplace(horizon, slices);
  } catch (const ValidationError& e) {
    fail("time", e.what());
  }

  QuantumState initial =
      parse_state(require_field(root, "initial_state", "top level"), dim, "initial_state");

  // Classes.
  std::vector<ClassConfig> classes;
  const bool classes_allowed = mode != RunMode::Pareto;
  if (root.contains("classes")) {
    if (!classes_allowed) fail("classes", "the pareto mode builds its own classes");
    const json& arr = root["classes"];
    if (!arr.is_array() || arr.empty()) fail("classes", "expected a nonempty array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string where = "classes[" + std::to_string(i) + "]";
      const json& cj = arr[i];
      check_keys(cj, where, {"label", "target", "weight", "dist", "grid", "member"});
      ClassConfig cls;
      cls.label = as_string(require_field(cj, "label", where), where + ".label");
      validate_label(cls.label, where + ".label");
      if (cj.contains("target")) {
        cls.target = parse_state(cj["target"], dim, where + ".target");
      }
      if (cj.contains("weight")) {
        cls.weight = as_number(cj["weight"], where + ".weight");
        if (!(*cls.weight >= 0.0)) fail(where + ".weight", "weight must be nonnegative");
      }
      if (cj.contains("dist")) cls.dist = parse_dist(cj["dist"], where + ".dist");
      if (cj.contains("grid")) cls.grid = parse_grid(cj["grid"], where + ".grid");
      if (cj.contains("member")) {
        const json& mj = cj["member"];
        check_keys(mj, where + ".member", {"eps0", "epsu"});
        MemberParams m;
        m.eps0 = as_number(require_field(mj, "eps0", where + ".member"), where + ".member.eps0");
        m.epsu = as_number(require_field(mj, "epsu", where + ".member"), where + ".member.epsu");
        m.label = cls.label;
        cls.member = m;
      }
      for (const auto& prev : classes) {
        if (prev.label == cls.label) fail(where, "duplicate class label '" + cls.label + "'");
      }
      classes.push_back(std::move(cls));
    }
  } else if (classes_allowed) {
    fail("top level", "missing required key 'classes'");
  }

  // Per-mode class requirements.
  auto require_per_class = [&](bool need_target, bool need_dist, bool need_grid,
                               bool need_member) {
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const std::string where = "classes[" + std::to_string(i) + "]";
      if (need_target && !classes[i].target) fail(where, "missing 'target'");
      if (need_dist && !classes[i].dist) fail(where, "missing 'dist'");
      if (need_grid && !classes[i].grid) fail(where, "missing 'grid'");
      if (need_member && !classes[i].member) fail(where, "missing 'member'");
    }
  };
  switch (mode) {
    case RunMode::Discriminate:
      if (classes.size() != 2) fail("classes", "discriminate mode needs exactly 2 classes");
      require_per_class(true, false, false, true);
      break;
    case RunMode::TrainBinary:
      if (classes.size() != 2) fail("classes", "train-binary mode needs exactly 2 classes");
      require_per_class(true, true, true, false);
      break;
    case RunMode::TrainMulticlass:
      if (classes.size() < 2) fail("classes", "train-multiclass mode needs >= 2 classes");
      require_per_class(true, true, true, false);
      break;
    case RunMode::Evaluate:
      if (classes.size() < 2) fail("classes", "evaluate mode needs >= 2 classes");
      require_per_class(true, true, false, false);
      break;
    case RunMode::BlochExport:
      require_per_class(false, true, true, false);
      break;
    case RunMode::Pareto:
      break;
  }

  // Weights: all or none.
  {
    std::size_t with_weight = 0;
    double sum = 0.0;
    for (const auto& c : classes) {
      if (c.weight) {
        ++with_weight;
        sum += *c.weight;
      }
    }
    if (with_weight != 0 && with_weight != classes.size()) {
      fail("classes", "either every class carries a weight or none does");
    }
    if (with_weight == classes.size() && !classes.empty() && std::abs(sum - 1.0) > 1e-12) {
      fail("classes", "class weights must sum to 1");
    }
  }

  // Truncation.
  bool midpoint_truncation = false;
  if (root.contains("truncation")) {
    const std::string t = as_string(root["truncation"], "truncation");
    if (t == "midpoint") {
      midpoint_truncation = true;
      if (classes.size() != 2) fail("truncation", "midpoint truncation needs exactly 2 classes");
      if (!classes[0].dist || !classes[1].dist) {
        fail("truncation", "midpoint truncation needs per-class distributions");
      }
      try {
        auto [da, db] = apply_midpoint_truncation(*classes[0].dist, *classes[1].dist);
        classes[0].dist = da;
        classes[1].dist = db;
      } catch (const ValidationError& e) {
        fail("truncation", e.what());
      }
    } else if (t != "none") {
      fail("truncation", "expected 'none' or 'midpoint'");
    }
  }

  // Learn block.
  LearnConfig learn;
  const bool learn_required = mode == RunMode::Discriminate || mode == RunMode::TrainBinary ||
                              mode == RunMode::TrainMulticlass || mode == RunMode::Pareto;
  if (root.contains("learn")) {
    if (!learn_required) fail("learn", "mode '" + mode_str + "' does not train");
    const json& lj = root["learn"];
    check_keys(lj, "learn",
               {"learning_rate", "epsilon", "patience", "max_iters", "initial_control"});
    if (lj.contains("learning_rate")) {
      learn.learning_rate = as_number(lj["learning_rate"], "learn.learning_rate");
    }
    if (lj.contains("epsilon")) learn.stopping.epsilon = as_number(lj["epsilon"], "learn.epsilon");
    if (lj.contains("patience")) learn.stopping.patience = as_int(lj["patience"], "learn.patience");
    if (lj.contains("max_iters")) {
      learn.stopping.max_iters = as_int(lj["max_iters"], "learn.max_iters");
    }
    if (lj.contains("initial_control")) {
      const std::string init = as_string(lj["initial_control"], "learn.initial_control");
      if (init == "zero") {
        learn.initial_control = ControlStrategy::zero(model.channels(), grid->slices);
      } else if (init != "sin") {
        fail("learn.initial_control", "expected 'sin' or 'zero'");
      }
    }
    try {
      learn.validate();
    } catch (const ValidationError& e) {
      fail("learn", e.what());
    }
  } else if (learn_required) {
    fail("top level", "missing required key 'learn'");
  }
  for (const auto& c : classes) {
    if (c.weight) learn.weights.push_back(*c.weight);
  }

  // Eval block.
  std::optional<EvalConfig> eval;
  if (root.contains("eval")) {
    const json& ej = root["eval"];
    check_keys(ej, "eval", {"n_test", "seed"});
    EvalConfig e;
    e.n_test = as_int(require_field(ej, "n_test", "eval"), "eval.n_test");
    if (e.n_test < 1) fail("eval.n_test", "must be >= 1");
    e.seed = as_seed(require_field(ej, "seed", "eval"), "eval.seed");
    eval = e;
  }
  if (mode == RunMode::Evaluate || mode == RunMode::Pareto) {
    if (!eval) fail("top level", "mode '" + mode_str + "' requires an 'eval' block");
  }

  // Pareto block.
  std::optional<ParetoConfig> pareto;
  if (root.contains("pareto")) {
    if (mode != RunMode::Pareto) fail("pareto", "only valid in pareto mode");
    const json& pj = root["pareto"];
    check_keys(pj, "pareto", {"disp_values", "diff_values"});
    ParetoConfig p;
    for (const char* key : {"disp_values", "diff_values"}) {
      const json& arr = require_field(pj, key, "pareto");
      if (!arr.is_array() || arr.empty()) fail(std::string("pareto.") + key, "expected a nonempty array");
      auto& dst = (std::string_view(key) == "disp_values") ? p.disp_values : p.diff_values;
      for (const auto& v : arr) dst.push_back(as_number(v, std::string("pareto.") + key));
    }
    for (double d : p.disp_values) {
      if (!(d > 0.0)) fail("pareto.disp_values", "Disp values must be positive");
    }
    for (double d : p.diff_values) {
      if (!(d >= 0.0)) fail("pareto.diff_values", "Diff values must be nonnegative");
    }
    pareto = std::move(p);
  } else if (mode == RunMode::Pareto) {
    fail("top level", "missing required key 'pareto'");
  }

  // Control source.
  std::optional<std::string> control_csv;
  if (root.contains("control_csv")) {
    if (mode != RunMode::Evaluate && mode != RunMode::BlochExport) {
      fail("control_csv", "only valid in evaluate and bloch-export modes");
    }
    control_csv = as_string(root["control_csv"], "control_csv");
  } else if (mode == RunMode::Evaluate || mode == RunMode::BlochExport) {
    fail("top level", "mode '" + mode_str + "' requires 'control_csv'");
  }

  // Output block.
  OutputConfig output;
  if (root.contains("output")) {
    const json& oj = root["output"];
    check_keys(oj, "output", {"directory", "bloch"});
    if (oj.contains("directory")) output.directory = as_string(oj["directory"], "output.directory");
    if (oj.contains("bloch")) output.bloch = as_bool(oj["bloch"], "output.bloch");
  }
  if (output.bloch && dim != 2) fail("output.bloch", "Bloch export needs a two-level system");

  return ExperimentConfig{mode,
                          std::move(model),
                          *grid,
                          std::move(initial),
                          std::move(classes),
                          midpoint_truncation,
                          std::move(learn),
                          eval,
                          std::move(pareto),
                          std::move(control_csv),
                          std::move(output)};
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(root);
}

}  // namespace qec
