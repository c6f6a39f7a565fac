#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qec/evaluation.hpp"

namespace qec {

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace io {

/// Shortest exact decimal form of a double (17 significant digits round-trip).
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

/// Control CSV: header t,u_1,...,u_M; one row per slice, time at the slice
/// left endpoint, full double precision.
inline void write_control_csv(const std::filesystem::path& path, const ControlStrategy& u,
                              const TimeGrid& grid) {
  require(u.slices() == grid.slices, "write_control_csv: control/grid slice mismatch");
  std::ofstream out = open_output(path);
  out << "t";
  for (int m = 1; m <= u.channels(); ++m) out << ",u_" << m;
  out << "\n";
  for (int q = 0; q < u.slices(); ++q) {
    out << format_double(grid.time_at(q));
    for (int m = 0; m < u.channels(); ++m) out << "," << format_double(u.values()(m, q));
    out << "\n";
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

struct ControlCsv {
  ControlStrategy control;
  std::vector<double> times;
};

/// Reads a control CSV back; the value round trip is bitwise exact.
inline ControlCsv read_control_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty control CSV '" + path.string() + "'");
  int channels = -1;  // count u_ columns from the header
  {
    std::stringstream header(line);
    std::string field;
    int columns = 0;
    while (std::getline(header, field, ',')) ++columns;
    channels = columns - 1;
    if (channels < 1) throw IoError("control CSV '" + path.string() + "' has no control columns");
  }
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string field;
    std::vector<double> values;
    while (std::getline(row, field, ',')) {
      values.push_back(std::strtod(field.c_str(), nullptr));
    }
    if (static_cast<int>(values.size()) != channels + 1) {
      throw IoError("malformed row in control CSV '" + path.string() + "'");
    }
    times.push_back(values[0]);
    values.erase(values.begin());
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw IoError("control CSV '" + path.string() + "' has no data rows");
  RealMat u(channels, static_cast<int>(rows.size()));
  for (int q = 0; q < static_cast<int>(rows.size()); ++q) {
    for (int m = 0; m < channels; ++m) u(m, q) = rows[size_t(q)][size_t(m)];
  }
  return ControlCsv{ControlStrategy(std::move(u)), std::move(times)};
}

/// Objective history CSV: iter,J,J_<label>...
inline void write_history_csv(const std::filesystem::path& path, const LearnResult& result) {
  std::ofstream out = open_output(path);
  out << "iter,J";
  for (const auto& label : result.class_labels) out << ",J_" << label;
  out << "\n";
  for (std::size_t k = 0; k < result.objective_history.size(); ++k) {
    out << k << "," << format_double(result.objective_history[k]);
    for (const auto& series : result.per_class_history) {
      out << "," << format_double(series[k]);
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Bloch trajectory CSV: member,label,eps0,epsu,t,x,y,z.
inline void write_bloch_csv(const std::filesystem::path& path,
                            const std::vector<BlochTrajectory>& trajectories) {
  std::ofstream out = open_output(path);
  out << "member,label,eps0,epsu,t,x,y,z\n";
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& traj = trajectories[i];
    for (std::size_t q = 0; q < traj.points.size(); ++q) {
      out << i << "," << traj.member.label << "," << format_double(traj.member.eps0) << ","
          << format_double(traj.member.epsu) << "," << format_double(traj.times[q]) << ","
          << format_double(traj.points[q][0]) << "," << format_double(traj.points[q][1])
          << "," << format_double(traj.points[q][2]) << "\n";
    }
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Pareto sweep CSV: disp,diff,accuracy,converged,iterations,error.
inline void write_sweep_csv(const std::filesystem::path& path,
                            const std::vector<ParetoPoint>& points) {
  std::ofstream out = open_output(path);
  out << "disp,diff,accuracy,converged,iterations,error\n";
  for (const auto& p : points) {
    out << format_double(p.disp) << "," << format_double(p.diff) << ",";
    if (p.accuracy) out << format_double(*p.accuracy);
    out << "," << (p.converged ? 1 : 0) << "," << p.iterations << ",";
    std::string note = p.error;
    for (char& c : note) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << note << "\n";
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// 64-bit FNV-1a over a byte stream.
inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001B3ull;
  }
  return hash;
}

inline std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot hash '" + path.string() + "': not readable");
  std::uint64_t hash = 0xCBF29CE484222325ull;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const auto n = static_cast<std::size_t>(in.gcount());
    const auto* bytes = reinterpret_cast<const unsigned char*>(buf);
    for (std::size_t i = 0; i < n; ++i) {
      hash ^= bytes[i];
      hash *= 0x100000001B3ull;
    }
  }
  return hash;
}

inline std::string hash_hex(std::uint64_t hash) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace io
}  // namespace qec
