#pragma once

#include <random>

#include "qec/dynamics.hpp"

namespace test_helpers {

using qec::cxd;
using qec::Mat;
using qec::RealMat;
using qec::Vec;

inline double max_abs_diff(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const RealMat& a, const RealMat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline Mat random_hermitian(std::mt19937_64& rng, Eigen::Index d, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Mat m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = cxd(normal(rng), normal(rng));
  }
  return Mat(0.5 * (m + m.adjoint()));
}

inline qec::QuantumState random_state(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = cxd(normal(rng), normal(rng));
  v /= v.norm();
  return qec::QuantumState(std::move(v));
}

inline qec::ControlStrategy random_control(std::mt19937_64& rng, int channels, int slices,
                                           double amplitude = 1.0) {
  std::uniform_real_distribution<double> unif(-amplitude, amplitude);
  RealMat u(channels, slices);
  for (int m = 0; m < channels; ++m) {
    for (int q = 0; q < slices; ++q) u(m, q) = unif(rng);
  }
  return qec::ControlStrategy(std::move(u));
}

}  // namespace test_helpers
