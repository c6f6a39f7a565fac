#pragma once

#include "qec/dynamics.hpp"

namespace qec {

inline Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Mat pauli_y() {
  Mat m(2, 2);
  m << 0, -imag_unit, imag_unit, 0;
  return m;
}

inline Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

/// Spin-1/2 model: drift sigma_z/2, control channels sigma_x/2 and sigma_y/2.
inline HamiltonianModel spin_half_model() {
  return HamiltonianModel(HermitianOperator(0.5 * pauli_z()),
                          {HermitianOperator(0.5 * pauli_x()),
                           HermitianOperator(0.5 * pauli_y())});
}

/// Three-level Lambda-type system: diagonal drift diag(1.5, 1, 0) with the
/// middle-upper and lower-upper coupling channels.
inline HamiltonianModel lambda_system_model() {
  Mat h0 = Mat::Zero(3, 3);
  h0(0, 0) = 1.5;
  h0(1, 1) = 1.0;
  h0(2, 2) = 0.0;
  Mat h1 = Mat::Zero(3, 3);
  h1(1, 2) = 1.0;
  h1(2, 1) = 1.0;
  Mat h2 = Mat::Zero(3, 3);
  h2(0, 2) = 1.0;
  h2(2, 0) = 1.0;
  return HamiltonianModel(HermitianOperator(std::move(h0)),
                          {HermitianOperator(std::move(h1)),
                           HermitianOperator(std::move(h2))});
}

}  // namespace qec
