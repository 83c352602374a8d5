#pragma once

// Dense complex linear algebra shared by the whole engine. Storage is Eigen;
// this header adds the handful of quantum-specific helpers on top of it.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>

#include "histories/errors.hpp"

namespace histories {

using complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr std::size_t kDefaultDimensionCap = 4096;

/// Largest entry magnitude, the norm used for relative tolerances.
inline double max_norm(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double max_asymmetry(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return m.size() == 0 ? 0.0 : (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

/// Throws NotHermitianError unless `m` is square and equals its adjoint within `tol`.
inline void require_hermitian(const ComplexMatrix& m, const std::string& what,
                              double tol = kHermitianTol) {
  if (m.rows() != m.cols()) {
    throw DimensionError(what + " is not square (" + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ")");
  }
  if (!all_finite(m)) throw NumericalError(what + " has non-finite entries");
  const double asym = max_asymmetry(m);
  if (asym > tol) {
    throw NotHermitianError(what + " is not Hermitian: max |H - H^dagger| = " +
                                std::to_string(asym),
                            asym);
  }
}

/// Kronecker product; the first operand indexes the slower (major) axis.
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b,
                                    std::size_t dimension_cap = kDefaultDimensionCap) {
  const auto rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
  const auto cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
  if (rows > dimension_cap || cols > dimension_cap) {
    throw DimensionError("tensor product dimension " + std::to_string(std::max(rows, cols)) +
                         " exceeds cap " + std::to_string(dimension_cap));
  }
  ComplexMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline StateVector tensor_product(const StateVector& a, const StateVector& b,
                                  std::size_t dimension_cap = kDefaultDimensionCap) {
  const ComplexMatrix m = tensor_product(ComplexMatrix(a), ComplexMatrix(b), dimension_cap);
  return m.col(0);
}

/// Tr_E of an operator on S (x) E, with S the major factor.
inline ComplexMatrix partial_trace_second(const ComplexMatrix& m, Eigen::Index dim_s,
                                          Eigen::Index dim_e) {
  if (m.rows() != dim_s * dim_e || m.cols() != dim_s * dim_e)
    throw DimensionError("partial trace: operator size does not match dim_s * dim_e");
  ComplexMatrix out = ComplexMatrix::Zero(dim_s, dim_s);
  for (Eigen::Index i = 0; i < dim_s; ++i)
    for (Eigen::Index j = 0; j < dim_s; ++j)
      for (Eigen::Index k = 0; k < dim_e; ++k) out(i, j) += m(i * dim_e + k, j * dim_e + k);
  return out;
}

/// Tr_S of an operator on S (x) E.
inline ComplexMatrix partial_trace_first(const ComplexMatrix& m, Eigen::Index dim_s,
                                         Eigen::Index dim_e) {
  if (m.rows() != dim_s * dim_e || m.cols() != dim_s * dim_e)
    throw DimensionError("partial trace: operator size does not match dim_s * dim_e");
  ComplexMatrix out = ComplexMatrix::Zero(dim_e, dim_e);
  for (Eigen::Index k = 0; k < dim_e; ++k)
    for (Eigen::Index l = 0; l < dim_e; ++l)
      for (Eigen::Index i = 0; i < dim_s; ++i) out(k, l) += m(i * dim_e + k, i * dim_e + l);
  return out;
}

/// Multiplies `v` by the phase that makes its largest-magnitude component real
/// and positive. Components within a relative 1e-9 of the maximum count as
/// ties; the lowest index wins.
inline void fix_phase(StateVector& v) {
  if (v.size() == 0) return;
  const double vmax = v.cwiseAbs().maxCoeff();
  if (vmax == 0.0) return;
  Eigen::Index pivot = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= vmax * (1.0 - 1e-9)) {
      pivot = i;
      break;
    }
  }
  const complex phase = std::conj(v(pivot)) / std::abs(v(pivot));
  v *= phase;
  v(pivot) = complex(v(pivot).real(), 0.0);
}

/// Outer product |a><b|.
inline ComplexMatrix outer(const StateVector& a, const StateVector& b) {
  return a * b.adjoint();
}

}  // namespace histories
