#pragma once

#include <string>
#include <vector>

#include "histories/linalg.hpp"

namespace histories {

/// A constant Hamiltonian acting for `duration` (hbar = 1).
struct HamiltonianSegment {
  ComplexMatrix hamiltonian;
  double duration = 0.0;
};

/// Unitary evolution operator U(t_end, t_start).
struct Propagator {
  ComplexMatrix matrix;
  double t_start = 0.0;
  double t_end = 0.0;

  Propagator inverse() const { return {matrix.adjoint(), t_end, t_start}; }
};

/// Eigendecomposition of a Hermitian H, kept so that exp(-i H dt) can be
/// formed for many dt without re-diagonalising.
class HermitianExponential {
 public:
  HermitianExponential() = default;
  explicit HermitianExponential(const ComplexMatrix& h) {
    require_hermitian(h, "Hamiltonian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (h + h.adjoint()));
    if (solver.info() != Eigen::Success)
      throw NumericalError("Hermitian eigensolver did not converge");
    values_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
    zero_ = max_norm(h) == 0.0;
  }

  Eigen::Index dimension() const { return vectors_.rows(); }

  /// exp(-i H dt) = sum_k e^{-i lambda_k dt} |v_k><v_k|
  ComplexMatrix evolve(double dt) const {
    const Eigen::Index n = vectors_.rows();
    if (dt == 0.0 || zero_) return ComplexMatrix::Identity(n, n);
    Eigen::VectorXcd phases(n);
    for (Eigen::Index k = 0; k < n; ++k) phases(k) = std::exp(complex(0.0, -values_(k) * dt));
    return vectors_ * phases.asDiagonal() * vectors_.adjoint();
  }

 private:
  RealVector values_;
  ComplexMatrix vectors_;
  bool zero_ = true;
};

/// Time-ordered product of segment exponentials; later segments act on the left.
inline Propagator propagator(const std::vector<HamiltonianSegment>& segments, double t_start = 0.0) {
  if (segments.empty()) throw PreconditionError("propagator needs at least one segment");
  const Eigen::Index n = segments.front().hamiltonian.rows();
  ComplexMatrix u = ComplexMatrix::Identity(n, n);
  double t = t_start;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    if (s.hamiltonian.rows() != n)
      throw DimensionError("segment " + std::to_string(k) + " has dimension " +
                           std::to_string(s.hamiltonian.rows()) + ", expected " + std::to_string(n));
    if (!(s.duration >= 0.0))
      throw PreconditionError("segment " + std::to_string(k) + " has negative duration");
    u = HermitianExponential(s.hamiltonian).evolve(s.duration) * u;
    t += s.duration;
  }
  return {u, t_start, t};
}

inline double unitarity_defect(const ComplexMatrix& u) {
  return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace histories
