#pragma once

// Weak values of pre- and post-selected systems, and a finite von Neumann
// pointer whose mean shift approaches the weak value as the coupling vanishes.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "histories/compiled.hpp"
#include "histories/propagator.hpp"
#include "histories/spectral.hpp"

namespace histories {

struct WeakValueResult {
  complex value;              // numerator / denominator
  complex numerator;          // <q3(t2)| Q |q1(t2)>
  complex denominator;        // <q3(t2)| q1(t2)>
  complex amplitude_ratio;    // sum_n lambda_n A(q3 <- q2_n <- q1) / sum_n A(q3 <- q2_n <- q1)

  /// Leading-order mean pointer shift.
  double real() const { return value.real(); }
};

/// Weak value of `q2` at t2 for a system prepared in `pre` at t1 and found in
/// `post` at t3. `to_mid` is U(t2, t1), `from_mid` is U(t3, t2).
///
/// Evaluated both as a matrix element ratio and as a ratio of path amplitudes
/// through the eigenbasis of `q2`; the two must agree.
inline WeakValueResult weak_value(const StateVector& pre, const StateVector& post,
                                  const HermitianObservable& q2, const ComplexMatrix& to_mid,
                                  const ComplexMatrix& from_mid, double postselection_tol = 1e-12) {
  const auto n = static_cast<Eigen::Index>(q2.dimension());
  if (pre.size() != n || post.size() != n || to_mid.rows() != n || from_mid.rows() != n)
    throw DimensionError("weak value: operand dimensions disagree");
  const StateVector forward = to_mid * pre;             // |q1(t2)>
  const StateVector backward = from_mid.adjoint() * post;  // |q3(t2)>

  WeakValueResult r;
  r.denominator = backward.dot(forward);
  if (std::abs(r.denominator) <= postselection_tol)
    throw PostSelectionError("pre- and post-selected states are orthogonal (|<q3|q1>| = " +
                                 std::to_string(std::abs(r.denominator)) + "); weak value undefined",
                             std::abs(r.denominator));
  r.numerator = backward.dot(q2.matrix() * forward);
  r.value = r.numerator / r.denominator;

  complex weighted(0.0, 0.0), plain(0.0, 0.0);
  const auto& basis = q2.basis();
  for (Eigen::Index k = 0; k < n; ++k) {
    // A(q3 <- q2_k <- q1) = <q3|U32|q2_k><q2_k|U21|q1>
    const complex a = backward.dot(basis.col(k)) * basis.col(k).dot(forward);
    weighted += q2.eigenvalue(q2.cluster_of(static_cast<std::size_t>(k))) * a;
    plain += a;
  }
  r.amplitude_ratio = weighted / plain;

  const double slack = 1e-10 * std::max(1.0, std::abs(r.value)) +
                       64.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, max_norm(q2.matrix())) * static_cast<double>(n) /
                           std::abs(r.denominator);
  if (std::abs(r.amplitude_ratio - r.value) > slack)
    throw NumericalError("weak value: amplitude-ratio and matrix-element forms disagree by " +
                         std::to_string(std::abs(r.amplitude_ratio - r.value)));
  return r;
}

/// Weak value of the measurement labelled `label`, with the scenario's pure
/// preparation as pre-selection and its post-selection entry as post.
inline WeakValueResult weak_value(const CompiledScenario& cs, const std::string& label) {
  const Scenario& s = cs.scenario();
  if (!s.postselection) throw PreconditionError("scenario has no postselection entry");
  const auto* pre = std::get_if<PurePreparation>(&s.preparation);
  if (!pre) throw PreconditionError("weak value needs a pure preparation");
  for (std::size_t l = 0; l < cs.length(); ++l) {
    if (s.measurements[l].label != label) continue;
    const double t2 = s.measurements[l].time;
    return weak_value(pre->vector, s.postselection->vector, cs.observable(l),
                      cs.evolution(s.preparation_time(), t2),
                      cs.evolution(t2, s.postselection->time), cs.options().postselection_tol);
  }
  throw PreconditionError("no measurement labelled '" + label + "'");
}

struct PointerOptions {
  /// Standard deviation of the pointer's initial position distribution, as a
  /// fraction of the half-width J.
  double width_fraction = 1.0 / 8.0;
  double postselection_tol = 1e-12;
};

/// Hermitian generator p of cyclic shifts on {-J..J}: exp(-i s p) moves a
/// wavefunction by s sites (fractional s interpolates in Fourier space).
inline ComplexMatrix cyclic_shift_generator(std::size_t pointer_dim) {
  const auto d = static_cast<Eigen::Index>(pointer_dim);
  const Eigen::Index half = (d - 1) / 2;
  ComplexMatrix p = ComplexMatrix::Zero(d, d);
  for (Eigen::Index m = -half; m <= half; ++m) {
    const double k = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(d);
    for (Eigen::Index x = 0; x < d; ++x)
      for (Eigen::Index y = 0; y < d; ++y)
        p(x, y) += k * std::exp(complex(0.0, k * static_cast<double>(x - y))) / static_cast<double>(d);
  }
  return 0.5 * (p + p.adjoint());
}

/// Centered discrete Gaussian on {-J..J} with position spread `sigma`.
inline StateVector gaussian_pointer(std::size_t pointer_dim, double sigma) {
  const auto d = static_cast<Eigen::Index>(pointer_dim);
  const Eigen::Index half = (d - 1) / 2;
  StateVector phi(d);
  for (Eigen::Index x = 0; x < d; ++x) {
    const double pos = static_cast<double>(x - half);
    phi(x) = std::exp(-pos * pos / (4.0 * sigma * sigma));
  }
  return phi / phi.norm();
}

/// Mean pointer position after post-selection, divided by the coupling g.
///
/// The system (prepared in `pre`) is coupled at t2 to a pointer register of
/// odd dimension 2J+1 by exp(-i g Q (x) p), evolves to t3, and is post-selected
/// in `post`. Returns 0 for g = 0.
inline double pointer_shift(const StateVector& pre, const StateVector& post,
                            const HermitianObservable& q2, const ComplexMatrix& to_mid,
                            const ComplexMatrix& from_mid, double g, std::size_t pointer_dim,
                            const PointerOptions& opt = {}) {
  if (!(g >= 0.0)) throw PreconditionError("coupling g must be non-negative");
  if (pointer_dim < 3 || pointer_dim % 2 == 0)
    throw PreconditionError("pointer dimension must be an odd integer >= 3");
  if (g == 0.0) return 0.0;
  const auto n = static_cast<Eigen::Index>(q2.dimension());
  const auto d = static_cast<Eigen::Index>(pointer_dim);
  const double half = static_cast<double>((pointer_dim - 1) / 2);

  const StateVector phi = gaussian_pointer(pointer_dim, opt.width_fraction * half);
  const ComplexMatrix coupling = tensor_product(q2.matrix(), cyclic_shift_generator(pointer_dim));
  StateVector psi = tensor_product(StateVector(to_mid * pre), phi);
  psi = HermitianExponential(coupling).evolve(g) * psi;
  psi = tensor_product(from_mid, ComplexMatrix::Identity(d, d)) * psi;

  // (<post| (x) I) psi
  StateVector chi = StateVector::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) chi += std::conj(post(i)) * psi.segment(i * d, d);
  const double norm2 = chi.squaredNorm();
  if (norm2 <= opt.postselection_tol)
    throw PostSelectionError("post-selection probability " + std::to_string(norm2) +
                                 " below tolerance at g = " + std::to_string(g),
                             norm2);
  double mean = 0.0;
  for (Eigen::Index x = 0; x < d; ++x) mean += (static_cast<double>(x) - half) * std::norm(chi(x));
  return mean / norm2 / g;
}

inline double pointer_shift(const CompiledScenario& cs, const std::string& label, double g,
                            std::size_t pointer_dim, const PointerOptions& opt = {}) {
  const Scenario& s = cs.scenario();
  if (!s.postselection) throw PreconditionError("scenario has no postselection entry");
  const auto* pre = std::get_if<PurePreparation>(&s.preparation);
  if (!pre) throw PreconditionError("pointer simulation needs a pure preparation");
  for (std::size_t l = 0; l < cs.length(); ++l) {
    if (s.measurements[l].label != label) continue;
    const double t2 = s.measurements[l].time;
    return pointer_shift(pre->vector, s.postselection->vector, cs.observable(l),
                         cs.evolution(s.preparation_time(), t2),
                         cs.evolution(t2, s.postselection->time), g, pointer_dim, opt);
  }
  throw PreconditionError("no measurement labelled '" + label + "'");
}

}  // namespace histories
