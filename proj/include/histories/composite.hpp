#pragma once

// System + environment composites. When nothing couples the two factors, the
// environment can be dropped and the system evaluated on its own.

#include <string>

#include "histories/scenario.hpp"

namespace histories {

/// Dimensions of a bipartite space S (x) E; S is the major factor.
struct Bipartition {
  std::size_t system = 0;
  std::size_t environment = 0;
};

namespace detail {

inline double product_residual(const ComplexMatrix& m, const ComplexMatrix& a, const ComplexMatrix& b) {
  return (m - tensor_product(a, b)).cwiseAbs().maxCoeff();
}

/// Schmidt coefficients and vectors of a pure state on S (x) E.
inline Eigen::JacobiSVD<ComplexMatrix> schmidt(const StateVector& psi, Bipartition parts) {
  const auto ds = static_cast<Eigen::Index>(parts.system);
  const auto de = static_cast<Eigen::Index>(parts.environment);
  ComplexMatrix c(ds, de);
  for (Eigen::Index i = 0; i < ds; ++i)
    for (Eigen::Index k = 0; k < de; ++k) c(i, k) = psi(i * de + k);
  return Eigen::JacobiSVD<ComplexMatrix>(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

}  // namespace detail

/// Checks that the composite scenario has no S-E interaction, a product
/// preparation, and only system observables (Q(S) (x) I_E), and returns the
/// equivalent system-only scenario. Throws PreconditionError naming the
/// violated condition otherwise.
inline Scenario reduce_product_environment(const Scenario& composite, Bipartition parts,
                                           double tol = 1e-9) {
  require_valid(composite);
  if (parts.system * parts.environment != composite.dimension)
    throw DimensionError("bipartition " + std::to_string(parts.system) + " x " +
                         std::to_string(parts.environment) + " does not match dimension " +
                         std::to_string(composite.dimension));
  const auto ds = static_cast<Eigen::Index>(parts.system);
  const auto de = static_cast<Eigen::Index>(parts.environment);
  const ComplexMatrix is = ComplexMatrix::Identity(ds, ds);
  const ComplexMatrix ie = ComplexMatrix::Identity(de, de);

  Scenario out;
  out.dimension = parts.system;

  for (std::size_t k = 0; k < composite.hamiltonian.size(); ++k) {
    const ComplexMatrix& h = composite.hamiltonian[k].hamiltonian;
    // H = H_S (x) I + I (x) H_E is recovered from its partial traces
    const ComplexMatrix hs = partial_trace_second(h, ds, de) / static_cast<double>(de);
    const ComplexMatrix he = partial_trace_first(h, ds, de) / static_cast<double>(ds);
    const complex shift = h.trace() / static_cast<double>(ds * de);
    const ComplexMatrix separable =
        tensor_product(hs, ie) + tensor_product(is, he) - shift * ComplexMatrix::Identity(ds * de, ds * de);
    const double resid = (h - separable).cwiseAbs().maxCoeff();
    if (resid > tol * std::max(1.0, max_norm(h)))
      throw PreconditionError("interaction Hamiltonian is nonzero in segment " +
                              std::to_string(k + 1) + " (residual " + std::to_string(resid) + ")");
    out.hamiltonian.push_back({composite.hamiltonian[k].start, 0.5 * (hs + hs.adjoint())});
  }

  for (std::size_t k = 0; k < composite.measurements.size(); ++k) {
    const auto& m = composite.measurements[k];
    const ComplexMatrix qs = partial_trace_second(m.matrix, ds, de) / static_cast<double>(de);
    const double resid = detail::product_residual(m.matrix, qs, ie);
    if (resid > tol * std::max(1.0, max_norm(m.matrix)))
      throw PreconditionError("measurement " + std::to_string(k + 1) + " (" + m.label +
                              ") acts on the environment");
    out.measurements.push_back({m.time, m.label, 0.5 * (qs + qs.adjoint()), std::nullopt});
  }

  ComplexMatrix rho;
  if (const auto* p = std::get_if<PurePreparation>(&composite.preparation)) {
    const auto svd = detail::schmidt(p->vector, parts);
    const auto& sv = svd.singularValues();
    if (sv.size() > 1 && sv(1) > std::sqrt(tol))
      throw PreconditionError("preparation is entangled (second Schmidt coefficient " +
                              std::to_string(sv(1)) + ")");
    // psi = sigma_0 u_0 (x) conj(v_0); the global phase is irrelevant
    StateVector sys = svd.matrixU().col(0);
    fix_phase(sys);
    out.preparation = PurePreparation{sys};
  } else {
    if (const auto* s = std::get_if<SubspacePreparation>(&composite.preparation)) {
      const auto n = static_cast<Eigen::Index>(composite.dimension);
      rho = ComplexMatrix::Zero(n, n);
      const double m = static_cast<double>(s->basis.size());
      for (std::size_t k = 0; k < s->basis.size(); ++k)
        rho += (s->weights.empty() ? 1.0 / m : s->weights[k]) * outer(s->basis[k], s->basis[k]);
    } else {
      rho = std::get<DensityPreparation>(composite.preparation).matrix;
    }
    const ComplexMatrix rs = partial_trace_second(rho, ds, de);
    const ComplexMatrix re = partial_trace_first(rho, ds, de);
    const double resid = detail::product_residual(rho, rs, re);
    if (resid > tol)
      throw PreconditionError("preparation is not a product state (residual " + std::to_string(resid) + ")");
    out.preparation = DensityPreparation{0.5 * (rs + rs.adjoint())};
  }

  if (composite.postselection) out.postselection.reset();
  require_valid(out);
  return out;
}

/// Entangled preparation sum_j beta_j |q_j(S)> (x) |phi_j(E)>.
inline StateVector entangled_preparation(const std::vector<complex>& beta,
                                         const std::vector<StateVector>& system_states,
                                         const std::vector<StateVector>& environment_states) {
  if (beta.size() != system_states.size() || beta.size() != environment_states.size() || beta.empty())
    throw DimensionError("entangled preparation needs matching coefficient and state lists");
  StateVector psi = beta[0] * tensor_product(system_states[0], environment_states[0]);
  for (std::size_t j = 1; j < beta.size(); ++j)
    psi += beta[j] * tensor_product(system_states[j], environment_states[j]);
  return psi;
}

}  // namespace histories
