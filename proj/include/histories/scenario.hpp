#pragma once

// Scenario data model and validation. A scenario is plain data: everything a
// document can express, not yet decomposed. compile() in compiled.hpp turns a
// validated scenario into the form the engine evaluates.

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "histories/errors.hpp"
#include "histories/linalg.hpp"
#include "histories/spectral.hpp"

namespace histories {

/// H(t) = hamiltonian for start <= t < next start; the last entry persists.
struct ScheduleEntry {
  double start = 0.0;
  ComplexMatrix hamiltonian;
};

struct MeasurementEvent {
  double time = 0.0;
  std::string label;
  ComplexMatrix matrix;
  /// Optional fixed eigenbasis (gauge) for path amplitudes.
  std::optional<std::vector<StateVector>> basis;
};

struct PurePreparation {
  StateVector vector;
};

/// Degenerate first outcome: a subspace basis with weights (empty = uniform 1/M).
struct SubspacePreparation {
  std::vector<StateVector> basis;
  std::vector<double> weights;
};

struct DensityPreparation {
  ComplexMatrix matrix;
};

using Preparation = std::variant<PurePreparation, SubspacePreparation, DensityPreparation>;

/// Post-selected final state, used by weak-value evaluation.
struct PostSelection {
  double time = 0.0;
  StateVector vector;
};

struct Scenario {
  std::size_t dimension = 0;
  std::vector<ScheduleEntry> hamiltonian;
  std::vector<MeasurementEvent> measurements;
  Preparation preparation;
  std::optional<PostSelection> postselection;

  /// The preparation happens at the start of the Hamiltonian schedule.
  double preparation_time() const { return hamiltonian.empty() ? 0.0 : hamiltonian.front().start; }
};

inline const char* preparation_kind(const Preparation& p) {
  switch (p.index()) {
    case 0: return "pure";
    case 1: return "subspace";
    default: return "density";
  }
}

namespace detail {

inline void check_square_matrix(const ComplexMatrix& m, std::size_t n, const std::string& field,
                                long index, const std::string& what,
                                std::vector<Diagnostic>& out) {
  if (static_cast<std::size_t>(m.rows()) != n || static_cast<std::size_t>(m.cols()) != n) {
    out.push_back({field, index,
                   what + " has shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                       ", expected " + std::to_string(n) + "x" + std::to_string(n)});
    return;
  }
  if (!all_finite(m)) {
    out.push_back({field, index, what + " has non-finite entries"});
    return;
  }
  const ComplexMatrix diff = m - m.adjoint();
  Eigen::Index r = 0, c = 0;
  const double asym = n == 0 ? 0.0 : diff.cwiseAbs().maxCoeff(&r, &c);
  if (asym > kHermitianTol) {
    out.push_back({field, index,
                   what + " is not Hermitian: max |H - H^dagger| = " + std::to_string(asym) +
                       " at entry (" + std::to_string(r) + "," + std::to_string(c) + ")"});
  }
}

inline bool check_vector(const StateVector& v, std::size_t n, const std::string& field, long index,
                         const std::string& what, std::vector<Diagnostic>& out) {
  if (static_cast<std::size_t>(v.size()) != n) {
    out.push_back({field, index,
                   what + " has dimension " + std::to_string(v.size()) + ", expected " +
                       std::to_string(n)});
    return false;
  }
  if (!all_finite(v)) {
    out.push_back({field, index, what + " has non-finite entries"});
    return false;
  }
  return true;
}

inline void check_orthonormal(const std::vector<StateVector>& basis, const std::string& field,
                              std::vector<Diagnostic>& out) {
  for (std::size_t a = 0; a < basis.size(); ++a)
    for (std::size_t b = a; b < basis.size(); ++b) {
      const complex ip = basis[a].dot(basis[b]);
      const double expected = a == b ? 1.0 : 0.0;
      if (std::abs(ip - expected) > 1e-10) {
        out.push_back({field, static_cast<long>(b),
                       "basis not orthonormal: <" + std::to_string(a) + "|" + std::to_string(b) +
                           "> deviates by " + std::to_string(std::abs(ip - expected))});
        return;
      }
    }
}

}  // namespace detail

/// Structural and numerical checks. An empty result means the scenario is valid.
inline std::vector<Diagnostic> validate(const Scenario& s,
                                        std::size_t dimension_cap = kDefaultDimensionCap) {
  std::vector<Diagnostic> out;
  const std::size_t n = s.dimension;
  if (n == 0) {
    out.push_back({"dimension", -1, "must be a positive integer"});
    return out;
  }
  if (n > dimension_cap) {
    out.push_back({"dimension", -1,
                   std::to_string(n) + " exceeds dimension cap " + std::to_string(dimension_cap)});
    return out;
  }

  for (std::size_t k = 0; k < s.hamiltonian.size(); ++k) {
    const auto& e = s.hamiltonian[k];
    const long idx = static_cast<long>(k);
    if (!std::isfinite(e.start)) out.push_back({"hamiltonian", idx, "start time is not finite"});
    if (k > 0 && !(e.start > s.hamiltonian[k - 1].start))
      out.push_back({"hamiltonian", idx,
                     "non-increasing start time at segment " + std::to_string(k + 1)});
    detail::check_square_matrix(e.hamiltonian, n, "hamiltonian", idx, "Hamiltonian", out);
  }

  if (s.measurements.empty()) out.push_back({"measurements", -1, "at least one event is required"});
  const double t0 = s.preparation_time();
  for (std::size_t k = 0; k < s.measurements.size(); ++k) {
    const auto& m = s.measurements[k];
    const long idx = static_cast<long>(k);
    if (!std::isfinite(m.time)) {
      out.push_back({"measurements", idx, "time is not finite"});
    } else if (k == 0 && m.time < t0) {
      out.push_back({"measurements", idx,
                     "event 1 at time " + std::to_string(m.time) +
                         " precedes the preparation at " + std::to_string(t0)});
    } else if (k > 0 && !(m.time > s.measurements[k - 1].time)) {
      out.push_back({"measurements", idx, "non-increasing time at event " + std::to_string(k + 1)});
    }
    const std::size_t before = out.size();
    detail::check_square_matrix(m.matrix, n, "measurements", idx, "observable", out);
    if (m.basis && out.size() == before) {
      bool ok = m.basis->size() == n;
      if (!ok)
        out.push_back({"measurements", idx,
                       "basis has " + std::to_string(m.basis->size()) + " vectors, expected " +
                           std::to_string(n)});
      for (const auto& v : *m.basis)
        ok = detail::check_vector(v, n, "measurements", idx, "basis vector", out) && ok;
      if (ok) {
        try {
          (void)spectral_decompose_with_basis(m.matrix, *m.basis);
        } catch (const Error& e) {
          out.push_back({"measurements", idx, e.what()});
        }
      }
    }
  }

  if (const auto* p = std::get_if<PurePreparation>(&s.preparation)) {
    if (detail::check_vector(p->vector, n, "preparation", -1, "vector", out) &&
        std::abs(p->vector.norm() - 1.0) > 1e-10)
      out.push_back({"preparation", -1,
                     "vector norm " + std::to_string(p->vector.norm()) + " is not 1"});
  } else if (const auto* sp = std::get_if<SubspacePreparation>(&s.preparation)) {
    if (sp->basis.empty()) out.push_back({"preparation.basis", -1, "subspace basis is empty"});
    bool ok = true;
    for (std::size_t k = 0; k < sp->basis.size(); ++k)
      ok = detail::check_vector(sp->basis[k], n, "preparation.basis", static_cast<long>(k),
                                "basis vector", out) &&
           ok;
    if (ok) detail::check_orthonormal(sp->basis, "preparation.basis", out);
    if (!sp->weights.empty()) {
      if (sp->weights.size() != sp->basis.size()) {
        out.push_back({"preparation.weights", -1,
                       "has " + std::to_string(sp->weights.size()) + " entries for " +
                           std::to_string(sp->basis.size()) + " basis vectors"});
      } else {
        double sum = 0.0;
        for (std::size_t k = 0; k < sp->weights.size(); ++k) {
          if (!(sp->weights[k] >= 0.0))
            out.push_back({"preparation.weights", static_cast<long>(k), "weight is negative"});
          sum += sp->weights[k];
        }
        if (std::abs(sum - 1.0) > 1e-10)
          out.push_back({"preparation.weights", -1, "weights sum to " + std::to_string(sum) + ", not 1"});
      }
    }
  } else if (const auto* d = std::get_if<DensityPreparation>(&s.preparation)) {
    const std::size_t before = out.size();
    detail::check_square_matrix(d->matrix, n, "preparation", -1, "density matrix", out);
    if (out.size() == before) {
      const complex tr = d->matrix.trace();
      if (std::abs(tr - 1.0) > 1e-10)
        out.push_back({"preparation", -1, "density matrix trace " + std::to_string(tr.real()) + " is not 1"});
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (d->matrix + d->matrix.adjoint()),
                                                      Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-10)
        out.push_back({"preparation", -1,
                       "density matrix has negative eigenvalue " +
                           std::to_string(es.eigenvalues().minCoeff())});
    }
  }

  if (s.postselection) {
    const auto& ps = *s.postselection;
    if (detail::check_vector(ps.vector, n, "postselection", -1, "vector", out) &&
        std::abs(ps.vector.norm() - 1.0) > 1e-10)
      out.push_back({"postselection", -1, "vector norm is not 1"});
    if (!s.measurements.empty() && !(ps.time >= s.measurements.back().time))
      out.push_back({"postselection", -1, "time precedes the last measurement"});
  }
  return out;
}

inline void require_valid(const Scenario& s, std::size_t dimension_cap = kDefaultDimensionCap) {
  auto d = validate(s, dimension_cap);
  if (!d.empty()) throw ValidationError(std::move(d));
}

}  // namespace histories
