#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "histories/propagator.hpp"
#include "histories/scenario.hpp"
#include "histories/spectral.hpp"

namespace histories {

struct EngineOptions {
  double cluster_tol = kDefaultClusterTol;
  /// Maximum number of virtual paths a brute-force evaluation may visit.
  std::uint64_t path_budget = 10'000'000;
  /// Maximum number of outcome strings in a full distribution.
  std::uint64_t string_budget = 1'000'000;
  double postselection_tol = 1e-12;
  std::size_t dimension_cap = kDefaultDimensionCap;
};

/// One pure component of the preparation ensemble.
struct WeightedState {
  double weight = 1.0;
  StateVector state;
};

/// A validated scenario with every observable decomposed and every
/// inter-measurement propagator formed. Immutable; safe to share.
class CompiledScenario {
 public:
  explicit CompiledScenario(Scenario scenario, EngineOptions options = {})
      : scenario_(std::move(scenario)), options_(options) {
    require_valid(scenario_, options_.dimension_cap);
    for (const auto& e : scenario_.hamiltonian) exponentials_.emplace_back(e.hamiltonian);
    for (const auto& m : scenario_.measurements) {
      if (m.basis)
        observables_.emplace_back(m.matrix, *m.basis, m.label, options_.cluster_tol);
      else
        observables_.emplace_back(m.matrix, m.label, options_.cluster_tol);
    }
    double t = scenario_.preparation_time();
    for (const auto& m : scenario_.measurements) {
      steps_.push_back({evolution(t, m.time), t, m.time});
      t = m.time;
    }
    build_preparation();
  }

  const Scenario& scenario() const { return scenario_; }
  const EngineOptions& options() const { return options_; }
  std::size_t dimension() const { return scenario_.dimension; }
  std::size_t length() const { return observables_.size(); }

  const HermitianObservable& observable(std::size_t l) const { return observables_.at(l); }
  const std::vector<HermitianObservable>& observables() const { return observables_; }

  /// U(t_l, t_{l-1}); step 0 starts at the preparation time.
  const Propagator& step(std::size_t l) const { return steps_.at(l); }

  const std::vector<WeightedState>& ensemble() const { return ensemble_; }
  const ComplexMatrix& density() const { return density_; }
  bool pure() const { return ensemble_.size() == 1; }

  std::vector<std::size_t> cluster_counts() const {
    std::vector<std::size_t> out;
    for (const auto& o : observables_) out.push_back(o.cluster_count());
    return out;
  }

  /// Number of outcome strings, saturating at UINT64_MAX.
  std::uint64_t string_count() const { return saturating_product(cluster_counts()); }

  /// N^L, saturating.
  std::uint64_t path_count() const {
    return saturating_product(std::vector<std::size_t>(length(), dimension()));
  }

  /// Evolution operator between two times under the piecewise-constant schedule.
  ComplexMatrix evolution(double t_from, double t_to) const {
    const auto n = static_cast<Eigen::Index>(scenario_.dimension);
    if (t_to < t_from) throw PreconditionError("evolution backwards in time requested");
    ComplexMatrix u = ComplexMatrix::Identity(n, n);
    const auto& sched = scenario_.hamiltonian;
    for (std::size_t k = 0; k < sched.size(); ++k) {
      const double lo = std::max(t_from, sched[k].start);
      const double hi = k + 1 < sched.size() ? std::min(t_to, sched[k + 1].start) : t_to;
      if (hi > lo) u = exponentials_[k].evolve(hi - lo) * u;
    }
    return u;
  }

  static std::uint64_t saturating_product(const std::vector<std::size_t>& factors) {
    std::uint64_t p = 1;
    for (auto f : factors) {
      if (f != 0 && p > UINT64_MAX / f) return UINT64_MAX;
      p *= f;
    }
    return p;
  }

 private:
  void build_preparation() {
    const auto n = static_cast<Eigen::Index>(scenario_.dimension);
    if (const auto* p = std::get_if<PurePreparation>(&scenario_.preparation)) {
      ensemble_.push_back({1.0, p->vector});
      density_ = outer(p->vector, p->vector);
    } else if (const auto* s = std::get_if<SubspacePreparation>(&scenario_.preparation)) {
      const double m = static_cast<double>(s->basis.size());
      density_ = ComplexMatrix::Zero(n, n);
      for (std::size_t k = 0; k < s->basis.size(); ++k) {
        const double w = s->weights.empty() ? 1.0 / m : s->weights[k];
        ensemble_.push_back({w, s->basis[k]});
        density_ += w * outer(s->basis[k], s->basis[k]);
      }
    } else {
      const auto& rho = std::get<DensityPreparation>(scenario_.preparation).matrix;
      density_ = 0.5 * (rho + rho.adjoint());
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(density_);
      if (es.info() != Eigen::Success) throw NumericalError("density eigensolver did not converge");
      for (Eigen::Index k = n - 1; k >= 0; --k) {
        const double w = es.eigenvalues()(k);
        if (w > 1e-14) ensemble_.push_back({w, es.eigenvectors().col(k)});
      }
    }
  }

  Scenario scenario_;
  EngineOptions options_;
  std::vector<HermitianExponential> exponentials_;
  std::vector<HermitianObservable> observables_;
  std::vector<Propagator> steps_;
  std::vector<WeightedState> ensemble_;
  ComplexMatrix density_;
};

inline CompiledScenario compile(Scenario s, EngineOptions options = {}) {
  return CompiledScenario(std::move(s), options);
}

}  // namespace histories
