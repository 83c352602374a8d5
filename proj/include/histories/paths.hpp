#pragma once

// Virtual (Feynman) paths: one measurement-basis state per measurement time,
// each path carrying the product of its transition amplitudes.

#include <functional>
#include <memory>
#include <vector>

#include "histories/compiled.hpp"
#include "histories/distribution.hpp"

namespace histories {

/// Zero-filled distribution shaped after the scenario's measurements.
inline HistoryDistribution empty_distribution(const CompiledScenario& cs, Strategy strategy) {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> eig;
  for (const auto& o : cs.observables()) {
    labels.push_back(o.label());
    std::vector<double> values;
    for (const auto& c : o.spectrum().clusters) values.push_back(c.eigenvalue);
    eig.push_back(std::move(values));
  }
  return HistoryDistribution(cs.cluster_counts(), std::move(labels), std::move(eig), strategy);
}

struct VirtualPath {
  std::vector<std::size_t> indices;  // basis index n_l per measurement
  complex amplitude;
};

namespace detail {

inline void check_initial(const CompiledScenario& cs, const StateVector& initial) {
  if (static_cast<std::size_t>(initial.size()) != cs.dimension())
    throw DimensionError("initial state has dimension " + std::to_string(initial.size()) +
                         ", scenario has " + std::to_string(cs.dimension()));
}

inline void check_path_budget(const CompiledScenario& cs) {
  const std::uint64_t count = cs.path_count();
  if (count > cs.options().path_budget)
    throw BudgetExceededError(
        "enumerating " + std::to_string(cs.dimension()) + "^" + std::to_string(cs.length()) +
            " virtual paths exceeds the path budget of " +
            std::to_string(cs.options().path_budget) + "; use the projected-propagator strategy",
        static_cast<double>(count), static_cast<double>(cs.options().path_budget));
}

/// <q^1_n| U_1 |initial> for every n.
inline StateVector first_layer(const CompiledScenario& cs, const StateVector& initial) {
  return cs.observable(0).basis().adjoint() * (cs.step(0).matrix * initial);
}

/// T_l(m, n) = <q^l_m| U_l |q^{l-1}_n>, l >= 1.
inline ComplexMatrix transfer(const CompiledScenario& cs, std::size_t l) {
  return cs.observable(l).basis().adjoint() * cs.step(l).matrix * cs.observable(l - 1).basis();
}

}  // namespace detail

/// Amplitude of one virtual path started from `initial` at the preparation time.
inline complex path_amplitude(const CompiledScenario& cs, const std::vector<std::size_t>& path,
                              const StateVector& initial) {
  detail::check_initial(cs, initial);
  if (path.size() != cs.length())
    throw DimensionError("path has " + std::to_string(path.size()) + " indices, scenario has " +
                         std::to_string(cs.length()) + " measurements");
  for (std::size_t l = 0; l < path.size(); ++l)
    if (path[l] >= cs.dimension())
      throw IndexError("path index " + std::to_string(path[l]) + " at position " +
                       std::to_string(l + 1) + " out of range");
  StateVector prev = initial;
  complex amp(1.0, 0.0);
  for (std::size_t l = 0; l < path.size(); ++l) {
    const auto q = cs.observable(l).basis().col(static_cast<Eigen::Index>(path[l]));
    amp *= q.dot(cs.step(l).matrix * prev);
    prev = q;
  }
  return amp;
}

/// Visits all N^L paths in lexicographic index order.
inline void for_each_path(const CompiledScenario& cs, const StateVector& initial,
                          const std::function<void(const std::vector<std::size_t>&, complex)>& visit) {
  detail::check_initial(cs, initial);
  detail::check_path_budget(cs);
  const std::size_t n = cs.dimension();
  const std::size_t len = cs.length();
  const StateVector first = detail::first_layer(cs, initial);
  std::vector<ComplexMatrix> transfers;
  for (std::size_t l = 1; l < len; ++l) transfers.push_back(detail::transfer(cs, l));

  std::vector<std::size_t> idx(len, 0);
  std::vector<complex> partial(len);
  std::function<void(std::size_t)> rec = [&](std::size_t l) {
    for (std::size_t k = 0; k < n; ++k) {
      idx[l] = k;
      partial[l] = l == 0 ? first(static_cast<Eigen::Index>(k))
                          : transfers[l - 1](static_cast<Eigen::Index>(k),
                                             static_cast<Eigen::Index>(idx[l - 1])) *
                                partial[l - 1];
      if (l + 1 == len)
        visit(idx, partial[l]);
      else
        rec(l + 1);
    }
  };
  rec(0);
}

inline std::vector<VirtualPath> enumerate_paths(const CompiledScenario& cs, const StateVector& initial) {
  std::vector<VirtualPath> out;
  out.reserve(static_cast<std::size_t>(cs.path_count()));
  for_each_path(cs, initial, [&](const std::vector<std::size_t>& idx, complex a) {
    out.push_back({idx, a});
  });
  return out;
}

/// Appends a measurement after the last one. The new time must be strictly later.
inline Scenario extend_scenario(const Scenario& s, MeasurementEvent next) {
  const double last = s.measurements.empty() ? s.preparation_time() : s.measurements.back().time;
  if (!(next.time > last))
    throw PreconditionError("non-increasing time: new measurement at " + std::to_string(next.time) +
                            " is not after " + std::to_string(last));
  Scenario out = s;
  out.measurements.push_back(std::move(next));
  if (out.postselection && out.postselection->time < out.measurements.back().time)
    out.postselection.reset();
  require_valid(out);
  return out;
}

/// Amplitudes of all N^L paths from one initial state, extendable one
/// measurement at a time without recomputing the prefix.
class PathTable {
 public:
  PathTable(const CompiledScenario& cs, StateVector initial)
      : cs_(std::make_shared<const CompiledScenario>(cs)), initial_(std::move(initial)) {
    amplitudes_.reserve(static_cast<std::size_t>(cs.path_count()));
    for_each_path(*cs_, initial_, [&](const std::vector<std::size_t>&, complex a) {
      amplitudes_.push_back(a);
    });
  }

  const CompiledScenario& scenario() const { return *cs_; }
  const std::vector<complex>& amplitudes() const { return amplitudes_; }

  complex amplitude(const std::vector<std::size_t>& path) const {
    std::size_t flat = 0;
    for (auto k : path) flat = flat * cs_->dimension() + k;
    return amplitudes_.at(flat);
  }

  /// A(.., n_L, n_{L+1}) = <q^{L+1}_{n_{L+1}}| U(t_{L+1}, t_L) |q^L_{n_L}> A(.., n_L)
  PathTable extend(MeasurementEvent next) const {
    auto grown = std::make_shared<const CompiledScenario>(
        extend_scenario(cs_->scenario(), std::move(next)), cs_->options());
    detail::check_path_budget(*grown);
    const std::size_t n = grown->dimension();
    const ComplexMatrix t = detail::transfer(*grown, grown->length() - 1);
    PathTable out;
    out.cs_ = grown;
    out.initial_ = initial_;
    out.amplitudes_.resize(amplitudes_.size() * n);
    for (std::size_t p = 0; p < amplitudes_.size(); ++p) {
      const auto last = static_cast<Eigen::Index>(p % n);
      for (std::size_t m = 0; m < n; ++m)
        out.amplitudes_[p * n + m] = t(static_cast<Eigen::Index>(m), last) * amplitudes_[p];
    }
    return out;
  }

  /// Outcome probabilities from the stored amplitudes: coherent sums inside
  /// past clusters, incoherent sum over final basis states.
  HistoryDistribution distribution() const;

 private:
  PathTable() = default;
  std::shared_ptr<const CompiledScenario> cs_;
  StateVector initial_;
  std::vector<complex> amplitudes_;
};

inline HistoryDistribution PathTable::distribution() const {
  const CompiledScenario& cs = *cs_;
  const std::size_t n = cs.dimension();
  const std::size_t len = cs.length();
  HistoryDistribution out = empty_distribution(cs, Strategy::PathSum);
  // coherent sums keyed by (past cluster string, final basis index)
  const std::size_t past_strings = out.size() / out.radices().back();
  std::vector<complex> coarse(past_strings * n, complex(0.0, 0.0));
  std::vector<std::size_t> idx(len, 0);
  for (std::size_t p = 0; p < amplitudes_.size(); ++p) {
    std::size_t rest = p;
    for (std::size_t l = len; l-- > 0;) {
      idx[l] = rest % n;
      rest /= n;
    }
    std::size_t key = 0;
    for (std::size_t l = 0; l + 1 < len; ++l) key = key * out.radices()[l] + cs.observable(l).cluster_of(idx[l]);
    coarse[key * n + idx[len - 1]] += amplitudes_[p];
  }
  const auto& last = cs.observable(len - 1);
  for (std::size_t key = 0; key < past_strings; ++key)
    for (std::size_t m = 0; m < n; ++m)
      out.at(key * last.cluster_count() + last.cluster_of(m)) += std::norm(coarse[key * n + m]);
  return out;
}

}  // namespace histories
