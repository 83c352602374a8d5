#pragma once

// Outcome-sequence probabilities by three independent routes:
//
//   path-sum       literal sum over virtual paths with cluster selectors:
//                  amplitudes add inside every past cluster, probabilities add
//                  over the final basis states of the last cluster;
//   contraction    the same amplitude written as <q_n| U_L pi_{L-1} ... pi_1 U_1 |u>,
//                  evaluated by propagating one vector per preparation component;
//   trace-formula  Tr{ P_L P_{L-1} ... P_1 rho P_1 ... P_{L-1} } with
//                  Heisenberg-picture projectors P_l = W_l^dag pi_l W_l.

#include <functional>
#include <vector>

#include "histories/compiled.hpp"
#include "histories/distribution.hpp"
#include "histories/paths.hpp"

namespace histories {

namespace detail {

inline void check_outcomes(const CompiledScenario& cs, const OutcomeString& outcomes) {
  if (outcomes.size() != cs.length())
    throw IndexError("outcome string has " + std::to_string(outcomes.size()) +
                     " entries, scenario has " + std::to_string(cs.length()) + " measurements");
  for (std::size_t l = 0; l < outcomes.size(); ++l)
    if (outcomes[l] >= cs.observable(l).cluster_count())
      throw IndexError("outcome index " + std::to_string(outcomes[l]) + " at measurement " +
                       std::to_string(l + 1) + " exceeds cluster count " +
                       std::to_string(cs.observable(l).cluster_count()));
}

inline StateVector project(const SpectralCluster& c, const StateVector& v) {
  return c.basis * (c.basis.adjoint() * v);
}

/// pi_{L-1} U_{L-1} ... pi_1 U_1 |u>, then U_L applied: the vector whose
/// overlaps with the final basis are the coarse-grained amplitudes.
inline StateVector contract_past(const CompiledScenario& cs, const std::vector<std::size_t>& past,
                                 const StateVector& initial) {
  StateVector phi = cs.step(0).matrix * initial;
  for (std::size_t l = 0; l + 1 < cs.length(); ++l) {
    phi = project(cs.observable(l).cluster(past[l]), phi);
    phi = cs.step(l + 1).matrix * phi;
  }
  return phi;
}

/// W_l = U(t_l, t_prep) for every measurement l.
inline std::vector<ComplexMatrix> cumulative_evolutions(const CompiledScenario& cs) {
  std::vector<ComplexMatrix> w;
  ComplexMatrix acc = ComplexMatrix::Identity(static_cast<Eigen::Index>(cs.dimension()),
                                              static_cast<Eigen::Index>(cs.dimension()));
  for (std::size_t l = 0; l < cs.length(); ++l) {
    acc = cs.step(l).matrix * acc;
    w.push_back(acc);
  }
  return w;
}

inline void check_string_budget(const CompiledScenario& cs) {
  const std::uint64_t strings = cs.string_count();
  if (strings > cs.options().string_budget)
    throw BudgetExceededError("full distribution has " + std::to_string(strings) +
                                  " outcome strings, budget is " +
                                  std::to_string(cs.options().string_budget),
                              static_cast<double>(strings),
                              static_cast<double>(cs.options().string_budget));
}

}  // namespace detail

/// Coherent amplitude for passing the past clusters (one per measurement
/// before the last) and ending in final basis state `final_index`.
inline complex coarse_amplitude(const CompiledScenario& cs, const StateVector& initial,
                                const std::vector<std::size_t>& past, std::size_t final_index) {
  detail::check_initial(cs, initial);
  if (past.size() + 1 != cs.length())
    throw IndexError("expected " + std::to_string(cs.length() - 1) + " past outcomes, got " +
                     std::to_string(past.size()));
  for (std::size_t l = 0; l < past.size(); ++l)
    if (past[l] >= cs.observable(l).cluster_count())
      throw IndexError("past outcome index " + std::to_string(past[l]) + " at measurement " +
                       std::to_string(l + 1) + " out of range");
  if (final_index >= cs.dimension())
    throw IndexError("final basis index " + std::to_string(final_index) + " out of range");
  const StateVector phi = detail::contract_past(cs, past, initial);
  return cs.observable(cs.length() - 1).basis().col(static_cast<Eigen::Index>(final_index)).dot(phi);
}

/// The same amplitude as a sum over every index tuple n_1..n_{L-1} weighted
/// by the cluster selectors. Visits N^{L-1} tuples.
inline complex coarse_amplitude_path_sum(const CompiledScenario& cs, const StateVector& initial,
                                         const std::vector<std::size_t>& past,
                                         std::size_t final_index) {
  detail::check_initial(cs, initial);
  const std::size_t n = cs.dimension();
  const std::size_t len = cs.length();
  if (past.size() + 1 != len) throw IndexError("wrong number of past outcomes");
  if (final_index >= n) throw IndexError("final basis index out of range");
  const StateVector first = detail::first_layer(cs, initial);
  std::vector<ComplexMatrix> transfers;
  for (std::size_t l = 1; l < len; ++l) transfers.push_back(detail::transfer(cs, l));

  if (len == 1) return first(static_cast<Eigen::Index>(final_index));
  complex sum(0.0, 0.0);
  std::vector<std::size_t> idx(len - 1, 0);
  std::function<void(std::size_t, complex)> rec = [&](std::size_t l, complex partial) {
    for (std::size_t k = 0; k < n; ++k) {
      // Delta(Q^l_{i_l} - <q^l_k|Q^l|q^l_k>)
      const double delta = cs.observable(l).cluster_of(k) == past[l] ? 1.0 : 0.0;
      if (delta == 0.0) continue;
      const complex a = l == 0 ? first(static_cast<Eigen::Index>(k))
                               : transfers[l - 1](static_cast<Eigen::Index>(k),
                                                  static_cast<Eigen::Index>(idx[l - 1])) *
                                     partial;
      idx[l] = k;
      if (l + 2 == len)
        sum += transfers[l](static_cast<Eigen::Index>(final_index), static_cast<Eigen::Index>(k)) * a;
      else
        rec(l + 1, a);
    }
  };
  rec(0, complex(1.0, 0.0));
  return sum;
}

namespace detail {

inline double probability_path_sum(const CompiledScenario& cs, const OutcomeString& outcomes) {
  detail::check_path_budget(cs);
  const auto& last = cs.observable(cs.length() - 1);
  const std::vector<std::size_t> past(outcomes.begin(), outcomes.end() - 1);
  double p = 0.0;
  for (const auto& comp : cs.ensemble()) {
    double pc = 0.0;
    for (std::size_t n = 0; n < cs.dimension(); ++n) {
      if (last.cluster_of(n) != outcomes.back()) continue;
      pc += std::norm(coarse_amplitude_path_sum(cs, comp.state, past, n));
    }
    p += comp.weight * pc;
  }
  return p;
}

inline double probability_contraction(const CompiledScenario& cs, const OutcomeString& outcomes) {
  const auto& final_cluster = cs.observable(cs.length() - 1).cluster(outcomes.back());
  const std::vector<std::size_t> past(outcomes.begin(), outcomes.end() - 1);
  double p = 0.0;
  for (const auto& comp : cs.ensemble()) {
    const StateVector phi = contract_past(cs, past, comp.state);
    p += comp.weight * (final_cluster.basis.adjoint() * phi).squaredNorm();
  }
  return p;
}

inline double probability_trace(const CompiledScenario& cs, const OutcomeString& outcomes) {
  const auto w = cumulative_evolutions(cs);
  ComplexMatrix m = cs.density();
  for (std::size_t l = 0; l + 1 < cs.length(); ++l) {
    const ComplexMatrix h = w[l].adjoint() * cs.observable(l).cluster(outcomes[l]).projector * w[l];
    m = h * m * h;
  }
  const std::size_t last = cs.length() - 1;
  const ComplexMatrix h =
      w[last].adjoint() * cs.observable(last).cluster(outcomes[last]).projector * w[last];
  return (h * m).trace().real();
}

}  // namespace detail

/// Probability of one outcome string.
inline double sequence_probability(const CompiledScenario& cs, const OutcomeString& outcomes,
                                   Strategy strategy = Strategy::Contraction) {
  detail::check_outcomes(cs, outcomes);
  switch (strategy) {
    case Strategy::PathSum: return detail::probability_path_sum(cs, outcomes);
    case Strategy::Contraction: return detail::probability_contraction(cs, outcomes);
    case Strategy::TraceFormula: return detail::probability_trace(cs, outcomes);
  }
  return 0.0;
}

/// Projector-string (density operator) form; the independent oracle.
inline double trace_probability(const CompiledScenario& cs, const OutcomeString& outcomes) {
  return sequence_probability(cs, outcomes, Strategy::TraceFormula);
}

/// Cost of a brute-force full distribution: every string enumerates N^L paths.
inline std::uint64_t path_sum_cost(const CompiledScenario& cs) {
  const std::uint64_t strings = cs.string_count();
  const std::uint64_t paths = cs.path_count();
  if (paths != 0 && strings > UINT64_MAX / paths) return UINT64_MAX;
  return strings * paths;
}

/// Probabilities of all outcome strings, in lexicographic order.
inline HistoryDistribution full_distribution(const CompiledScenario& cs,
                                             Strategy strategy = Strategy::Contraction) {
  detail::check_string_budget(cs);
  HistoryDistribution out = empty_distribution(cs, strategy);
  const std::size_t len = cs.length();
  const auto radices = cs.cluster_counts();

  if (strategy == Strategy::PathSum) {
    const std::uint64_t cost = path_sum_cost(cs);
    if (cost > cs.options().path_budget)
      throw BudgetExceededError(
          "path-sum evaluation visits " + std::to_string(cs.string_count()) + " strings x " +
              std::to_string(cs.path_count()) + " paths, over the path budget of " +
              std::to_string(cs.options().path_budget) + "; use the projected-propagator strategy",
          static_cast<double>(cost), static_cast<double>(cs.options().path_budget));
    for (std::size_t i = 0; i < out.size(); ++i)
      out.at(i) = detail::probability_path_sum(cs, out.string_at(i));
    return out;
  }

  if (strategy == Strategy::Contraction) {
    // Depth-first over the prefix tree so every prefix is propagated once.
    const auto& last = cs.observable(len - 1);
    for (const auto& comp : cs.ensemble()) {
      std::function<void(std::size_t, std::size_t, const StateVector&)> rec =
          [&](std::size_t l, std::size_t prefix, const StateVector& phi) {
            if (l + 1 == len) {
              const StateVector y = last.basis().adjoint() * phi;
              const auto& off = last.cluster_offsets();
              for (std::size_t c = 0; c < radices[l]; ++c) {
                double s = 0.0;
                for (std::size_t k = off[c]; k < off[c + 1]; ++k)
                  s += std::norm(y(static_cast<Eigen::Index>(k)));
                out.at(prefix * radices[l] + c) += comp.weight * s;
              }
              return;
            }
            for (std::size_t c = 0; c < radices[l]; ++c) {
              const StateVector projected = detail::project(cs.observable(l).cluster(c), phi);
              rec(l + 1, prefix * radices[l] + c, cs.step(l + 1).matrix * projected);
            }
          };
      rec(0, 0, cs.step(0).matrix * comp.state);
    }
    return out;
  }

  const auto w = detail::cumulative_evolutions(cs);
  std::vector<std::vector<ComplexMatrix>> heis(len);
  for (std::size_t l = 0; l < len; ++l)
    for (const auto& c : cs.observable(l).spectrum().clusters)
      heis[l].push_back(w[l].adjoint() * c.projector * w[l]);
  std::function<void(std::size_t, std::size_t, const ComplexMatrix&)> rec =
      [&](std::size_t l, std::size_t prefix, const ComplexMatrix& m) {
        for (std::size_t c = 0; c < radices[l]; ++c) {
          if (l + 1 == len) {
            out.at(prefix * radices[l] + c) = (heis[l][c] * m).trace().real();
          } else {
            rec(l + 1, prefix * radices[l] + c, heis[l][c] * m * heis[l][c]);
          }
        }
      };
  rec(0, 0, cs.density());
  return out;
}

}  // namespace histories
