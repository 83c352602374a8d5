#pragma once

// Seeded Monte Carlo draws of outcome strings, with goodness-of-fit reports.
//
// Random numbers: std::mt19937_64, whose output sequence is fixed by the C++
// standard, turned into doubles in [0, 1) with an explicit 53-bit conversion.
// No std::*_distribution is used, so reports are identical across platforms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

#include "histories/compiled.hpp"
#include "histories/distribution.hpp"
#include "histories/paths.hpp"
#include "histories/probability.hpp"

namespace histories {

class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}
  /// Uniform double in [0, 1).
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

struct SampleEntry {
  OutcomeString outcome;
  std::vector<double> eigenvalues;
  std::uint64_t count = 0;
  double frequency = 0.0;
  double standard_error = 0.0;  // sqrt(f (1 - f) / n)
  double probability = 0.0;     // exact
};

struct SampleReport {
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  std::string method;
  std::vector<std::string> labels;
  /// Every string with nonzero exact probability or nonzero count, lexicographic.
  std::vector<SampleEntry> entries;
  double chi_square = 0.0;
  std::size_t dof = 0;

  std::uint64_t count(const OutcomeString& s) const {
    for (const auto& e : entries)
      if (e.outcome == s) return e.count;
    return 0;
  }
  double frequency(const OutcomeString& s) const {
    return n == 0 ? 0.0 : static_cast<double>(count(s)) / static_cast<double>(n);
  }
};

/// Pearson statistic of observed counts against expected probabilities.
/// Cells with zero probability and zero count are ignored; a positive count
/// on a zero-probability cell gives +infinity.
inline double chi_square_statistic(const std::vector<std::uint64_t>& counts,
                                   const std::vector<double>& probabilities, std::size_t* dof = nullptr) {
  if (counts.size() != probabilities.size()) throw DimensionError("count and probability vectors differ in length");
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  double chi = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = static_cast<double>(n) * probabilities[i];
    if (probabilities[i] <= 0.0) {
      if (counts[i] > 0) chi = std::numeric_limits<double>::infinity();
      continue;
    }
    ++cells;
    const double d = static_cast<double>(counts[i]) - expected;
    chi += d * d / expected;
  }
  if (dof) *dof = cells > 0 ? cells - 1 : 0;
  return chi;
}

/// Two-sample homogeneity statistic (2 x k contingency table).
inline double chi_square_homogeneity(const std::vector<std::uint64_t>& a,
                                     const std::vector<std::uint64_t>& b, std::size_t* dof = nullptr) {
  if (a.size() != b.size()) throw DimensionError("count vectors differ in length");
  double na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  const double n = na + nb;
  double chi = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double col = static_cast<double>(a[i] + b[i]);
    if (col == 0.0) continue;
    ++cells;
    const double ea = na * col / n, eb = nb * col / n;
    chi += (static_cast<double>(a[i]) - ea) * (static_cast<double>(a[i]) - ea) / ea;
    chi += (static_cast<double>(b[i]) - eb) * (static_cast<double>(b[i]) - eb) / eb;
  }
  if (dof) *dof = cells > 0 ? cells - 1 : 0;
  return chi;
}

/// Upper quantile of the chi-square law: P(X > q) = alpha.
inline double chi_square_critical(std::size_t dof, double alpha) {
  if (dof == 0) return 0.0;
  const boost::math::chi_squared_distribution<double> law(static_cast<double>(dof));
  return boost::math::quantile(boost::math::complement(law, alpha));
}

namespace detail {

inline void check_sampling_args(const HistoryDistribution& dist, std::uint64_t n) {
  if (n < 1) throw PreconditionError("sample size n must be at least 1");
  const double total = dist.total();
  if (std::abs(total - 1.0) > 1e-9)
    throw PreconditionError("distribution is not normalised (total " + std::to_string(total) + ")");
  for (double p : dist.probabilities())
    if (p < -1e-12) throw PreconditionError("distribution has a negative entry");
}

inline SampleReport build_report(const HistoryDistribution& exact, const std::vector<std::uint64_t>& counts,
                                 std::uint64_t n, std::uint64_t seed, std::string method) {
  SampleReport r;
  r.seed = seed;
  r.n = n;
  r.method = std::move(method);
  r.labels = exact.labels();
  // probabilities at rounding level are reported as exact zeros
  std::vector<double> probs(exact.size());
  for (std::size_t i = 0; i < exact.size(); ++i) probs[i] = exact[i] > 1e-14 ? exact[i] : 0.0;
  r.chi_square = chi_square_statistic(counts, probs, &r.dof);
  for (std::size_t i = 0; i < exact.size(); ++i) {
    if (probs[i] <= 0.0 && counts[i] == 0) continue;
    SampleEntry e;
    e.outcome = exact.string_at(i);
    for (std::size_t l = 0; l < e.outcome.size(); ++l) e.eigenvalues.push_back(exact.eigenvalue(l, e.outcome[l]));
    e.count = counts[i];
    e.frequency = static_cast<double>(counts[i]) / static_cast<double>(n);
    e.standard_error = std::sqrt(e.frequency * (1.0 - e.frequency) / static_cast<double>(n));
    e.probability = probs[i];
    r.entries.push_back(std::move(e));
  }
  return r;
}

/// Index of the first cumulative value above u; never a zero-weight cell.
inline std::size_t inverse_cdf(const std::vector<double>& cdf, const std::vector<double>& weights, double u) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  std::size_t k = it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin());
  while (k > 0 && weights[k] <= 0.0) --k;
  return k;
}

}  // namespace detail

/// n independent draws from `dist` by inverse CDF over lexicographic order.
inline SampleReport sample(const HistoryDistribution& dist, std::uint64_t n, std::uint64_t seed) {
  detail::check_sampling_args(dist, n);
  std::vector<double> weights(dist.size()), cdf(dist.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    weights[i] = std::max(0.0, dist[i]);
    acc += weights[i];
    cdf[i] = acc;
  }
  UniformSource rng(seed);
  std::vector<std::uint64_t> counts(dist.size(), 0);
  for (std::uint64_t k = 0; k < n; ++k) ++counts[detail::inverse_cdf(cdf, weights, rng.next() * acc)];
  return detail::build_report(dist, counts, n, seed, "inverse-cdf");
}

/// Draws outcome strings one measurement at a time from P(next | prefix).
/// Conditionals are computed lazily from the projected propagator and cached
/// per prefix, so only prefixes actually reached are evaluated.
inline SampleReport conditional_sample(const CompiledScenario& cs, std::uint64_t n, std::uint64_t seed) {
  if (n < 1) throw PreconditionError("sample size n must be at least 1");
  const std::size_t len = cs.length();
  const auto radices = cs.cluster_counts();

  struct Node {
    std::vector<StateVector> states;  // unnormalised, one per ensemble component, at t_l before projection
    std::vector<double> child_weight;
    std::vector<double> cdf;
    std::vector<int> child;  // node index per outcome, -1 until reached
  };
  std::vector<Node> nodes;
  auto make_node = [&](std::size_t l, std::vector<StateVector> states) {
    Node node;
    node.states = std::move(states);
    const auto& obs = cs.observable(l);
    double acc = 0.0;
    for (std::size_t c = 0; c < radices[l]; ++c) {
      double w = 0.0;
      for (std::size_t k = 0; k < node.states.size(); ++k)
        w += cs.ensemble()[k].weight * (obs.cluster(c).basis.adjoint() * node.states[k]).squaredNorm();
      node.child_weight.push_back(w);
      acc += w;
      node.cdf.push_back(acc);
    }
    node.child.assign(radices[l], -1);
    nodes.push_back(std::move(node));
    return static_cast<int>(nodes.size() - 1);
  };

  std::vector<StateVector> root;
  for (const auto& comp : cs.ensemble()) root.push_back(cs.step(0).matrix * comp.state);
  make_node(0, std::move(root));

  const HistoryDistribution shape = empty_distribution(cs, Strategy::Contraction);
  std::map<std::size_t, std::uint64_t> sparse;
  UniformSource rng(seed);
  for (std::uint64_t draw = 0; draw < n; ++draw) {
    int at = 0;
    std::size_t flat = 0;
    for (std::size_t l = 0; l < len; ++l) {
      const double total = nodes[at].cdf.back();
      if (!(total > 0.0)) throw NumericalError("reached a prefix of zero probability");
      const std::size_t c = detail::inverse_cdf(nodes[at].cdf, nodes[at].child_weight, rng.next() * total);
      flat = flat * radices[l] + c;
      if (l + 1 == len) break;
      if (nodes[at].child[c] < 0) {
        std::vector<StateVector> next;
        for (const auto& v : nodes[at].states)
          next.push_back(cs.step(l + 1).matrix * detail::project(cs.observable(l).cluster(c), v));
        const int id = make_node(l + 1, std::move(next));
        nodes[at].child[c] = id;
      }
      at = nodes[at].child[c];
    }
    ++sparse[flat];
  }

  // Exact reference for the report; falls back to visited strings only when
  // the full distribution would exceed the string budget.
  HistoryDistribution exact = shape;
  if (cs.string_count() <= cs.options().string_budget) exact = full_distribution(cs);
  std::vector<std::uint64_t> counts(shape.size(), 0);
  for (const auto& [k, c] : sparse) counts[k] = c;
  return detail::build_report(exact, counts, n, seed, "sequential-conditional");
}

inline nlohmann::ordered_json to_json(const SampleReport& r) {
  using J = nlohmann::ordered_json;
  J doc;
  doc["version"] = 1;
  doc["seed"] = r.seed;
  doc["n"] = r.n;
  doc["method"] = r.method;
  doc["labels"] = r.labels;
  J entries = J::array();
  for (const auto& e : r.entries) {
    J j;
    j["outcome"] = e.eigenvalues;
    j["indices"] = e.outcome;
    j["count"] = e.count;
    j["frequency"] = e.frequency;
    j["stderr"] = e.standard_error;
    j["probability"] = e.probability;
    entries.push_back(std::move(j));
  }
  doc["entries"] = std::move(entries);
  if (std::isfinite(r.chi_square))
    doc["chi_square"] = r.chi_square;
  else
    doc["chi_square"] = nullptr;
  doc["dof"] = r.dof;
  return doc;
}

inline std::string serialize(const SampleReport& r) { return to_json(r).dump(1) + "\n"; }

}  // namespace histories
