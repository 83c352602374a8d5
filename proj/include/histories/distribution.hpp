#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "histories/errors.hpp"

namespace histories {

/// Cluster indices (i_1, ..., i_L), one per measurement, in ascending-eigenvalue order.
using OutcomeString = std::vector<std::size_t>;

enum class Strategy { PathSum, Contraction, TraceFormula };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::PathSum: return "path-sum";
    case Strategy::Contraction: return "projected-propagator";
    case Strategy::TraceFormula: return "trace-formula";
  }
  return "?";
}

/// Probabilities of every outcome string of a scenario, stored densely in
/// lexicographic (mixed-radix, first measurement most significant) order.
class HistoryDistribution {
 public:
  HistoryDistribution() = default;
  HistoryDistribution(std::vector<std::size_t> radices, std::vector<std::string> labels,
                      std::vector<std::vector<double>> eigenvalues, Strategy strategy)
      : radices_(std::move(radices)),
        labels_(std::move(labels)),
        eigenvalues_(std::move(eigenvalues)),
        strategy_(strategy) {
    std::size_t total = 1;
    for (auto r : radices_) total *= r;
    probabilities_.assign(total, 0.0);
  }

  std::size_t length() const { return radices_.size(); }
  std::size_t size() const { return probabilities_.size(); }
  const std::vector<std::size_t>& radices() const { return radices_; }
  const std::vector<std::string>& labels() const { return labels_; }
  /// Eigenvalue of cluster c of measurement l.
  double eigenvalue(std::size_t l, std::size_t c) const { return eigenvalues_.at(l).at(c); }
  const std::vector<std::vector<double>>& eigenvalues() const { return eigenvalues_; }
  Strategy strategy() const { return strategy_; }

  std::size_t index_of(const OutcomeString& s) const {
    if (s.size() != radices_.size())
      throw IndexError("outcome string has " + std::to_string(s.size()) + " entries, expected " +
                       std::to_string(radices_.size()));
    std::size_t idx = 0;
    for (std::size_t l = 0; l < s.size(); ++l) {
      if (s[l] >= radices_[l])
        throw IndexError("outcome index " + std::to_string(s[l]) + " at position " +
                         std::to_string(l + 1) + " exceeds cluster count " +
                         std::to_string(radices_[l]));
      idx = idx * radices_[l] + s[l];
    }
    return idx;
  }

  OutcomeString string_at(std::size_t index) const {
    OutcomeString s(radices_.size());
    for (std::size_t l = radices_.size(); l-- > 0;) {
      s[l] = index % radices_[l];
      index /= radices_[l];
    }
    return s;
  }

  double probability(const OutcomeString& s) const { return probabilities_[index_of(s)]; }
  double operator[](std::size_t index) const { return probabilities_.at(index); }
  double& at(std::size_t index) { return probabilities_.at(index); }
  const std::vector<double>& probabilities() const { return probabilities_; }
  std::vector<double>& probabilities() { return probabilities_; }

  double total() const { return std::accumulate(probabilities_.begin(), probabilities_.end(), 0.0); }

 private:
  std::vector<std::size_t> radices_;
  std::vector<std::string> labels_;
  std::vector<std::vector<double>> eigenvalues_;
  Strategy strategy_ = Strategy::Contraction;
  std::vector<double> probabilities_;
};

/// Sum over the last outcome: the distribution of the shorter sequence.
inline HistoryDistribution marginal_drop_last(const HistoryDistribution& d) {
  if (d.length() < 2) throw PreconditionError("marginal_drop_last needs at least two measurements");
  auto radices = d.radices();
  const std::size_t last = radices.back();
  radices.pop_back();
  auto labels = d.labels();
  labels.pop_back();
  auto eig = d.eigenvalues();
  eig.pop_back();
  HistoryDistribution out(std::move(radices), std::move(labels), std::move(eig), d.strategy());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < last; ++j) s += d[i * last + j];
    out.at(i) = s;
  }
  return out;
}

}  // namespace histories
