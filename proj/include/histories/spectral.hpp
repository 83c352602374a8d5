#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "histories/linalg.hpp"

namespace histories {

inline constexpr double kDefaultClusterTol = 1e-9;

/// One distinct eigenvalue together with its eigenspace.
struct SpectralCluster {
  double eigenvalue = 0.0;
  ComplexMatrix basis;      // N x multiplicity, orthonormal columns
  ComplexMatrix projector;  // N x N

  std::size_t multiplicity() const { return static_cast<std::size_t>(basis.cols()); }
};

/// Eigenvalue clusters in ascending order. The basis vectors of all clusters,
/// concatenated cluster by cluster, form the measurement basis |q_n>.
struct SpectralDecomposition {
  std::vector<SpectralCluster> clusters;

  std::size_t dimension() const {
    return clusters.empty() ? 0 : static_cast<std::size_t>(clusters.front().projector.rows());
  }
  std::size_t cluster_count() const { return clusters.size(); }
};

namespace detail {

// Orthonormal basis for the range of a rank-`rank` projector, depending only
// on the projector itself: columns are picked by pivoted Gram-Schmidt, then the
// chosen columns are orthonormalised again in ascending index order and each
// vector is given the standard phase.
inline ComplexMatrix canonical_range_basis(const ComplexMatrix& projector, Eigen::Index rank) {
  const Eigen::Index n = projector.rows();
  ComplexMatrix residual = projector;
  std::vector<Eigen::Index> pivots;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index step = 0; step < rank; ++step) {
    double best = -1.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!used[j]) best = std::max(best, residual.col(j).norm());
    Eigen::Index pick = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!used[j] && residual.col(j).norm() >= best * (1.0 - 1e-9)) {
        pick = j;
        break;
      }
    }
    if (pick < 0 || best <= 0.0) throw NumericalError("projector rank deficiency in basis construction");
    used[pick] = true;
    pivots.push_back(pick);
    const StateVector q = residual.col(pick) / residual.col(pick).norm();
    for (Eigen::Index j = 0; j < n; ++j)
      if (!used[j]) residual.col(j) -= q * q.dot(residual.col(j));
  }
  std::sort(pivots.begin(), pivots.end());

  ComplexMatrix basis(n, rank);
  for (Eigen::Index k = 0; k < rank; ++k) {
    StateVector v = projector.col(pivots[k]);
    // two passes of modified Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index m = 0; m < k; ++m) v -= basis.col(m) * basis.col(m).dot(v);
    v /= v.norm();
    fix_phase(v);
    basis.col(k) = v;
  }
  return basis;
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace detail

/// Hermitian eigendecomposition with degeneracy clustering.
///
/// Eigenvalues closer than `cluster_tol * max(1, max|H_ij|)` to their sorted
/// neighbour are merged into one cluster, whose eigenvalue is the mean of the
/// merged values. The basis of each cluster depends only on the cluster
/// projector, so the output is reproducible for identical input.
inline SpectralDecomposition spectral_decompose(const ComplexMatrix& h,
                                                double cluster_tol = kDefaultClusterTol) {
  require_hermitian(h, "observable");
  if (!(cluster_tol > 0.0)) throw PreconditionError("cluster_tol must be positive");
  const Eigen::Index n = h.rows();
  if (n == 0) throw DimensionError("empty matrix");

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(detail::hermitian_part(h));
  if (solver.info() != Eigen::Success)
    throw NumericalError("Hermitian eigensolver did not converge");
  const RealVector& values = solver.eigenvalues();
  const ComplexMatrix& vectors = solver.eigenvectors();
  const double scale = std::max(1.0, max_norm(h));

  SpectralDecomposition out;
  Eigen::Index start = 0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    if (k < n && values(k) - values(k - 1) <= cluster_tol * scale) continue;
    const Eigen::Index mult = k - start;
    SpectralCluster c;
    c.eigenvalue = values.segment(start, mult).mean();
    const ComplexMatrix v = vectors.middleCols(start, mult);
    c.projector = detail::hermitian_part(v * v.adjoint());
    c.basis = detail::canonical_range_basis(c.projector, mult);
    out.clusters.push_back(std::move(c));
    start = k;
  }
  return out;
}

/// Decomposition from a caller-supplied orthonormal eigenbasis. The given
/// vectors and their phases are kept as-is; only their grouping and the
/// cluster order are derived.
inline SpectralDecomposition spectral_decompose_with_basis(const ComplexMatrix& h,
                                                           const std::vector<StateVector>& basis,
                                                           double cluster_tol = kDefaultClusterTol) {
  require_hermitian(h, "observable");
  const Eigen::Index n = h.rows();
  if (static_cast<Eigen::Index>(basis.size()) != n)
    throw DimensionError("explicit eigenbasis has " + std::to_string(basis.size()) +
                         " vectors, expected " + std::to_string(n));
  ComplexMatrix b(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (basis[k].size() != n) throw DimensionError("explicit eigenbasis vector has wrong dimension");
    b.col(k) = basis[k];
  }
  const double ortho = (b.adjoint() * b - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (ortho > 1e-10)
    throw PreconditionError("explicit eigenbasis is not orthonormal (deviation " +
                            std::to_string(ortho) + ")");
  const double scale = std::max(1.0, max_norm(h));
  std::vector<std::pair<double, Eigen::Index>> eig;
  for (Eigen::Index k = 0; k < n; ++k) {
    const StateVector hv = h * b.col(k);
    const double lambda = b.col(k).dot(hv).real();
    if ((hv - lambda * b.col(k)).cwiseAbs().maxCoeff() > 1e-9 * scale)
      throw PreconditionError("explicit basis vector " + std::to_string(k) +
                              " is not an eigenvector of the observable");
    eig.emplace_back(lambda, k);
  }
  std::stable_sort(eig.begin(), eig.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  SpectralDecomposition out;
  std::size_t start = 0;
  for (std::size_t k = 1; k <= eig.size(); ++k) {
    if (k < eig.size() && eig[k].first - eig[k - 1].first <= cluster_tol * scale) continue;
    // rounding can reorder tied eigenvalues; keep the caller's order inside a cluster
    std::sort(eig.begin() + static_cast<std::ptrdiff_t>(start), eig.begin() + static_cast<std::ptrdiff_t>(k),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    SpectralCluster c;
    const auto mult = static_cast<Eigen::Index>(k - start);
    c.basis.resize(n, mult);
    double sum = 0.0;
    for (Eigen::Index m = 0; m < mult; ++m) {
      c.basis.col(m) = b.col(eig[start + m].second);
      sum += eig[start + m].first;
    }
    c.eigenvalue = sum / static_cast<double>(mult);
    c.projector = detail::hermitian_part(c.basis * c.basis.adjoint());
    out.clusters.push_back(std::move(c));
    start = k;
  }
  return out;
}

/// A measured quantity: Hermitian matrix plus its clustered spectrum.
class HermitianObservable {
 public:
  HermitianObservable() = default;

  explicit HermitianObservable(ComplexMatrix matrix, std::string label = {},
                               double cluster_tol = kDefaultClusterTol)
      : matrix_(std::move(matrix)),
        spectrum_(spectral_decompose(matrix_, cluster_tol)),
        label_(std::move(label)) {
    index_basis();
  }

  HermitianObservable(ComplexMatrix matrix, const std::vector<StateVector>& basis,
                      std::string label, double cluster_tol = kDefaultClusterTol)
      : matrix_(std::move(matrix)),
        spectrum_(spectral_decompose_with_basis(matrix_, basis, cluster_tol)),
        label_(std::move(label)),
        explicit_basis_(basis) {
    index_basis();
  }

  /// Observable with eigenvalue `values[k]` on `basis[k]`.
  static HermitianObservable from_eigenpairs(const std::vector<double>& values,
                                             const std::vector<StateVector>& basis,
                                             std::string label = {},
                                             double cluster_tol = kDefaultClusterTol) {
    if (values.size() != basis.size() || basis.empty())
      throw DimensionError("eigenvalue and eigenvector counts differ");
    const Eigen::Index n = basis.front().size();
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < basis.size(); ++k) m += values[k] * outer(basis[k], basis[k]);
    return HermitianObservable(detail::hermitian_part(m), basis, std::move(label), cluster_tol);
  }

  const ComplexMatrix& matrix() const { return matrix_; }
  const SpectralDecomposition& spectrum() const { return spectrum_; }
  const std::string& label() const { return label_; }
  std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t cluster_count() const { return spectrum_.clusters.size(); }
  double eigenvalue(std::size_t cluster) const { return spectrum_.clusters.at(cluster).eigenvalue; }
  const SpectralCluster& cluster(std::size_t i) const { return spectrum_.clusters.at(i); }

  /// Measurement basis |q_n>, columns ordered cluster by cluster.
  const ComplexMatrix& basis() const { return basis_; }
  /// Cluster that basis vector n belongs to.
  std::size_t cluster_of(std::size_t n) const { return cluster_of_.at(n); }
  /// First basis index of each cluster, plus a final sentinel equal to N.
  const std::vector<std::size_t>& cluster_offsets() const { return offsets_; }

  bool has_explicit_basis() const { return explicit_basis_.has_value(); }
  const std::optional<std::vector<StateVector>>& explicit_basis() const { return explicit_basis_; }

  /// Index of the cluster whose eigenvalue is within `tol` of `value`.
  std::optional<std::size_t> find_cluster(double value, double tol = 1e-6) const {
    for (std::size_t i = 0; i < spectrum_.clusters.size(); ++i)
      if (std::abs(spectrum_.clusters[i].eigenvalue - value) <= tol * std::max(1.0, std::abs(value)))
        return i;
    return std::nullopt;
  }

 private:
  void index_basis() {
    const Eigen::Index n = matrix_.rows();
    basis_.resize(n, n);
    cluster_of_.clear();
    offsets_.clear();
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < spectrum_.clusters.size(); ++c) {
      offsets_.push_back(static_cast<std::size_t>(col));
      const auto& b = spectrum_.clusters[c].basis;
      basis_.middleCols(col, b.cols()) = b;
      for (Eigen::Index m = 0; m < b.cols(); ++m) cluster_of_.push_back(c);
      col += b.cols();
    }
    offsets_.push_back(static_cast<std::size_t>(n));
  }

  ComplexMatrix matrix_;
  SpectralDecomposition spectrum_;
  std::string label_;
  std::optional<std::vector<StateVector>> explicit_basis_;
  ComplexMatrix basis_;
  std::vector<std::size_t> cluster_of_;
  std::vector<std::size_t> offsets_;
};

}  // namespace histories
