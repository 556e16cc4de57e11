#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "diffal/dataset.hpp"
#include "diffal/lanczos.hpp"

namespace diffal {

// Exact k nearest neighbors of every point, self excluded. Rows are sorted by
// (distance, index).
class NeighborLists {
 public:
  NeighborLists() = default;
  NeighborLists(std::size_t n, std::size_t k, std::vector<std::size_t> indices,
                std::vector<double> distances);

  std::size_t size() const { return n_; }
  std::size_t k() const { return k_; }
  std::size_t index(std::size_t i, std::size_t j) const { return indices_[i * k_ + j]; }
  double distance(std::size_t i, std::size_t j) const { return distances_[i * k_ + j]; }
  const std::vector<std::size_t>& indices() const { return indices_; }
  const std::vector<double>& distances() const { return distances_; }

  friend bool operator==(const NeighborLists&, const NeighborLists&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::vector<std::size_t> indices_;
  std::vector<double> distances_;
};

// Throws ConfigError unless 1 <= k < n.
NeighborLists knn_search(const PointCloud& cloud, std::size_t k);

// Symmetric kernel weights on the symmetrized kNN pattern plus a unit diagonal.
struct SparseKernelMatrix {
  SparseMatrix weights;
  double sigma = 0.0;
};

// W_ij = exp(-d_ij^2 / sigma^2) on every kNN edge, symmetrized by entrywise
// max, with W_ii = 1.
SparseKernelMatrix kernel_matrix(const NeighborLists& neighbors, double sigma);

struct MarkovChain {
  SparseMatrix transition;         // P = D^{-1} W
  SparseMatrix kernel;             // W, kept for the symmetric conjugate
  Eigen::VectorXd degrees;         // d_i = sum_j W_ij
  Eigen::VectorXd stationary;      // pi_i = d_i / sum_j d_j
  std::size_t size() const { return static_cast<std::size_t>(degrees.size()); }
};

MarkovChain markov_normalize(const SparseKernelMatrix& w);

struct SpectralOptions {
  // Components at or below this size are solved densely; larger ones go
  // through Lanczos.
  std::size_t dense_threshold = 400;
  // Trailing eigenpairs with |lambda| below this are dropped.
  double truncation_tol = 1e-8;
  LanczosOptions lanczos{};
  // Large components first try Lanczos on ((1 + shift) I - S)^{-1}, whose
  // convergence does not degrade as the top eigenvalues crowd toward 1. It
  // is skipped when the sparse factor would hold more than max_fill times
  // the nonzeros of S, or when a negative eigenvalue might outrank the
  // wanted ones in magnitude.
  bool shift_invert = true;
  double shift = 1e-3;
  double max_fill = 16.0;
};

// Top-M eigenpairs of P, ordered by |lambda| descending. psi columns are the
// right eigenvectors of P normalized so that sum_i pi_i psi_a(i) psi_b(i) is
// the identity; each column's largest-magnitude entry is positive.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd psi;             // n x M
  Eigen::VectorXd stationary;
  std::size_t num_components = 1;

  std::size_t size() const { return static_cast<std::size_t>(psi.rows()); }
  std::size_t order() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

// Connected components of the kernel graph, labelled 0.. in order of each
// component's smallest vertex.
std::vector<std::size_t> connected_components(const SparseMatrix& w, std::size_t* count = nullptr);

// Solves the symmetric conjugate D^{-1/2} W D^{-1/2} per connected component
// and maps back with psi = phi / sqrt(pi). Warns when the graph is
// disconnected.
SpectralDecomposition spectral_decompose(const MarkovChain& chain, std::size_t num_eigs,
                                         const SpectralOptions& options = {});

std::size_t default_knn(std::size_t n);
// Mean distance to the k-th neighbor.
double default_sigma(const NeighborLists& neighbors);

}  // namespace diffal
