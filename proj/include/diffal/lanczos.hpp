#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace diffal {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct LanczosOptions {
  std::size_t nev = 1;          // eigenpairs wanted
  std::size_t ncv = 0;          // Krylov subspace size; 0 picks max(2*nev + 20, 40)
  double tol = 1e-11;           // residual bound on ||A y - theta y||, ||y|| = 1
  bool relative = false;        // compare residuals against tol * |theta| instead
  std::size_t max_restarts = 5000;
  std::uint64_t seed = 0x5eed;
};

struct EigenPairs {
  Eigen::VectorXd values;       // sorted by |value| descending
  Eigen::MatrixXd vectors;      // orthonormal columns
  Eigen::VectorXd residuals;
  std::size_t restarts = 0;
  std::size_t matvecs = 0;
};

// Largest-magnitude eigenpairs of a symmetric sparse matrix by thick-restart
// Lanczos with full reorthogonalization. Columns of `deflate` (orthonormal,
// may be empty) are projected out of the Krylov space, so known eigenvectors
// are excluded from the result. Throws NumericalError with the residuals when
// max_restarts is exhausted.
EigenPairs lanczos_largest_magnitude(const SparseMatrix& a, const LanczosOptions& options,
                                     const Eigen::MatrixXd& deflate = Eigen::MatrixXd());

// y = A x for a symmetric operator A of the given dimension.
using LinearOperator = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& y)>;

// Same iteration for an operator known only through its action.
EigenPairs lanczos_largest_magnitude(const LinearOperator& a, Eigen::Index n, const LanczosOptions& options,
                                     const Eigen::MatrixXd& deflate = Eigen::MatrixXd());

}  // namespace diffal
