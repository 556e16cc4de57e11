#include "diffal/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "diffal/errors.hpp"

namespace diffal {
namespace {

// Two passes of classical Gram-Schmidt against `deflate` and the first `cols`
// columns of `basis`.
void orthogonalize(Eigen::VectorXd& w, const Eigen::MatrixXd& deflate,
                   const Eigen::MatrixXd& basis, Eigen::Index cols) {
  for (int pass = 0; pass < 2; ++pass) {
    if (deflate.cols() > 0) w.noalias() -= deflate * (deflate.transpose() * w);
    if (cols > 0) {
      const auto v = basis.leftCols(cols);
      w.noalias() -= v * (v.transpose() * w);
    }
  }
}

Eigen::VectorXd random_unit(Eigen::Index n, std::mt19937_64& rng, const Eigen::MatrixXd& deflate,
                            const Eigen::MatrixXd& basis, Eigen::Index cols) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = dist(rng);
    orthogonalize(w, deflate, basis, cols);
    const double norm = w.norm();
    if (norm > 1e-8) return w / norm;
  }
  throw NumericalError("lanczos: could not extend the Krylov basis");
}

}  // namespace

EigenPairs lanczos_largest_magnitude(const SparseMatrix& a, const LanczosOptions& options,
                                     const Eigen::MatrixXd& deflate) {
  const LinearOperator op = [&a](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = a * x; };
  return lanczos_largest_magnitude(op, a.rows(), options, deflate);
}

EigenPairs lanczos_largest_magnitude(const LinearOperator& a, Eigen::Index n, const LanczosOptions& options,
                                     const Eigen::MatrixXd& deflate) {
  const Eigen::Index available = n - deflate.cols();
  const Eigen::Index nev = static_cast<Eigen::Index>(options.nev);
  if (nev < 1 || nev > available) throw ConfigError("lanczos: nev out of range");

  Eigen::Index m = options.ncv ? static_cast<Eigen::Index>(options.ncv)
                               : std::max<Eigen::Index>(2 * nev + 20, 40);
  m = std::clamp<Eigen::Index>(m, std::min(nev + 1, available), available);

  std::mt19937_64 rng(options.seed);
  Eigen::MatrixXd v(n, m);
  Eigen::MatrixXd av(n, m);
  v.col(0) = random_unit(n, rng, deflate, v, 0);

  EigenPairs out;
  Eigen::Index kept = 0;
  Eigen::VectorXd next, product(n);
  const auto apply = [&](const Eigen::VectorXd& x) -> const Eigen::VectorXd& {
    a(x, product);
    ++out.matvecs;
    return product;
  };
  for (std::size_t restart = 0;; ++restart) {
    for (Eigen::Index j = kept; j < m; ++j) {
      av.col(j) = apply(v.col(j));
      Eigen::VectorXd w = av.col(j);
      orthogonalize(w, deflate, v, j + 1);
      const double beta = w.norm();
      const bool breakdown = beta <= 1e-12 * std::max(1.0, av.col(j).norm());
      if (j + 1 < m) {
        v.col(j + 1) = breakdown ? random_unit(n, rng, deflate, v, j + 1) : Eigen::VectorXd(w / beta);
      } else {
        next = breakdown ? Eigen::VectorXd() : Eigen::VectorXd(w / beta);
      }
    }

    Eigen::MatrixXd t = v.transpose() * av;
    t = 0.5 * (t + t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
    const Eigen::VectorXd& theta = small.eigenvalues();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
      return std::abs(theta[x]) > std::abs(theta[y]);
    });

    // Keep the wanted pairs plus half of the remaining room for the restart.
    const Eigen::Index keep = std::min<Eigen::Index>(nev + (m - nev) / 2, m - 1);
    Eigen::MatrixXd s(m, std::max(keep, nev));
    for (Eigen::Index c = 0; c < s.cols(); ++c) s.col(c) = small.eigenvectors().col(order[c]);
    Eigen::MatrixXd y = v * s;
    Eigen::MatrixXd ay = av * s;

    Eigen::VectorXd residuals(nev);
    bool converged = m == available;
    bool within = true;
    for (Eigen::Index c = 0; c < nev; ++c) {
      residuals[c] = (ay.col(c) - theta[order[c]] * y.col(c)).norm();
      const double bound = options.relative ? options.tol * std::abs(theta[order[c]]) : options.tol;
      within = within && residuals[c] <= bound;
    }
    converged = converged || within;
    out.restarts = restart;

    if (converged) {
      out.values.resize(nev);
      for (Eigen::Index c = 0; c < nev; ++c) out.values[c] = theta[order[c]];
      out.vectors = y.leftCols(nev);
      out.residuals = residuals;
      return out;
    }
    if (restart + 1 >= options.max_restarts) {
      std::ostringstream msg;
      msg << "lanczos did not converge after " << options.max_restarts
          << " restarts; residuals:";
      for (Eigen::Index c = 0; c < nev; ++c) msg << ' ' << residuals[c];
      throw NumericalError(msg.str());
    }

    v.leftCols(keep) = y.leftCols(keep);
    av.leftCols(keep) = ay.leftCols(keep);
    // Ritz vectors drift from exact orthogonality over many restarts.
    for (Eigen::Index c = 0; c < keep; ++c) {
      Eigen::VectorXd col = v.col(c);
      orthogonalize(col, deflate, v, c);
      const double norm = col.norm();
      if (norm < 1e-8) {
        col = random_unit(n, rng, deflate, v, c);
        v.col(c) = col;
        av.col(c) = apply(col);
      } else if (std::abs(norm - 1.0) > 1e-12 || (col - v.col(c)).norm() > 1e-12) {
        v.col(c) = col / norm;
        av.col(c) = apply(v.col(c));
      }
    }
    Eigen::VectorXd w = next.size() ? next : Eigen::VectorXd(random_unit(n, rng, deflate, v, keep));
    orthogonalize(w, deflate, v, keep);
    const double norm = w.norm();
    v.col(keep) = norm > 1e-8 ? Eigen::VectorXd(w / norm) : random_unit(n, rng, deflate, v, keep);
    kept = keep;
  }
}

}  // namespace diffal
