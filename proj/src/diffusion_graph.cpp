#include "diffal/diffusion_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "diffal/errors.hpp"
#include "diffal/kdtree.hpp"
#include "diffal/log.hpp"

namespace diffal {

NeighborLists::NeighborLists(std::size_t n, std::size_t k, std::vector<std::size_t> indices,
                             std::vector<double> distances)
    : n_(n), k_(k), indices_(std::move(indices)), distances_(std::move(distances)) {
  if (indices_.size() != n * k || distances_.size() != n * k)
    throw DataError("neighbor list arrays do not match n * k");
}

NeighborLists knn_search(const PointCloud& cloud, std::size_t k) {
  const std::size_t n = cloud.size();
  if (k < 1 || k >= n)
    throw ConfigError("knn_search needs 1 <= k < n (k=" + std::to_string(k) +
                      ", n=" + std::to_string(n) + ")");
  const KdTree tree(cloud.points());
  std::vector<std::size_t> indices(n * k);
  std::vector<double> distances(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = tree.knn(cloud.point(i), k, i);
    for (std::size_t j = 0; j < k; ++j) {
      indices[i * k + j] = nb[j].index;
      distances[i * k + j] = std::sqrt(nb[j].sq_dist);
    }
  }
  return NeighborLists(n, k, std::move(indices), std::move(distances));
}

SparseKernelMatrix kernel_matrix(const NeighborLists& nb, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw ConfigError("kernel bandwidth sigma must be positive");
  const std::size_t n = nb.size();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * n * nb.k() + n);
  const double inv = 1.0 / (sigma * sigma);
  for (std::size_t i = 0; i < n; ++i) {
    triplets.emplace_back(i, i, 1.0);
    for (std::size_t j = 0; j < nb.k(); ++j) {
      const std::size_t other = nb.index(i, j);
      const double d = nb.distance(i, j);
      const double w = std::exp(-d * d * inv);
      triplets.emplace_back(i, other, w);
      triplets.emplace_back(other, i, w);
    }
  }
  SparseKernelMatrix out;
  out.sigma = sigma;
  out.weights.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  out.weights.setFromTriplets(triplets.begin(), triplets.end(),
                              [](double a, double b) { return std::max(a, b); });
  out.weights.makeCompressed();
  return out;
}

MarkovChain markov_normalize(const SparseKernelMatrix& w) {
  MarkovChain mc;
  mc.kernel = w.weights;
  const Eigen::Index n = w.weights.rows();
  mc.degrees.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = 0.0;
    for (SparseMatrix::InnerIterator it(w.weights, i); it; ++it) d += it.value();
    if (!(d > 0.0))
      throw NumericalError("zero-degree vertex at index " + std::to_string(i));
    mc.degrees[i] = d;
  }
  mc.stationary = mc.degrees / mc.degrees.sum();
  mc.transition = w.weights;
  for (Eigen::Index i = 0; i < n; ++i)
    for (SparseMatrix::InnerIterator it(mc.transition, i); it; ++it)
      it.valueRef() /= mc.degrees[i];
  return mc;
}

std::vector<std::size_t> connected_components(const SparseMatrix& w, std::size_t* count) {
  const auto n = static_cast<std::size_t>(w.rows());
  constexpr auto unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(n, unset);
  std::vector<std::size_t> stack;
  std::size_t next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] != unset) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (SparseMatrix::InnerIterator it(w, static_cast<Eigen::Index>(u)); it; ++it) {
        const auto v = static_cast<std::size_t>(it.col());
        if (it.value() > 0.0 && comp[v] == unset) {
          comp[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return comp;
}

namespace {

struct Eigenpair {
  double value;
  std::size_t component;
  std::size_t rank;                   // position within the component
  Eigen::VectorXd phi;                // over the component's vertices
};

using ColSparse = Eigen::SparseMatrix<double>;

// Exposes the factor size known after the symbolic pass.
class SizedLdlt : public Eigen::SimplicialLDLT<ColSparse> {
 public:
  Eigen::Index predicted_nonzeros() const { return m_nonZerosPerCol.sum(); }
};

// Top `nev` eigenpairs of S below the Perron pair through shift-invert, or
// nullopt when the factorization is too dense or the result cannot be
// trusted to be the largest in magnitude.
std::optional<EigenPairs> shift_invert_pairs(const SparseMatrix& s, const Eigen::VectorXd& perron,
                                             const LanczosOptions& lo, const SpectralOptions& options) {
  const std::size_t nev = lo.nev;
  const Eigen::Index n = s.rows();
  ColSparse a(n, n);
  a.setIdentity();
  a = (1.0 + options.shift) * a - ColSparse(s);
  SizedLdlt ldlt;
  ldlt.analyzePattern(a);
  if (static_cast<double>(ldlt.predicted_nonzeros()) > options.max_fill * static_cast<double>(a.nonZeros()))
    return std::nullopt;
  ldlt.factorize(a);
  if (ldlt.info() != Eigen::Success) return std::nullopt;

  // A residual r on the inverse maps to about 2 r / mu on S, so a relative
  // bound carries the requested absolute accuracy over.
  LanczosOptions inner = lo;
  inner.tol = 0.5 * lo.tol;
  inner.relative = true;
  inner.max_restarts = std::min<std::size_t>(lo.max_restarts, 200);
  const LinearOperator inverse = [&ldlt](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = ldlt.solve(x); };
  EigenPairs inv;
  try {
    inv = lanczos_largest_magnitude(inverse, n, inner, perron);
  } catch (const NumericalError&) {
    return std::nullopt;
  }

  // Rayleigh-Ritz in S itself for the eigenvalues and honest residuals.
  const Eigen::MatrixXd sy = s * inv.vectors;
  Eigen::MatrixXd h = inv.vectors.transpose() * sy;
  h = 0.5 * (h + h.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(h);
  std::vector<Eigen::Index> order(nev);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return std::abs(small.eigenvalues()[x]) > std::abs(small.eigenvalues()[y]);
  });
  EigenPairs out;
  out.values.resize(static_cast<Eigen::Index>(nev));
  out.vectors.resize(n, static_cast<Eigen::Index>(nev));
  out.residuals.resize(static_cast<Eigen::Index>(nev));
  for (std::size_t c = 0; c < nev; ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    const Eigen::VectorXd coeff = small.eigenvectors().col(order[c]);
    out.values[col] = small.eigenvalues()[order[c]];
    out.vectors.col(col) = inv.vectors * coeff;
    out.residuals[col] = (sy * coeff - out.values[col] * out.vectors.col(col)).norm();
  }
  if (out.residuals.maxCoeff() > lo.tol) return std::nullopt;
  out.restarts = inv.restarts;
  out.matvecs = inv.matvecs;

  // The inverse only finds the top of the spectrum; make sure nothing at the
  // bottom is larger in magnitude than the smallest value returned.
  const double smallest = out.values.cwiseAbs().minCoeff();
  ColSparse flip(n, n);
  flip.setIdentity();
  flip -= ColSparse(s);
  LanczosOptions bottom = lo;
  bottom.nev = 1;
  bottom.ncv = 20;
  bottom.tol = 1e-8;
  const LinearOperator flipped = [&flip](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = flip * x; };
  bottom.max_restarts = 200;
  EigenPairs low;
  try {
    low = lanczos_largest_magnitude(flipped, n, bottom);
  } catch (const NumericalError&) {
    return std::nullopt;
  }
  const double lambda_min = 1.0 - low.values[0];
  if (lambda_min - low.residuals[0] <= -smallest) return std::nullopt;
  return out;
}

}  // namespace

SpectralDecomposition spectral_decompose(const MarkovChain& chain, std::size_t num_eigs,
                                         const SpectralOptions& options) {
  const std::size_t n = chain.size();
  if (num_eigs < 1 || num_eigs > n)
    throw ConfigError("spectral_decompose needs 1 <= M <= n (M=" + std::to_string(num_eigs) +
                      ", n=" + std::to_string(n) + ")");

  std::size_t num_comp = 0;
  const auto comp = connected_components(chain.kernel, &num_comp);
  if (num_comp > 1)
    warn("diffusion graph is disconnected: " + std::to_string(num_comp) +
         " connected components, eigenvalue 1 has multiplicity " + std::to_string(num_comp));

  std::vector<std::vector<std::size_t>> members(num_comp);
  for (std::size_t i = 0; i < n; ++i) members[comp[i]].push_back(i);
  std::vector<std::size_t> local(n);
  for (const auto& m : members)
    for (std::size_t j = 0; j < m.size(); ++j) local[m[j]] = j;

  const double total_degree = chain.degrees.sum();
  std::vector<Eigenpair> pairs;
  for (std::size_t c = 0; c < num_comp; ++c) {
    const auto& idx = members[c];
    const auto nc = static_cast<Eigen::Index>(idx.size());
    // Perron vector of the component, known in closed form.
    Eigen::VectorXd perron(nc);
    for (Eigen::Index j = 0; j < nc; ++j) perron[j] = std::sqrt(chain.degrees[idx[j]]);
    perron.normalize();
    pairs.push_back({1.0, c, 0, perron});

    const std::size_t more = std::min(num_eigs, idx.size()) - 1;
    if (more == 0) continue;

    // Symmetric conjugate restricted to the component.
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto row = static_cast<Eigen::Index>(idx[j]);
      const double si = std::sqrt(chain.degrees[row]);
      for (SparseMatrix::InnerIterator it(chain.kernel, row); it; ++it) {
        const double sj = std::sqrt(chain.degrees[it.col()]);
        triplets.emplace_back(j, local[static_cast<std::size_t>(it.col())], it.value() / (si * sj));
      }
    }
    SparseMatrix s(nc, nc);
    s.setFromTriplets(triplets.begin(), triplets.end());

    const std::size_t ncv = options.lanczos.ncv ? options.lanczos.ncv : std::max<std::size_t>(2 * more + 20, 40);
    if (idx.size() <= options.dense_threshold || ncv + 1 >= idx.size()) {
      Eigen::MatrixXd dense = Eigen::MatrixXd(s);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
      // Drop the column that is the Perron vector.
      const Eigen::VectorXd overlap = (solver.eigenvectors().transpose() * perron).cwiseAbs();
      Eigen::Index perron_col = 0;
      overlap.maxCoeff(&perron_col);
      std::vector<Eigen::Index> cols;
      for (Eigen::Index j = 0; j < nc; ++j)
        if (j != perron_col) cols.push_back(j);
      const auto& vals = solver.eigenvalues();
      std::stable_sort(cols.begin(), cols.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(vals[a]) > std::abs(vals[b]);
      });
      for (std::size_t r = 0; r < more; ++r)
        pairs.push_back({vals[cols[r]], c, r + 1, solver.eigenvectors().col(cols[r])});
    } else {
      LanczosOptions lo = options.lanczos;
      lo.nev = more;
      lo.seed = options.lanczos.seed + c;
      std::optional<EigenPairs> fast;
      if (options.shift_invert) fast = shift_invert_pairs(s, perron, lo, options);
      const EigenPairs ep = fast ? std::move(*fast) : lanczos_largest_magnitude(s, lo, perron);
      for (std::size_t r = 0; r < more; ++r)
        pairs.push_back({ep.values[static_cast<Eigen::Index>(r)], c, r + 1,
                         ep.vectors.col(static_cast<Eigen::Index>(r))});
    }
  }

  std::stable_sort(pairs.begin(), pairs.end(), [](const Eigenpair& a, const Eigenpair& b) {
    const double ma = std::abs(a.value), mb = std::abs(b.value);
    if (ma != mb) return ma > mb;
    if (a.value != b.value) return a.value > b.value;
    if (a.component != b.component) return a.component < b.component;
    return a.rank < b.rank;
  });
  std::size_t keep = std::min(num_eigs, pairs.size());
  while (keep > 1 && std::abs(pairs[keep - 1].value) < options.truncation_tol) --keep;

  SpectralDecomposition out;
  out.num_components = num_comp;
  out.stationary = chain.stationary;
  out.eigenvalues.resize(static_cast<Eigen::Index>(keep));
  out.psi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(keep));
  for (std::size_t l = 0; l < keep; ++l) {
    const auto& p = pairs[l];
    const auto col = static_cast<Eigen::Index>(l);
    out.eigenvalues[col] = p.value;
    const auto& idx = members[p.component];
    if (p.rank == 0) {
      // psi is exactly constant on the component: sqrt(total / component degree).
      double comp_degree = 0.0;
      for (std::size_t i : idx) comp_degree += chain.degrees[static_cast<Eigen::Index>(i)];
      const double value = std::sqrt(total_degree / comp_degree);
      for (std::size_t i : idx) out.psi(static_cast<Eigen::Index>(i), col) = value;
      continue;
    }
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto i = static_cast<Eigen::Index>(idx[j]);
      out.psi(i, col) = p.phi[static_cast<Eigen::Index>(j)] / std::sqrt(chain.stationary[i]);
    }
    Eigen::Index arg = 0;
    out.psi.col(col).cwiseAbs().maxCoeff(&arg);
    if (out.psi(arg, col) < 0.0) out.psi.col(col) *= -1.0;
  }
  return out;
}

std::size_t default_knn(std::size_t n) {
  const auto log_n = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n, 2)))));
  return std::min(std::max<std::size_t>(20, log_n), n - 1);
}

double default_sigma(const NeighborLists& nb) {
  if (nb.size() == 0 || nb.k() == 0) throw ConfigError("empty neighbor lists");
  double sum = 0.0;
  for (std::size_t i = 0; i < nb.size(); ++i) sum += nb.distance(i, nb.k() - 1);
  return sum / static_cast<double>(nb.size());
}

}  // namespace diffal
