#include "diffal/diffusion_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "diffal/errors.hpp"
#include "diffal/kdtree.hpp"

namespace diffal {

DiffusionEmbedding diffusion_embed(const SpectralDecomposition& spectrum, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("diffusion time t must be >= 0");
  const bool integral = std::floor(t) == t;
  const auto m = spectrum.eigenvalues.size();
  Eigen::VectorXd scale(m);
  for (Eigen::Index l = 0; l < m; ++l) {
    const double lambda = spectrum.eigenvalues[l];
    if (lambda < 0.0 && !integral)
      throw ConfigError("non-integer t requires non-negative retained eigenvalues (lambda_" +
                        std::to_string(l + 1) + " = " + std::to_string(lambda) + ")");
    scale[l] = t == 0.0 ? 1.0 : std::pow(lambda, t);
  }
  DiffusionEmbedding emb;
  emb.t = t;
  emb.coords = spectrum.psi * scale.asDiagonal();
  return emb;
}

double diffusion_distance(const DiffusionEmbedding& emb, std::size_t i, std::size_t j) {
  if (i >= emb.size() || j >= emb.size()) throw ConfigError("diffusion_distance: index out of range");
  return std::sqrt(squared_distance(emb.row(i), emb.row(j)));
}

DensityEstimate kde(const NeighborLists& nb, std::size_t k_density, double sigma0) {
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw ConfigError("kde bandwidth sigma0 must be positive");
  if (k_density < 1 || k_density > nb.k())
    throw ConfigError("kde needs 1 <= k_density <= neighbor list width");
  DensityEstimate d;
  d.k_density = k_density;
  d.sigma0 = sigma0;
  d.p.resize(nb.size());
  const double inv = 1.0 / (sigma0 * sigma0);
  for (std::size_t i = 0; i < nb.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k_density; ++j) {
      const double r = nb.distance(i, j);
      s += std::exp(-r * r * inv);
    }
    d.p[i] = s;
  }
  return d;
}

DensityEstimate kde(const PointCloud& cloud, std::size_t k_density, double sigma0) {
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw ConfigError("kde bandwidth sigma0 must be positive");
  return kde(knn_search(cloud, k_density), k_density, sigma0);
}

std::vector<std::size_t> density_order(const DensityEstimate& density) {
  std::vector<std::size_t> order(density.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return density.higher(a, b); });
  return order;
}

RhoResult rho(const DiffusionEmbedding& emb, const DensityEstimate& density) {
  const std::size_t n = emb.size();
  if (density.size() != n) throw ConfigError("rho: embedding and density sizes differ");
  RhoResult out;
  out.rho.assign(n, 0.0);
  out.nearest_higher.assign(n, 0);
  if (n == 1) return out;

  const KdTree tree(emb.coords);
  const std::size_t start =
      std::min<std::size_t>(n - 1, std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n))))));
  const auto order = density_order(density);
  const std::size_t top = order.front();

  for (std::size_t i = 0; i < n; ++i) {
    if (i == top) continue;
    bool found = false;
    for (std::size_t k = start;; k = std::min(2 * k, n - 1)) {
      const auto nb = tree.knn(emb.row(i), k, i);
      for (const auto& cand : nb) {
        if (density.higher(cand.index, i)) {
          out.rho[i] = std::sqrt(cand.sq_dist);
          out.nearest_higher[i] = cand.index;
          found = true;
          break;
        }
      }
      if (found || k == n - 1) break;
    }
    // Only the maximizer lacks a higher-density point.
    if (!found) throw NumericalError("rho: no higher-density point found for a non-maximizer");
  }

  double far = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (j != top) far = std::max(far, squared_distance(emb.row(top), emb.row(j)));
  out.rho[top] = std::sqrt(far);
  out.nearest_higher[top] = top;
  return out;
}

ModeScores mode_scores(const DensityEstimate& density, std::vector<double> rho_values,
                       std::vector<std::size_t> nearest_higher) {
  const std::size_t n = density.size();
  if (rho_values.size() != n || nearest_higher.size() != n)
    throw ConfigError("mode_scores: input lengths differ");
  ModeScores s;
  s.p = density.p;
  s.rho = std::move(rho_values);
  s.nearest_higher = std::move(nearest_higher);
  s.score.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.score[i] = s.p[i] * s.rho[i];
  s.order.resize(n);
  std::iota(s.order.begin(), s.order.end(), std::size_t{0});
  std::stable_sort(s.order.begin(), s.order.end(),
                   [&](std::size_t a, std::size_t b) { return s.score[a] > s.score[b]; });
  return s;
}

ModeScores mode_scores(const DensityEstimate& density, RhoResult r) {
  return mode_scores(density, std::move(r.rho), std::move(r.nearest_higher));
}

void write_mode_scores_csv(const std::filesystem::path& path, const ModeScores& scores) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "index,p,rho,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i)
    out << i << ',' << scores.p[i] << ',' << scores.rho[i] << ',' << scores.score[i] << '\n';
}

}  // namespace diffal
