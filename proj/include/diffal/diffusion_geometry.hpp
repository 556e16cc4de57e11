#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "diffal/dataset.hpp"
#include "diffal/diffusion_graph.hpp"

namespace diffal {

// Row i is (lambda_l^t psi_l(x_i))_l; Euclidean distance between rows is the
// M-term diffusion distance D_t.
struct DiffusionEmbedding {
  RowMatrix coords;
  double t = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(coords.rows()); }
  std::span<const double> row(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(coords.cols()),
            static_cast<std::size_t>(coords.cols())};
  }
};

// Throws ConfigError for t < 0, or for non-integer t when a retained
// eigenvalue is negative.
DiffusionEmbedding diffusion_embed(const SpectralDecomposition& spectrum, double t);

double diffusion_distance(const DiffusionEmbedding& emb, std::size_t i, std::size_t j);

// Unnormalized kNN Gaussian kernel density,
//   p(x) = sum_{y in NN_k(x)} exp(-|x - y|^2 / sigma0^2).
struct DensityEstimate {
  std::vector<double> p;
  std::size_t k_density = 0;
  double sigma0 = 0.0;

  std::size_t size() const { return p.size(); }
  // True when i ranks strictly above j: higher density, ties to smaller index.
  bool higher(std::size_t i, std::size_t j) const {
    return p[i] > p[j] || (p[i] == p[j] && i < j);
  }
};

DensityEstimate kde(const PointCloud& cloud, std::size_t k_density, double sigma0);
// Same estimate reusing precomputed neighbor lists (needs k_density <= k).
DensityEstimate kde(const NeighborLists& neighbors, std::size_t k_density, double sigma0);

// Point indices sorted by decreasing density, ties by index.
std::vector<std::size_t> density_order(const DensityEstimate& density);

struct RhoResult {
  std::vector<double> rho;
  // Nearest point of higher density in D_t; the density maximizer maps to itself.
  std::vector<std::size_t> nearest_higher;
};

// rho_t(x) = min{ D_t(x, y) : y ranks above x }, or max_y D_t(x, y) for the
// density maximizer. Searches an exact kNN index over the embedding with a
// doubling neighbor count, falling back to a full scan.
RhoResult rho(const DiffusionEmbedding& emb, const DensityEstimate& density);

struct ModeScores {
  std::vector<double> p;
  std::vector<double> rho;
  std::vector<double> score;                 // p * rho
  std::vector<std::size_t> order;            // by decreasing score, ties by index
  std::vector<std::size_t> nearest_higher;

  std::size_t size() const { return score.size(); }
  double sorted_score(std::size_t rank) const { return score[order[rank]]; }
};

ModeScores mode_scores(const DensityEstimate& density, std::vector<double> rho_values,
                       std::vector<std::size_t> nearest_higher);
ModeScores mode_scores(const DensityEstimate& density, RhoResult r);

// CSV with columns index,p,rho,score.
void write_mode_scores_csv(const std::filesystem::path& path, const ModeScores& scores);

}  // namespace diffal
