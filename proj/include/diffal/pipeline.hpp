#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include "diffal/dataset.hpp"
#include "diffal/diffusion_geometry.hpp"
#include "diffal/diffusion_graph.hpp"

namespace diffal {

// Unset values fall back to the data-driven defaults: k = max(20, ceil(log2 n))
// capped at n - 1, sigma = mean k-th neighbor distance, sigma0 = sigma,
// k_density = k and M = min(25, n).
struct GraphParams {
  std::optional<std::size_t> k;
  std::optional<double> sigma;
  std::optional<double> sigma0;
  std::optional<std::size_t> k_density;
  std::optional<std::size_t> num_eigs;
  SpectralOptions spectral{};
};

// Everything that does not depend on the diffusion time.
struct Graph {
  NeighborLists neighbors;
  double sigma = 0.0;
  SpectralDecomposition spectrum;
  DensityEstimate density;
};

Graph build_graph(const PointCloud& cloud, const GraphParams& params);

// Same as build_graph, but reuses the neighbor lists and spectrum stored in
// `cache_dir` when the key (points, k, sigma, M) matches.
Graph build_graph_cached(const PointCloud& cloud, const GraphParams& params,
                         const std::filesystem::path& cache_dir);

struct Analysis {
  DiffusionEmbedding embedding;
  ModeScores scores;
};

Analysis analyze(const Graph& graph, double t);

}  // namespace diffal
