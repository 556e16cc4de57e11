#include "diffal/pipeline.hpp"

#include <algorithm>

#include "diffal/errors.hpp"
#include "diffal/graph_cache.hpp"

namespace diffal {
namespace {

struct Resolved {
  std::size_t k;
  std::size_t k_density;
  std::size_t width;  // neighbors searched per point
  std::size_t num_eigs;
};

Resolved resolve(const PointCloud& cloud, const GraphParams& params) {
  const std::size_t n = cloud.size();
  if (n < 2) throw ConfigError("a diffusion graph needs at least two points");
  Resolved r;
  r.k = params.k.value_or(default_knn(n));
  if (r.k < 1 || r.k >= n) throw ConfigError("k must satisfy 1 <= k < n (k=" + std::to_string(r.k) + ")");
  r.k_density = params.k_density.value_or(r.k);
  if (r.k_density < 1 || r.k_density >= n)
    throw ConfigError("k_density must satisfy 1 <= k_density < n");
  r.width = std::max(r.k, r.k_density);
  r.num_eigs = params.num_eigs.value_or(std::min<std::size_t>(25, n));
  if (r.num_eigs < 1 || r.num_eigs > n) throw ConfigError("number of eigenpairs must lie in [1, n]");
  if (params.sigma && !(*params.sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (params.sigma0 && !(*params.sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
  return r;
}

NeighborLists truncate(const NeighborLists& nb, std::size_t k) {
  if (k == nb.k()) return nb;
  std::vector<std::size_t> idx;
  std::vector<double> dist;
  idx.reserve(nb.size() * k);
  dist.reserve(nb.size() * k);
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) {
      idx.push_back(nb.index(i, j));
      dist.push_back(nb.distance(i, j));
    }
  return NeighborLists(nb.size(), k, std::move(idx), std::move(dist));
}

CachedGraph compute(const PointCloud& cloud, const GraphParams& params, const Resolved& r) {
  CachedGraph g;
  g.neighbors = knn_search(cloud, r.width);
  const NeighborLists graph_nb = truncate(g.neighbors, r.k);
  g.sigma = params.sigma.value_or(default_sigma(graph_nb));
  if (!(g.sigma > 0.0)) throw DataError("kernel bandwidth is zero (duplicate points?); pass sigma explicitly");
  const MarkovChain chain = markov_normalize(kernel_matrix(graph_nb, g.sigma));
  g.spectrum = spectral_decompose(chain, r.num_eigs, params.spectral);
  return g;
}

Graph finish(CachedGraph g, const GraphParams& params, const Resolved& r) {
  Graph out;
  out.sigma = g.sigma;
  out.spectrum = std::move(g.spectrum);
  out.density = kde(g.neighbors, r.k_density, params.sigma0.value_or(g.sigma));
  out.neighbors = truncate(g.neighbors, r.k);
  return out;
}

}  // namespace

Graph build_graph(const PointCloud& cloud, const GraphParams& params) {
  const Resolved r = resolve(cloud, params);
  return finish(compute(cloud, params, r), params, r);
}

Graph build_graph_cached(const PointCloud& cloud, const GraphParams& params,
                         const std::filesystem::path& cache_dir) {
  const Resolved r = resolve(cloud, params);
  const std::uint64_t key =
      graph_cache_key(cloud, r.k, r.width, params.sigma.value_or(0.0), r.num_eigs);
  const auto file = graph_cache_file(cache_dir, key);
  if (auto hit = load_cached_graph(file, key)) return finish(std::move(*hit), params, r);
  CachedGraph g = compute(cloud, params, r);
  save_cached_graph(file, key, g);
  return finish(std::move(g), params, r);
}

Analysis analyze(const Graph& graph, double t) {
  Analysis a{diffusion_embed(graph.spectrum, t), {}};
  a.scores = mode_scores(graph.density, rho(a.embedding, graph.density));
  return a;
}

}  // namespace diffal
