#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>

#include "diffal/dataset.hpp"
#include "diffal/diffusion_graph.hpp"

namespace diffal {

struct CachedGraph {
  NeighborLists neighbors;
  double sigma = 0.0;
  SpectralDecomposition spectrum;
};

// Content hash of the points and the graph parameters that determine the
// neighbor lists and the spectrum.
// `width` is the stored neighbor list width (at least k); sigma is the
// requested bandwidth, 0 when it is derived from the data.
std::uint64_t graph_cache_key(const PointCloud& cloud, std::size_t k, std::size_t width, double sigma,
                              std::size_t num_eigs);

std::filesystem::path graph_cache_file(const std::filesystem::path& dir, std::uint64_t key);

// Binary little-endian format with a magic/version header and the key.
void save_cached_graph(const std::filesystem::path& path, std::uint64_t key, const CachedGraph& graph);

// Empty when the file is missing, stale (different key or version) or
// truncated.
std::optional<CachedGraph> load_cached_graph(const std::filesystem::path& path, std::uint64_t key);

}  // namespace diffal
