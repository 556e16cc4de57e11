#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "diffal/dataset.hpp"

namespace diffal {

// Every generator draws from Rng (mt19937_64, Box-Muller normals) seeded with
// exactly the given seed, so output depends only on (seed, params).

struct GeneratedData {
  PointCloud cloud;
  LabelVector truth;
};

// Component j contributes sizes[j] points labeled j + 1, in order.
GeneratedData gen_gaussians(const std::vector<std::vector<double>>& means, double stddev,
                            const std::vector<std::size_t>& sizes, std::uint64_t seed);

struct HierarchicalData {
  PointCloud cloud;
  LabelVector truth4;  // one class per Gaussian
  LabelVector truth2;  // bottom pair (y = 0) is 1, top pair (y = 2) is 2
};

// Gaussians at (0,0), (0,2), (1.5,0), (1.5,2), labeled 1..4 in that order.
HierarchicalData gen_hierarchical(std::uint64_t seed, std::size_t per_cluster, double stddev);

struct GeometricParams {
  double annulus_radius = 2.5;
  double annulus_noise = 0.12;  // radial standard deviation
  double blob_stddev = 0.3;     // blob sits at the annulus center
  double strip_y = -4.5;        // horizontal strip below the annulus
  double strip_half_length = 5.0;
  double strip_noise = 0.1;
};

// Classes: 1 annulus, 2 strip, 3 blob. sizes = {annulus, strip, blob}.
GeneratedData gen_geometric(std::uint64_t seed, const std::vector<std::size_t>& sizes,
                            const GeometricParams& params = {});

struct BottleneckParams {
  double blob_offset = 3.0;   // blobs at (-offset, 0) and (offset, 0)
  double blob_stddev = 0.5;
  double bridge_half_length = 2.0;
  double bridge_noise = 0.03;  // vertical standard deviation of chain points
};

// Two blobs joined by a sparse chain on the x axis. sizes = {left, right,
// bridge}; chain points take the class of the nearer blob center (left wins
// exact ties).
GeneratedData gen_bottleneck(std::uint64_t seed, const std::vector<std::size_t>& sizes,
                             const BottleneckParams& params = {});

}  // namespace diffal
