#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "diffal/dataset.hpp"
#include "diffal/diffusion_geometry.hpp"
#include "diffal/land.hpp"

namespace diffal {

enum class Linkage { Single, Average };

Linkage parse_linkage(const std::string& name);
std::string to_string(Linkage l);

// Agglomerative merge tree. Leaves are nodes 0..n-1; merge i creates node n+i.
struct Dendrogram {
  struct Merge {
    std::size_t left;    // smaller node id
    std::size_t right;
    double height;
    std::size_t size;    // leaves under the new node
  };

  std::size_t leaves = 0;
  std::vector<Merge> merges;

  std::size_t root() const { return leaves + merges.size() - 1; }
  bool is_leaf(std::size_t node) const { return node < leaves; }
  // Leaf indices below `node`, ascending.
  std::vector<std::size_t> members(std::size_t node) const;
};

// Euclidean agglomerative clustering. Single linkage goes through a minimum
// spanning tree, average linkage through the nearest-neighbor chain; both are
// O(n^2) time. Equal heights merge in order of the smaller member index.
Dendrogram linkage(const PointCloud& cloud, Linkage method);

// Partition with exactly `clusters` groups obtained by undoing the last
// clusters - 1 merges. Cluster ids are 1.. in order of smallest member.
LabelVector cut(const Dendrogram& dendrogram, std::size_t clusters);

// CSV rows "left,right,height".
void write_dendrogram_csv(const std::filesystem::path& path, const Dendrogram& dendrogram);

// LAND with B query points drawn uniformly without replacement.
ActiveResult land_random(const DensityEstimate& density, const DiffusionEmbedding& emb,
                         std::size_t budget, Oracle& oracle, std::uint64_t seed);

struct CbalParams {
  double purity_threshold = 0.9;
  std::size_t per_node = 3;
  std::uint64_t seed = 0;
};

// Cluster-based active learning over a dendrogram. Keeps a pruning of the
// tree starting at the root; repeatedly samples up to `per_node` unqueried
// points from the pruning node with the most unqueried points, freezing it
// when its queried majority reaches the threshold (or it is a leaf) and
// splitting it otherwise. Unfrozen nodes take the majority of their queries,
// or of their nearest queried ancestor.
ActiveResult cbal(const Dendrogram& dendrogram, std::size_t budget, Oracle& oracle,
                  const CbalParams& params = {});

}  // namespace diffal
