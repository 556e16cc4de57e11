#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "diffal/dataset.hpp"

namespace diffal {

// Squared Euclidean distance, accumulated in dimension order. Every exact
// neighbor search and brute-force check in the library goes through this so
// that tie-breaking comparisons see bit-identical values.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

struct Neighbor {
  std::size_t index;
  double sq_dist;
};

// Strict weak order used for all neighbor rankings: by distance, then index.
inline bool closer(const Neighbor& a, const Neighbor& b) {
  return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.index < b.index);
}

// Exact k-nearest-neighbor index over the rows of a matrix. Results are
// ordered by (squared distance, index), so ties resolve to the smaller index
// regardless of tree shape. The matrix must outlive the tree.
class KdTree {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  explicit KdTree(const RowMatrix& points, std::size_t leaf_size = 12);

  std::size_t size() const { return static_cast<std::size_t>(points_->rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_->cols()); }

  // k nearest rows to `query`, skipping row `exclude` (npos to keep all).
  std::vector<Neighbor> knn(std::span<const double> query, std::size_t k,
                            std::size_t exclude = npos) const;

 private:
  struct Node {
    std::size_t begin, end;        // range in order_
    std::size_t left = npos, right = npos;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  std::span<const double> row(std::size_t i) const {
    return {points_->data() + i * dim(), dim()};
  }

  const RowMatrix* points_;
  std::size_t leaf_size_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::vector<double> lo_, hi_;    // per-node bounding boxes, node * dim + d
};

}  // namespace diffal
