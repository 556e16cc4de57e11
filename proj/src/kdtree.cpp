#include "diffal/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace diffal {

KdTree::KdTree(const RowMatrix& points, std::size_t leaf_size)
    : points_(&points), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  order_.resize(size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  nodes_.reserve(2 * size() / leaf_size_ + 2);
  if (size() > 0) build(0, size());
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end});
  const std::size_t D = dim();
  lo_.resize((id + 1) * D, std::numeric_limits<double>::infinity());
  hi_.resize((id + 1) * D, -std::numeric_limits<double>::infinity());
  for (std::size_t i = begin; i < end; ++i) {
    const auto p = row(order_[i]);
    for (std::size_t d = 0; d < D; ++d) {
      lo_[id * D + d] = std::min(lo_[id * D + d], p[d]);
      hi_[id * D + d] = std::max(hi_[id * D + d], p[d]);
    }
  }
  if (end - begin <= leaf_size_) return id;

  std::size_t split_dim = 0;
  double widest = -1.0;
  for (std::size_t d = 0; d < D; ++d) {
    const double w = hi_[id * D + d] - lo_[id * D + d];
    if (w > widest) { widest = w; split_dim = d; }
  }
  if (widest <= 0.0) return id;  // all points coincide

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) {
                     const double va = (*points_)(a, split_dim);
                     const double vb = (*points_)(b, split_dim);
                     return va < vb || (va == vb && a < b);
                   });
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<Neighbor> KdTree::knn(std::span<const double> query, std::size_t k,
                                  std::size_t exclude) const {
  std::vector<Neighbor> heap;  // max-heap under `closer`
  if (k == 0 || nodes_.empty()) return heap;
  heap.reserve(k + 1);
  const std::size_t D = dim();

  const auto box_distance = [&](std::size_t node) {
    double s = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
      double gap = 0.0;
      if (query[d] < lo_[node * D + d]) gap = lo_[node * D + d] - query[d];
      else if (query[d] > hi_[node * D + d]) gap = query[d] - hi_[node * D + d];
      s += gap * gap;
    }
    return s;
  };

  struct Frame { std::size_t node; double bound; };
  std::vector<Frame> stack;
  stack.push_back({0, box_distance(0)});
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    // Equal bounds are still explored: a tie may carry a smaller index.
    if (heap.size() == k && f.bound > heap.front().sq_dist) continue;
    const Node& node = nodes_[f.node];
    if (node.left == npos) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order_[i];
        if (idx == exclude) continue;
        const Neighbor cand{idx, squared_distance(query, row(idx))};
        if (heap.size() < k) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end(), closer);
        } else if (closer(cand, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), closer);
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end(), closer);
        }
      }
      continue;
    }
    const double bl = box_distance(node.left);
    const double br = box_distance(node.right);
    // Push the farther child first so the nearer one is visited next.
    if (bl <= br) {
      stack.push_back({node.right, br});
      stack.push_back({node.left, bl});
    } else {
      stack.push_back({node.left, bl});
      stack.push_back({node.right, br});
    }
  }
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

}  // namespace diffal
