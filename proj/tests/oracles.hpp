#pragma once

// Independent brute-force evaluations used as test oracles.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "diffal/diffusion_geometry.hpp"
#include "diffal/kdtree.hpp"

namespace testing {

// Diffusion distance straight from the definition using explicit powers of P.
inline double explicit_distance(const Eigen::MatrixXd& pt, const Eigen::VectorXd& pi, Eigen::Index i, Eigen::Index j) {
  return std::sqrt(((pt.row(i) - pt.row(j)).array().square() / pi.transpose().array()).sum());
}

// O(n^2) evaluation of rho with the same tie rules as the library.
inline diffal::RhoResult brute_rho(const diffal::DiffusionEmbedding& emb, const diffal::DensityEstimate& dens) {
  const std::size_t n = emb.size();
  diffal::RhoResult r;
  r.rho.assign(n, 0.0);
  r.nearest_higher.assign(n, 0);
  std::size_t top = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (dens.higher(i, top)) top = i;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == top) {
      double far = 0.0;
      for (std::size_t j = 0; j < n; ++j) far = std::max(far, diffal::squared_distance(emb.row(i), emb.row(j)));
      r.rho[i] = std::sqrt(far);
      r.nearest_higher[i] = i;
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = i;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !dens.higher(j, i)) continue;
      const double d = diffal::squared_distance(emb.row(i), emb.row(j));
      if (d < best) { best = d; arg = j; }  // strict: the smaller index wins ties
    }
    r.rho[i] = std::sqrt(best);
    r.nearest_higher[i] = arg;
  }
  return r;
}


}  // namespace testing
