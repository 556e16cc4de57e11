#include "diffal/datagen.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "diffal/errors.hpp"
#include "diffal/random.hpp"

namespace diffal {
namespace {

std::size_t total(const std::vector<std::size_t>& sizes) {
  std::size_t n = 0;
  for (std::size_t s : sizes) {
    if (s == 0) throw ConfigError("generator class sizes must be positive");
    n += s;
  }
  return n;
}

void expect_classes(const std::vector<std::size_t>& sizes, std::size_t want, const char* what) {
  if (sizes.size() != want)
    throw ConfigError(std::string(what) + " needs " + std::to_string(want) + " class sizes, got " +
                      std::to_string(sizes.size()));
}

}  // namespace

GeneratedData gen_gaussians(const std::vector<std::vector<double>>& means, double stddev,
                            const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  if (means.empty()) throw ConfigError("gen_gaussians needs at least one mean");
  if (means.size() != sizes.size()) throw ConfigError("gen_gaussians: one size per mean required");
  if (!(stddev > 0.0)) throw ConfigError("gen_gaussians: stddev must be positive");
  const std::size_t dim = means[0].size();
  if (dim == 0) throw ConfigError("gen_gaussians: means must have at least one coordinate");
  for (const auto& m : means)
    if (m.size() != dim) throw ConfigError("gen_gaussians: means have mismatched dimensions");

  const std::size_t n = total(sizes);
  Rng rng(seed);
  RowMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  LabelVector truth(n);
  std::size_t row = 0;
  for (std::size_t c = 0; c < means.size(); ++c) {
    for (std::size_t s = 0; s < sizes[c]; ++s, ++row) {
      for (std::size_t d = 0; d < dim; ++d)
        x(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(d)) = means[c][d] + stddev * rng.normal();
      truth[row] = static_cast<int>(c + 1);
    }
  }
  return {PointCloud(std::move(x)), std::move(truth)};
}

HierarchicalData gen_hierarchical(std::uint64_t seed, std::size_t per_cluster, double stddev) {
  if (per_cluster < 10) throw ConfigError("gen_hierarchical needs per_cluster >= 10");
  const std::vector<std::vector<double>> means{{0.0, 0.0}, {0.0, 2.0}, {1.5, 0.0}, {1.5, 2.0}};
  auto data = gen_gaussians(means, stddev, std::vector<std::size_t>(4, per_cluster), seed);
  LabelVector truth2(data.truth.size());
  for (std::size_t i = 0; i < truth2.size(); ++i) truth2[i] = (data.truth[i] % 2 == 1) ? 1 : 2;
  return {std::move(data.cloud), std::move(data.truth), std::move(truth2)};
}

GeneratedData gen_geometric(std::uint64_t seed, const std::vector<std::size_t>& sizes,
                            const GeometricParams& p) {
  expect_classes(sizes, 3, "gen_geometric");
  const std::size_t n = total(sizes);
  Rng rng(seed);
  RowMatrix x(static_cast<Eigen::Index>(n), 2);
  LabelVector truth(n);
  Eigen::Index row = 0;
  for (std::size_t s = 0; s < sizes[0]; ++s, ++row) {
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double r = p.annulus_radius + p.annulus_noise * rng.normal();
    x(row, 0) = r * std::cos(angle);
    x(row, 1) = r * std::sin(angle);
    truth[static_cast<std::size_t>(row)] = 1;
  }
  for (std::size_t s = 0; s < sizes[1]; ++s, ++row) {
    x(row, 0) = rng.uniform(-p.strip_half_length, p.strip_half_length);
    x(row, 1) = p.strip_y + p.strip_noise * rng.normal();
    truth[static_cast<std::size_t>(row)] = 2;
  }
  for (std::size_t s = 0; s < sizes[2]; ++s, ++row) {
    x(row, 0) = p.blob_stddev * rng.normal();
    x(row, 1) = p.blob_stddev * rng.normal();
    truth[static_cast<std::size_t>(row)] = 3;
  }
  return {PointCloud(std::move(x)), std::move(truth)};
}

GeneratedData gen_bottleneck(std::uint64_t seed, const std::vector<std::size_t>& sizes,
                             const BottleneckParams& p) {
  expect_classes(sizes, 3, "gen_bottleneck");
  const std::size_t n = total(sizes);
  Rng rng(seed);
  RowMatrix x(static_cast<Eigen::Index>(n), 2);
  LabelVector truth(n);
  Eigen::Index row = 0;
  for (int side = 0; side < 2; ++side) {
    const double cx = side == 0 ? -p.blob_offset : p.blob_offset;
    for (std::size_t s = 0; s < sizes[static_cast<std::size_t>(side)]; ++s, ++row) {
      x(row, 0) = cx + p.blob_stddev * rng.normal();
      x(row, 1) = p.blob_stddev * rng.normal();
      truth[static_cast<std::size_t>(row)] = side + 1;
    }
  }
  for (std::size_t s = 0; s < sizes[2]; ++s, ++row) {
    const double bx = rng.uniform(-p.bridge_half_length, p.bridge_half_length);
    x(row, 0) = bx;
    x(row, 1) = p.bridge_noise * rng.normal();
    truth[static_cast<std::size_t>(row)] = bx <= 0.0 ? 1 : 2;
  }
  return {PointCloud(std::move(x)), std::move(truth)};
}

}  // namespace diffal
