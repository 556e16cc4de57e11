#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "diffal/dataset.hpp"
#include "diffal/diffusion_geometry.hpp"

namespace diffal {

// Visits points by decreasing density; each unlabeled point takes the label of
// its D_t-nearest labeled point of higher density. When no such point exists
// (the density maximizer was not seeded) the nearest labeled point of any
// density is used instead and a warning is emitted.
//
// `nearest_higher`, when given, must be the rho() output for the same inputs;
// it lets the propagation run in O(n) because every higher-density point is
// already labeled by the time a point is visited.
LabelVector propagate_labels(const LabelVector& seeds, const DensityEstimate& density,
                             const DiffusionEmbedding& emb,
                             std::span<const std::size_t> nearest_higher = {});

struct KhatOptions {
  // Ratio search runs over i <= ceil(n * search_fraction). n <= 2 searches
  // everything, including the final ratio against an implicit zero.
  double search_fraction = 0.5;
  // Scores are clamped from below at resolution * (largest score) before
  // taking ratios. 0 disables the clamp.
  double resolution = 1e-10;
};

// argmax_i score(m_i) / score(m_{i+1}) with ties to the smaller i. Throws
// NumericalError when every score is zero. With the clamp disabled, a zero
// denominator after a positive numerator counts as an infinite ratio.
std::size_t estimate_num_clusters(const ModeScores& scores, const KhatOptions& options = {});

struct ClusteringResult {
  std::size_t num_clusters = 0;
  LabelVector labels;
  std::vector<std::size_t> mode_indices;
};

ClusteringResult lund(const ModeScores& scores, const DensityEstimate& density,
                      const DiffusionEmbedding& emb, const KhatOptions& options = {});
ClusteringResult lund_k(const ModeScores& scores, const DensityEstimate& density,
                        const DiffusionEmbedding& emb, std::size_t num_clusters);

struct SeparationDiagnostics {
  double d_in = 0.0;                         // max within-class D_t
  double d_btw = 0.0;                        // min between-class D_t
  std::vector<std::size_t> class_maximizers; // one per class, ascending class id
  double max_mode_density = 0.0;
  double min_mode_density = 0.0;
  bool lund_condition_holds = false;         // d_in / d_btw < max / min
  bool land_condition_holds = false;         // d_in < d_btw
  bool sampled = false;
};

struct DiagnosticsOptions {
  std::size_t max_exact_points = 5000;
  std::size_t sample_pairs = 2'000'000;
  std::uint64_t seed = 1;
};

// Exact O(n^2) scan, or random pair sampling above max_exact_points (flagged
// by `sampled`). Throws DataError when truth is incomplete or a class in
// 1..max is empty.
SeparationDiagnostics separation_diagnostics(const DiffusionEmbedding& emb,
                                             const DensityEstimate& density,
                                             const LabelVector& truth,
                                             const DiagnosticsOptions& options = {});

void write_diagnostics_csv(const std::filesystem::path& path, const SeparationDiagnostics& diag);

}  // namespace diffal
