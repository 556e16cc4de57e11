#include "diffal/lund.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "diffal/errors.hpp"
#include "diffal/kdtree.hpp"
#include "diffal/log.hpp"
#include "diffal/random.hpp"

namespace diffal {

LabelVector propagate_labels(const LabelVector& seeds, const DensityEstimate& density,
                             const DiffusionEmbedding& emb,
                             std::span<const std::size_t> nearest_higher) {
  const std::size_t n = seeds.size();
  if (density.size() != n || emb.size() != n)
    throw ConfigError("propagate_labels: seeds, density and embedding sizes differ");
  if (seeds.count_labeled() == 0) throw ConfigError("propagate_labels: no seed labels");
  if (seeds.complete()) return seeds;

  RhoResult computed;
  if (nearest_higher.empty()) {
    computed = rho(emb, density);
    nearest_higher = computed.nearest_higher;
  } else if (nearest_higher.size() != n) {
    throw ConfigError("propagate_labels: nearest_higher has the wrong length");
  }

  LabelVector labels = seeds;
  for (std::size_t x : density_order(density)) {
    if (labels[x] != 0) continue;
    const std::size_t z = nearest_higher[x];
    if (z != x) {
      labels[x] = labels[z];
      continue;
    }
    // Unseeded density maximizer: nearest seed regardless of density.
    Neighbor best{x, std::numeric_limits<double>::infinity()};
    for (std::size_t j = 0; j < n; ++j) {
      if (seeds[j] == 0) continue;
      const Neighbor cand{j, squared_distance(emb.row(x), emb.row(j))};
      if (closer(cand, best)) best = cand;
    }
    labels[x] = seeds[best.index];
    warn("propagation fallback: point " + std::to_string(x) +
         " has no labeled higher-density point; using nearest labeled point " +
         std::to_string(best.index));
  }
  return labels;
}

std::size_t estimate_num_clusters(const ModeScores& scores, const KhatOptions& options) {
  const std::size_t n = scores.size();
  if (n == 0) throw ConfigError("estimate_num_clusters: empty scores");
  if (n == 1) return 1;
  std::size_t limit = n;
  if (n > 2) {
    limit = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * options.search_fraction));
    limit = std::clamp<std::size_t>(limit, 1, n - 1);
  }
  if (!(scores.sorted_score(0) > 0.0))
    throw NumericalError("estimate_num_clusters: all mode scores are zero");

  // Scores below the floor are indistinguishable from rounding noise in the
  // embedding; clamping them stops underflowed tails from producing spikes.
  const double floor = options.resolution * scores.sorted_score(0);
  std::size_t best = 1;
  double best_ratio = -1.0;
  for (std::size_t i = 1; i <= limit; ++i) {
    const double num = std::max(scores.sorted_score(i - 1), floor);
    const double den = std::max(i < n ? scores.sorted_score(i) : 0.0, floor);
    if (den == 0.0) return i;  // only reachable with the floor disabled
    const double ratio = num / den;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = i;
    }
  }
  return best;
}

ClusteringResult lund_k(const ModeScores& scores, const DensityEstimate& density,
                        const DiffusionEmbedding& emb, std::size_t num_clusters) {
  const std::size_t n = scores.size();
  if (num_clusters < 1 || num_clusters > n)
    throw ConfigError("lund_k needs 1 <= K <= n (K=" + std::to_string(num_clusters) + ")");
  LabelVector seeds(n);
  ClusteringResult out;
  out.num_clusters = num_clusters;
  for (std::size_t k = 0; k < num_clusters; ++k) {
    const std::size_t idx = scores.order[k];
    seeds[idx] = static_cast<int>(k + 1);
    out.mode_indices.push_back(idx);
  }
  out.labels = propagate_labels(seeds, density, emb, scores.nearest_higher);
  return out;
}

ClusteringResult lund(const ModeScores& scores, const DensityEstimate& density,
                      const DiffusionEmbedding& emb, const KhatOptions& options) {
  return lund_k(scores, density, emb, estimate_num_clusters(scores, options));
}

SeparationDiagnostics separation_diagnostics(const DiffusionEmbedding& emb,
                                             const DensityEstimate& density,
                                             const LabelVector& truth,
                                             const DiagnosticsOptions& options) {
  const std::size_t n = truth.size();
  if (emb.size() != n || density.size() != n)
    throw ConfigError("separation_diagnostics: input sizes differ");
  if (!truth.complete()) throw DataError("separation_diagnostics: truth must be fully labeled");
  const int num_classes = truth.max_label();

  SeparationDiagnostics diag;
  constexpr auto none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> best(static_cast<std::size_t>(num_classes) + 1, none);
  for (std::size_t i = 0; i < n; ++i) {
    auto& b = best[static_cast<std::size_t>(truth[i])];
    if (b == none || density.higher(i, b)) b = i;
  }
  for (int c = 1; c <= num_classes; ++c) {
    if (best[static_cast<std::size_t>(c)] == none)
      throw DataError("separation_diagnostics: class " + std::to_string(c) + " has no members");
    diag.class_maximizers.push_back(best[static_cast<std::size_t>(c)]);
  }
  diag.max_mode_density = -std::numeric_limits<double>::infinity();
  diag.min_mode_density = std::numeric_limits<double>::infinity();
  for (std::size_t m : diag.class_maximizers) {
    diag.max_mode_density = std::max(diag.max_mode_density, density.p[m]);
    diag.min_mode_density = std::min(diag.min_mode_density, density.p[m]);
  }

  double in_sq = 0.0;
  double btw_sq = std::numeric_limits<double>::infinity();
  const auto visit = [&](std::size_t i, std::size_t j) {
    const double d = squared_distance(emb.row(i), emb.row(j));
    if (truth[i] == truth[j]) in_sq = std::max(in_sq, d);
    else btw_sq = std::min(btw_sq, d);
  };
  if (n <= options.max_exact_points) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
  } else {
    diag.sampled = true;
    Rng rng(options.seed);
    for (std::size_t s = 0; s < options.sample_pairs; ++s) {
      const auto i = static_cast<std::size_t>(rng.below(n));
      const auto j = static_cast<std::size_t>(rng.below(n));
      if (i != j) visit(i, j);
    }
  }
  diag.d_in = std::sqrt(in_sq);
  diag.d_btw = std::sqrt(btw_sq);
  diag.land_condition_holds = diag.d_in < diag.d_btw;
  diag.lund_condition_holds =
      diag.d_in / diag.d_btw < diag.max_mode_density / diag.min_mode_density;
  return diag;
}

void write_diagnostics_csv(const std::filesystem::path& path, const SeparationDiagnostics& d) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "d_in,d_btw,max_mode_density,min_mode_density,lund_condition,land_condition,sampled\n"
      << d.d_in << ',' << d.d_btw << ',' << d.max_mode_density << ',' << d.min_mode_density << ','
      << d.lund_condition_holds << ',' << d.land_condition_holds << ',' << d.sampled << '\n';
}

}  // namespace diffal
