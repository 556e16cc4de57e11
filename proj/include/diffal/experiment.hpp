#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diffal/baselines.hpp"
#include "diffal/dataset.hpp"
#include "diffal/pipeline.hpp"

namespace diffal {

// Flat "key = value" configuration. Blank lines and lines starting with '#'
// are ignored. Only documented keys are accepted (see README); lists are
// comma separated and grids use "start:stop:step".
class Config {
 public:
  Config() = default;
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  // Later values replace earlier ones; unknown keys throw ConfigError.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string str(const std::string& key, const std::string& fallback) const;
  std::optional<std::string> str(const std::string& key) const;
  double real(const std::string& key, double fallback) const;
  std::optional<double> real(const std::string& key) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  std::optional<std::size_t> count(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;        // list or grid
  std::vector<std::size_t> counts(const std::string& key) const;  // list
  std::vector<std::string> words(const std::string& key) const;   // list

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
};

struct Dataset {
  std::string name;
  PointCloud cloud;
  LabelVector truth;  // empty when no ground truth is available
  std::map<std::string, std::string> params;  // resolved generator parameters
};

// dataset = gaussian | hierarchical | geometric | bottleneck | file | hsi
Dataset load_dataset(const Config& config);
// Graph parameters from k, sigma, sigma0, k_density, num_eigs, dense_threshold.
GraphParams graph_params(const Config& config);
// Uses cache_dir when configured.
Graph build_graph_for(const Config& config, const PointCloud& cloud);

// 10^x rounded to the nearest integer (at least 1). Integer times stay valid
// when the retained spectrum has negative eigenvalues.
double grid_time(double log10_t);

// Diffusion times: the "t" list, or grid_time(x) over the "log10_t" grid.
std::vector<double> time_grid(const Config& config);

struct ResultRow {
  std::string dataset;
  std::string method;
  std::string t;       // empty for methods that do not use the diffusion time
  std::size_t budget;  // number of clusters for lund
  std::uint64_t seed;
  double oa;
  double aa;
  double kappa;
};

struct ExperimentOutput {
  std::vector<ResultRow> rows;  // sorted by (method, t, budget, seed)
  std::map<std::string, std::string> manifest;
};

// Methods: land, land_random, cbal (average linkage), cbal_single, lund.
// Randomized methods run `trials` times with seeds derived from the root
// seed per (method, trial); deterministic ones run once.
ExperimentOutput run_experiment(const Config& config);

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
void write_manifest(const std::filesystem::path& path, const std::map<std::string, std::string>& manifest);

struct ScanRow {
  double log10_t;
  double t;
  std::size_t khat;
  // Every mode score is zero: the whole graph has diffused to a single
  // point, so khat is reported as 1.
  bool collapsed = false;
  std::optional<double> d_in;   // when ground truth is available
  std::optional<double> d_btw;
  std::vector<double> top_scores;  // up to ten largest mode scores
};

std::vector<ScanRow> scan_t(const Config& config);
std::vector<ScanRow> scan_t(const Graph& graph, const std::vector<double>& log10_t, const LabelVector& truth);
void write_scan_csv(const std::filesystem::path& path, const std::vector<ScanRow>& rows);

// Clusterings with 1..max_clusters groups for purity curves.
std::vector<LabelVector> lund_k_family(const Graph& graph, const Analysis& analysis, std::size_t max_clusters);
std::vector<LabelVector> dendrogram_family(const Dendrogram& dendrogram, std::size_t max_clusters);

// Hex FNV-1a digests used in manifests.
std::string content_hash(const PointCloud& cloud);
std::string content_hash(const LabelVector& labels);

}  // namespace diffal
