// Command-line front end: data generation, graph building, LUND/LAND runs,
// t scans, purity curves, experiments and timing.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diffal/baselines.hpp"
#include "diffal/datagen.hpp"
#include "diffal/errors.hpp"
#include "diffal/experiment.hpp"
#include "diffal/land.hpp"
#include "diffal/lund.hpp"
#include "diffal/metrics.hpp"
#include "diffal/pipeline.hpp"

namespace fs = std::filesystem;
using namespace diffal;

namespace {

// Flags shared by every subcommand. Each one overrides the matching config key.
struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::string dataset, points, truth;
  std::string k, sigma, sigma0, num_eigs, t, budget, seed, method;
  std::string out;

  void attach(CLI::App* app, const std::string& out_help) {
    app->add_option("--config", config, "Config file (flat key = value)");
    app->add_option("--set", sets, "Override any config key: key=value (repeatable)");
    app->add_option("--dataset", dataset, "gaussian|hierarchical|geometric|bottleneck|file|hsi");
    app->add_option("--points", points, "Points CSV (or cube file for hsi)");
    app->add_option("--truth", truth, "Ground-truth labels file");
    app->add_option("--k", k, "Neighbors per point");
    app->add_option("--sigma", sigma, "Kernel bandwidth");
    app->add_option("--sigma0", sigma0, "Density bandwidth");
    app->add_option("--num-eigs", num_eigs, "Number of eigenpairs M");
    app->add_option("--t", t, "Diffusion time(s), comma separated");
    app->add_option("--budget", budget, "Query budget(s), comma separated");
    app->add_option("--seed", seed, "Root seed");
    app->add_option("--method", method, "Method(s), comma separated");
    app->add_option("--out", out, out_help);
  }

  Config resolve() const {
    Config c = config.empty() ? Config{} : Config::load(config);
    const auto put = [&](const char* key, const std::string& v) { if (!v.empty()) c.set(key, v); };
    if (!points.empty() && dataset.empty() && !c.has("dataset")) c.set("dataset", "file");
    put("dataset", dataset);
    put("points", points);
    put("truth", truth);
    put("k", k);
    put("sigma", sigma);
    put("sigma0", sigma0);
    put("num_eigs", num_eigs);
    put("t", t);
    put("budgets", budget);
    put("seed", seed);
    put("methods", method);
    put("out", out);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return c;
  }
};

fs::path out_dir(const Config& c, const std::string& fallback) {
  fs::path dir = c.str("out", fallback);
  fs::create_directories(dir);
  return dir;
}

double single_t(const Config& c) {
  const auto times = time_grid(c);
  if (times.size() != 1) throw ConfigError("this command takes exactly one diffusion time");
  return times.front();
}

int cmd_gen_data(const Config& c) {
  Dataset data = load_dataset(c);
  const fs::path dir = out_dir(c, "data");
  save_csv(dir / "points.csv", data.cloud);
  if (data.truth.size() != 0) save_labels(dir / "truth.csv", data.truth);
  if (data.name == "hierarchical") {
    // Both label levels are handy for the ambiguity experiment.
    const auto h = gen_hierarchical(c.count("data_seed", 1), c.count("per_cluster", 500), c.real("stddev", 0.2));
    save_labels(dir / "truth4.csv", h.truth4);
    save_labels(dir / "truth2.csv", h.truth2);
  }
  auto manifest = data.params;
  manifest["n"] = std::to_string(data.cloud.size());
  manifest["dim"] = std::to_string(data.cloud.dim());
  manifest["points_hash"] = content_hash(data.cloud);
  manifest["generator"] = "mt19937_64 seeded with data_seed; normals by Box-Muller";
  write_manifest(dir / "manifest.txt", manifest);
  std::cerr << "wrote " << data.cloud.size() << " points to " << dir << '\n';
  return 0;
}

int cmd_build_graph(const Config& c) {
  const Dataset data = load_dataset(c);
  const fs::path dir = out_dir(c, "graph");
  Config cached = c;
  if (!c.has("cache_dir")) cached.set("cache_dir", dir.string());
  const Graph g = build_graph_for(cached, data.cloud);
  std::ofstream ev(dir / "eigenvalues.csv");
  ev.precision(17);
  ev << "index,eigenvalue\n";
  for (Eigen::Index i = 0; i < g.spectrum.eigenvalues.size(); ++i) ev << i << ',' << g.spectrum.eigenvalues(i) << '\n';
  std::ofstream dens(dir / "density.csv");
  dens.precision(17);
  dens << "index,p\n";
  for (std::size_t i = 0; i < g.density.size(); ++i) dens << i << ',' << g.density.p[i] << '\n';
  std::cout << "n=" << data.cloud.size() << " k=" << g.neighbors.k() << " sigma=" << g.sigma
            << " eigenpairs=" << g.spectrum.order() << " components=" << g.spectrum.num_components << '\n';
  return 0;
}

int cmd_lund(const Config& c) {
  const Dataset data = load_dataset(c);
  const fs::path dir = out_dir(c, "lund");
  const Graph g = build_graph_for(c, data.cloud);
  const Analysis a = analyze(g, single_t(c));
  KhatOptions opts;
  opts.search_fraction = c.real("khat_fraction", opts.search_fraction);
  const ClusteringResult r = lund(a.scores, g.density, a.embedding, opts);
  save_labels(dir / "labels.csv", r.labels);
  write_mode_scores_csv(dir / "mode_scores.csv", a.scores);
  std::cout << "khat=" << r.num_clusters;
  if (data.truth.size() != 0 && data.truth.complete()) {
    const auto aligned = align_labels(r.labels, data.truth);
    std::cout << " OA=" << overall_accuracy(aligned, data.truth) << " purity=" << purity(r.labels, data.truth);
  }
  std::cout << '\n';
  return 0;
}

int cmd_land(const Config& c, bool interactive) {
  const Dataset data = load_dataset(c);
  const auto budgets = c.counts("budgets");
  if (budgets.size() != 1) throw ConfigError("land takes exactly one --budget");
  const std::size_t b = budgets.front();
  const fs::path dir = out_dir(c, "land");
  const Graph g = build_graph_for(c, data.cloud);
  const Analysis a = analyze(g, single_t(c));
  std::optional<ActiveResult> result;
  if (interactive) {
    StreamOracle oracle(std::cin, std::cout, b, &data.cloud);
    result = land(a.scores, g.density, a.embedding, b, oracle);
  } else {
    if (data.truth.size() == 0) throw ConfigError("batch land needs ground truth (--truth) or --interactive");
    GroundTruthOracle oracle(data.truth, b);
    result = land(a.scores, g.density, a.embedding, b, oracle);
  }
  save_labels(dir / "labels.csv", result->labels);
  {
    std::ofstream q(dir / "queries.csv");
    q << "order,index,label\n";
    for (std::size_t i = 0; i < result->queried_indices.size(); ++i)
      q << i << ',' << result->queried_indices[i] << ',' << result->labels[result->queried_indices[i]] << '\n';
  }
  std::ostream& log = interactive ? std::cerr : std::cout;
  log << "queries=" << result->queries_used << " classes_observed=" << result->observed_classes.size();
  if (data.truth.size() != 0 && data.truth.complete())
    log << " OA=" << overall_accuracy(result->labels, data.truth) << " AA=" << average_accuracy(result->labels, data.truth)
        << " kappa=" << cohens_kappa(result->labels, data.truth);
  log << '\n';
  return 0;
}

int cmd_scan_t(const Config& c) {
  const auto rows = scan_t(c);
  const fs::path dir = out_dir(c, "scan");
  write_scan_csv(dir / "scan_t.csv", rows);
  for (const auto& r : rows) std::cout << "log10_t=" << r.log10_t << " khat=" << r.khat << '\n';
  return 0;
}

int cmd_purity(const Config& c, std::size_t max_clusters) {
  const Dataset data = load_dataset(c);
  if (data.truth.size() == 0) throw ConfigError("purity needs ground truth");
  const fs::path dir = out_dir(c, "purity");
  auto methods = c.words("methods");
  if (methods.empty()) methods = {"lund", "average", "single"};
  const fs::path csv = dir / "purity.csv";
  fs::remove(csv);
  std::optional<Graph> g;
  for (const auto& m : methods) {
    std::vector<LabelVector> family;
    if (m == "lund") {
      if (!g) g = build_graph_for(c, data.cloud);
      family = lund_k_family(*g, analyze(*g, single_t(c)), max_clusters);
    } else {
      family = dendrogram_family(linkage(data.cloud, parse_linkage(m)), max_clusters);
    }
    const auto curve = purity_curve(family, data.truth);
    write_purity_csv(csv, curve, m, true);
    std::size_t first = 0;
    for (const auto& p : curve)
      if (p.purity >= 0.99) { first = p.clusters; break; }
    std::cout << m << ": first l with purity >= 0.99 = " << (first ? std::to_string(first) : "none") << '\n';
  }
  return 0;
}

int cmd_experiment(const Config& c) {
  const auto result = run_experiment(c);
  const fs::path dir = out_dir(c, "experiment");
  write_results_csv(dir / "results.csv", result.rows);
  write_manifest(dir / "manifest.txt", result.manifest);
  std::cout << "wrote " << result.rows.size() << " rows to " << (dir / "results.csv") << '\n';
  return 0;
}

int cmd_bench(const Config& c, const std::vector<std::size_t>& sizes, std::size_t repeats) {
  std::cout << "n,run,seconds,OA\n";
  for (std::size_t n : sizes) {
    const std::size_t per = n / 3;
    const auto data = gen_gaussians({{0, 0}, {5, 0}, {0, 5}}, c.real("stddev", 0.2), {per, per, n - 2 * per},
                                    c.count("data_seed", 1));
    const double t = c.has("t") ? single_t(c) : 30.0;
    const std::size_t b = c.counts("budgets").empty() ? 10 : c.counts("budgets").front();
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      const Graph g = build_graph(data.cloud, graph_params(c));
      const Analysis a = analyze(g, t);
      GroundTruthOracle oracle(data.truth, b);
      const auto res = land(a.scores, g.density, a.embedding, b, oracle);
      const std::chrono::duration<double> secs = std::chrono::steady_clock::now() - start;
      std::cout << n << ',' << r << ',' << secs.count() << ',' << overall_accuracy(res.labels, data.truth) << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion-geometry clustering (LUND) and active learning (LAND)"};
  app.require_subcommand(1);

  CommonFlags flags;
  bool interactive = false;
  std::size_t max_clusters = 20, repeats = 5;
  std::vector<std::size_t> bench_sizes{5000, 10000};

  struct Sub {
    CLI::App* app;
    std::string name;
  };
  std::vector<Sub> subs;
  const auto add = [&](const std::string& name, const std::string& help, const std::string& out_help) {
    CLI::App* s = app.add_subcommand(name, help);
    flags.attach(s, out_help);
    subs.push_back({s, name});
    return s;
  };
  add("gen-data", "Generate a synthetic dataset", "Output directory (points.csv, truth.csv, manifest.txt)");
  add("build-graph", "Build the diffusion graph and cache its spectrum", "Output and cache directory");
  add("lund", "Unsupervised clustering with an estimated number of clusters", "Output directory");
  add("land", "Active learning with a ground-truth or interactive oracle", "Output directory")
      ->add_flag("--interactive", interactive, "Ask for labels on stdin ('QUERY <index>' prompts on stdout)");
  add("scan-t", "Estimated cluster count and separation across diffusion times", "Output directory");
  add("purity", "Purity curves for lund_k and dendrogram cuts", "Output directory")
      ->add_option("--max-clusters", max_clusters, "Largest number of clusters");
  add("experiment", "Run a config-driven experiment", "Output directory (results.csv, manifest.txt)");
  auto* bench = add("bench", "Time end-to-end LAND on Gaussian data", "Unused");
  bench->add_option("--sizes", bench_sizes, "Dataset sizes");
  bench->add_option("--repeats", repeats, "Runs per size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ConfigError("").exit_code();
  }

  try {
    const Config c = flags.resolve();
    for (const auto& s : subs) {
      if (!s.app->parsed()) continue;
      if (s.name == "gen-data") return cmd_gen_data(c);
      if (s.name == "build-graph") return cmd_build_graph(c);
      if (s.name == "lund") return cmd_lund(c);
      if (s.name == "land") return cmd_land(c, interactive);
      if (s.name == "scan-t") return cmd_scan_t(c);
      if (s.name == "purity") return cmd_purity(c, max_clusters);
      if (s.name == "experiment") return cmd_experiment(c);
      if (s.name == "bench") return cmd_bench(c, bench_sizes, repeats);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return DataError("").exit_code();
  }
  return 0;
}
