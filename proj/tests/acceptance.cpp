// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "diffal/baselines.hpp"
#include "diffal/datagen.hpp"
#include "diffal/dataset.hpp"
#include "diffal/diffusion_geometry.hpp"
#include "diffal/diffusion_graph.hpp"
#include "diffal/errors.hpp"
#include "diffal/experiment.hpp"
#include "diffal/land.hpp"
#include "diffal/log.hpp"
#include "diffal/lund.hpp"
#include "diffal/metrics.hpp"
#include "diffal/pipeline.hpp"
#include "diffal/random.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace diffal;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

Config load_config(const std::string& name) {
  return Config::load(std::filesystem::path(DIFFAL_CONFIGS) / name);
}

double land_oa(const Graph& g, const Analysis& a, const LabelVector& truth, std::size_t budget) {
  GroundTruthOracle oracle(truth, budget);
  return overall_accuracy(land(a.scores, g.density, a.embedding, budget, oracle).labels, truth);
}

std::vector<double> default_scan_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 16; ++i) grid.push_back(0.5 * i);
  return grid;
}

// Smallest number of clusters reaching the purity threshold, or 0 if none.
std::size_t first_pure(const std::vector<PurityPoint>& curve, double threshold) {
  for (const auto& p : curve)
    if (p.purity >= threshold) return p.clusters;
  return 0;
}

// ---------------------------------------------------------------------------

Outcome perfect_accuracy_theorem() {
  const double sd = 1.0;
  std::size_t qualifying = 0, datasets_without = 0, failures = 0;
  double slowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto start = Clock::now();
    Rng rng(derive_seed(seed, "centers", 0));
    std::vector<std::vector<double>> centers;
    while (centers.size() < 3) {
      std::vector<double> c{rng.uniform(0, 40), rng.uniform(0, 40)};
      const bool far = std::all_of(centers.begin(), centers.end(), [&](const auto& o) {
        return std::hypot(c[0] - o[0], c[1] - o[1]) >= 10 * sd;
      });
      if (far) centers.push_back(c);
    }
    const auto data = gen_gaussians(centers, sd, {200, 200, 200}, seed);
    const Graph g = build_graph(data.cloud, {});
    std::size_t here = 0;
    for (double x : default_scan_grid()) {
      const Analysis a = analyze(g, grid_time(x));
      const auto diag = separation_diagnostics(a.embedding, g.density, data.truth);
      if (!diag.land_condition_holds) continue;
      const std::vector<std::size_t> top(a.scores.order.begin(), a.scores.order.begin() + 3);
      const bool modes_on_top = std::all_of(diag.class_maximizers.begin(), diag.class_maximizers.end(),
                                            [&](std::size_t m) { return std::find(top.begin(), top.end(), m) != top.end(); });
      if (!modes_on_top) continue;
      ++here;
      if (land_oa(g, a, data.truth, 3) != 1.0) ++failures;
    }
    qualifying += here;
    if (here == 0) ++datasets_without;
    slowest = std::max(slowest, seconds_since(start));
  }
  return {failures == 0 && datasets_without == 0 && slowest < 10.0,
          std::to_string(qualifying) + " qualifying (dataset, t) pairs, " + std::to_string(failures) +
              " with OA < 1, " + std::to_string(datasets_without) + " datasets without a qualifying t, slowest " +
              fmt(slowest, 3) + " s"};
}

Outcome spectral_oracle() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t n = 40 + 6 * seed;
    const auto cloud = testing::random_cloud(n, 2 + seed % 3, seed);
    const auto nb = knn_search(cloud, n - 1);
    const auto chain = markov_normalize(kernel_matrix(nb, default_sigma(nb)));
    SpectralOptions opts;
    opts.truncation_tol = 0.0;
    const auto spectrum = spectral_decompose(chain, n, opts);
    if (spectrum.order() != n) return {false, "decomposition kept " + std::to_string(spectrum.order()) + " of " + std::to_string(n)};
    const Eigen::MatrixXd p(chain.transition);
    for (int t : {1, 2, 5}) {
      Eigen::MatrixXd pt = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (int s = 0; s < t; ++s) pt = pt * p;
      const auto emb = diffusion_embed(spectrum, t);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double want = testing::explicit_distance(pt, chain.stationary, static_cast<Eigen::Index>(i),
                                                          static_cast<Eigen::Index>(j));
          const double got = diffusion_distance(emb, i, j);
          worst = std::max(worst, std::abs(got - want) / want);
        }
    }
  }
  return {worst <= 1e-8, "max relative error " + fmt(worst, 3) + " over 10 graphs, t in {1, 2, 5}"};
}

Outcome rho_oracle() {
  std::size_t mismatches = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t n = 50 + 22 * seed;
    auto cloud = testing::random_cloud(n, 2 + seed % 3, 100 + seed);
    if (seed % 2 == 0) {
      // Snap to a coarse grid so densities and distances tie.
      RowMatrix snapped = (cloud.points() * 2.0).array().round() / 2.0;
      cloud = PointCloud(std::move(snapped));
    }
    const Graph g = build_graph(cloud, {});
    const double t = std::pow(10.0, static_cast<double>(seed % 4));
    const auto emb = diffusion_embed(g.spectrum, t);
    const auto fast = rho(emb, g.density);
    const auto slow = testing::brute_rho(emb, g.density);
    total += n;
    for (std::size_t i = 0; i < n; ++i)
      if (fast.rho[i] != slow.rho[i] || fast.nearest_higher[i] != slow.nearest_higher[i]) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over " + std::to_string(total) +
                               " points in 20 datasets (10 with tied coordinates)"};
}

Outcome hierarchical_regimes() {
  Config c = load_config("hierarchical.cfg");
  c.set("truth_level", "4");
  const Dataset four = load_dataset(c);
  c.set("truth_level", "2");
  const Dataset two = load_dataset(c);
  const Graph g = build_graph_for(c, four.cloud);
  const auto rows = scan_t(g, c.reals("log10_t"), four.truth);
  const std::size_t budget = c.counts("budgets").front();
  std::size_t n4 = 0, n2 = 0, bad = 0;
  double worst4 = 1.0, worst2 = 1.0;
  std::string khats;
  for (const auto& r : rows) {
    khats += std::to_string(r.khat);
    if (r.khat != 4 && r.khat != 2) continue;
    const Analysis a = analyze(g, r.t);
    const bool is4 = r.khat == 4;
    const double oa = land_oa(g, a, is4 ? four.truth : two.truth, budget);
    (is4 ? n4 : n2) += 1;
    double& worst = is4 ? worst4 : worst2;
    worst = std::min(worst, oa);
    if (oa < 0.99) ++bad;
  }
  return {n4 > 0 && n2 > 0 && bad == 0,
          "khat by grid point " + khats + "; " + std::to_string(n4) + " points with khat=4 (min OA vs 4 classes " +
              fmt(worst4) + "), " + std::to_string(n2) + " with khat=2 (min OA vs 2 classes " + fmt(worst2) + ")"};
}

Outcome budget_curves() {
  bool pass = true;
  std::string detail;
  for (const std::string name : {"gaussian", "geometric", "bottleneck"}) {
    const Config c = load_config(name + ".cfg");
    const auto out = run_experiment(c);
    std::map<std::string, std::pair<double, std::size_t>> at10;
    std::size_t first_good = 0;
    for (const auto& r : out.rows) {
      if (r.budget == 10) {
        at10[r.method].first += r.oa;
        ++at10[r.method].second;
      }
      if (r.method == "land" && r.oa >= 0.95 && (first_good == 0 || r.budget < first_good)) first_good = r.budget;
    }
    const auto mean = [&](const std::string& m) { return at10[m].first / static_cast<double>(at10[m].second); };
    const double land_mean = mean("land");
    const bool ok = first_good != 0 && first_good <= 10 && at10["land_random"].second == 20 &&
                    at10["cbal"].second == 20 && mean("land_random") < land_mean && mean("cbal") < land_mean &&
                    mean("cbal_single") < land_mean;
    pass = pass && ok;
    const auto n = out.manifest.at("data.n");
    detail += (detail.empty() ? "" : "; ") + name + " n=" + n + ": LAND OA>=0.95 from B=" +
              std::to_string(first_good) + ", mean OA at B=10 land " + fmt(land_mean) + " random " +
              fmt(mean("land_random")) + " cbal " + fmt(mean("cbal")) + " cbal_single " + fmt(mean("cbal_single"));
  }
  return {pass, detail};
}

Outcome purity_comparison() {
  bool pass = true;
  std::string detail;
  for (const auto& [name, linkage_method] :
       std::vector<std::pair<std::string, Linkage>>{{"geometric", Linkage::Average}, {"bottleneck", Linkage::Single}}) {
    const Config c = load_config(name + ".cfg");
    const Dataset ds = load_dataset(c);
    const Graph g = build_graph_for(c, ds.cloud);
    const Analysis a = analyze(g, time_grid(c).front());
    const std::size_t n = ds.cloud.size();
    const std::size_t lund_first = first_pure(purity_curve(lund_k_family(g, a, 40), ds.truth), 0.99);

    bool monotone = true;
    std::size_t link_first = 0;
    for (Linkage m : {Linkage::Average, Linkage::Single}) {
      const auto curve = purity_curve(dendrogram_family(linkage(ds.cloud, m), n), ds.truth);
      for (std::size_t i = 1; i < curve.size(); ++i) monotone = monotone && curve[i].purity >= curve[i - 1].purity;
      monotone = monotone && curve.back().purity == 1.0;
      if (m == linkage_method) link_first = first_pure(curve, 0.99);
    }
    const bool ok = lund_first != 0 && lund_first < link_first && monotone;
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + name + ": first l with purity>=0.99 lund_k " +
              std::to_string(lund_first) + " vs " + to_string(linkage_method) + " " + std::to_string(link_first) +
              (monotone ? ", dendrogram curves monotone to 1" : ", dendrogram curve NOT monotone to 1");
  }
  return {pass, detail};
}

Outcome metric_identities() {
  std::vector<std::string> failed;
  const auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };
  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  const LabelVector balanced{1, 1, 1, 1, 2, 2, 2, 2};
  expect(cohens_kappa(balanced, balanced) == 1.0, "kappa perfect");
  expect(close(cohens_kappa(LabelVector{1, 1, 1, 1, 1, 1, 1, 1}, balanced), 0.0), "kappa constant");
  expect(close(overall_accuracy(LabelVector{1, 2, 3, 3}, LabelVector{1, 2, 3, 1}), 0.75), "OA");
  std::vector<int> t(10, 1), p(10, 1);
  t[9] = 2;
  expect(close(overall_accuracy(LabelVector(p), LabelVector(t)), 0.9), "OA imbalanced");
  expect(close(average_accuracy(LabelVector(p), LabelVector(t)), 0.5), "AA imbalanced");
  expect(close(purity(LabelVector{1, 1, 1, 2, 2}, LabelVector{1, 1, 2, 2, 2}), 0.8), "purity");
  expect(close(purity(LabelVector{1, 2, 3, 4}, LabelVector{1, 1, 2, 2}), 1.0), "purity singletons");
  expect(close(purity(LabelVector{1, 1, 1, 1}, LabelVector{1, 1, 2, 2}), 0.5), "purity one cluster");
  std::string detail = "kappa, OA, AA and purity hand cases";
  for (const auto& f : failed) detail += "; failed " + f;
  return {failed.empty(), detail};
}

Outcome scaling() {
  const auto run_time = [](const GeneratedData& data) {
    const auto start = Clock::now();
    const Graph g = build_graph(data.cloud, {});
    const Analysis a = analyze(g, 30.0);
    GroundTruthOracle oracle(data.truth, 10);
    (void)land(a.scores, g.density, a.embedding, 10, oracle);
    return seconds_since(start);
  };
  std::map<std::size_t, double> median;
  for (std::size_t n : {5000, 10000}) {
    const std::size_t per = n / 3;
    const auto data = gen_gaussians({{0, 0}, {5, 0}, {0, 5}}, 0.2, {per, per, n - 2 * per}, 1);
    std::vector<double> times;
    for (int r = 0; r < 5; ++r) times.push_back(run_time(data));
    std::nth_element(times.begin(), times.begin() + 2, times.end());
    median[n] = times[2];
  }
  const double ratio = median[10000] / median[5000];
  return {ratio <= 2.8, "median " + fmt(median[5000], 3) + " s at n=5000, " + fmt(median[10000], 3) +
                            " s at n=10000, ratio " + fmt(ratio, 3)};
}

Outcome hsi_ingestion() {
  testing::TempDir dir("acceptance-hsi");
  std::size_t roundtrips = 0;
  Rng rng(9);
  for (SampleType type : {SampleType::UInt8, SampleType::Int16, SampleType::UInt16, SampleType::Int32,
                          SampleType::UInt32, SampleType::Float32, SampleType::Float64})
    for (ByteOrder order : {ByteOrder::Little, ByteOrder::Big})
      for (Interleave layout : {Interleave::Bsq, Interleave::Bip, Interleave::Bil}) {
        HsiCubeHeader h{5, 7, 3, type, order, layout};
        RowMatrix values(35, 3);
        for (Eigen::Index i = 0; i < values.size(); ++i) {
          const double v = rng.uniform(0, 200);
          values.data()[i] = type == SampleType::Float64   ? v
                             : type == SampleType::Float32 ? static_cast<double>(static_cast<float>(v))
                                                           : std::floor(v);
        }
        const PointCloud cube(values);
        write_hsi_header(dir / "c.hdr", h);
        write_hsi_cube(dir / "c.raw", h, cube);
        const PointCloud back = load_hsi_cube(dir / "c.raw", read_hsi_header(dir / "c.hdr"));
        if (back.points() != cube.points()) return {false, "roundtrip differs for " + to_string(type) + " " + to_string(order) + " " + to_string(layout)};
        ++roundtrips;
      }

  struct Scene {
    std::string name;
    std::size_t rows, cols, bands, pixels;
  };
  std::string detail = std::to_string(roundtrips) + " bit-exact cube roundtrips";
  for (const Scene& s : {Scene{"Salinas A", 83, 86, 224, 7138}, Scene{"Pavia", 270, 50, 103, 13500}}) {
    HsiCubeHeader h{s.rows, s.cols, s.bands, SampleType::Int16, ByteOrder::Little, Interleave::Bsq};
    RowMatrix values(static_cast<Eigen::Index>(s.pixels), static_cast<Eigen::Index>(s.bands));
    for (Eigen::Index i = 0; i < values.size(); ++i) values.data()[i] = std::floor(rng.uniform(-1000, 8000));
    write_hsi_header(dir / "scene.hdr", h);
    write_hsi_cube(dir / "scene.raw", h, PointCloud(values));
    const auto header = read_hsi_header(dir / "scene.hdr");
    const PointCloud cloud = load_hsi_cube(dir / "scene.raw", header);
    if (header.pixels() != s.pixels || cloud.size() != s.pixels || cloud.dim() != s.bands || cloud.points() != values)
      return {false, s.name + " shape or values differ"};
    detail += ", " + s.name + " " + std::to_string(cloud.size()) + "x" + std::to_string(cloud.dim());
  }
  return {true, detail};
}

}  // namespace

int main() {
  ScopedWarningCapture quiet;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"perfect accuracy under separation", perfect_accuracy_theorem},
      {"spectral distance vs explicit powers", spectral_oracle},
      {"rho vs brute force", rho_oracle},
      {"hierarchical regimes", hierarchical_regimes},
      {"budget curves", budget_curves},
      {"purity comparison", purity_comparison},
      {"metric identities", metric_identities},
      {"scaling", scaling},
      {"HSI ingestion", hsi_ingestion},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << i + 1 << " (" << criteria[i].first << "): " << (o.pass ? "PASS" : "FAIL") << " | "
              << o.detail << " [" << fmt(seconds_since(start), 3) << " s]" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
