#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "diffal/baselines.hpp"
#include "diffal/datagen.hpp"
#include "diffal/errors.hpp"
#include "diffal/kdtree.hpp"
#include "diffal/metrics.hpp"
#include "diffal/pipeline.hpp"
#include "support.hpp"

using namespace diffal;

namespace {

// Textbook agglomeration: recompute every cluster distance from scratch.
std::vector<double> brute_heights(const PointCloud& c, Linkage method) {
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < c.size(); ++i) clusters.push_back({i});
  std::vector<double> heights;
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < clusters.size(); ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double agg = method == Linkage::Single ? std::numeric_limits<double>::infinity() : 0.0;
        for (std::size_t i : clusters[a])
          for (std::size_t j : clusters[b]) {
            const double d = std::sqrt(squared_distance(c.point(i), c.point(j)));
            if (method == Linkage::Single) agg = std::min(agg, d);
            else agg += d;
          }
        if (method == Linkage::Average) agg /= static_cast<double>(clusters[a].size() * clusters[b].size());
        if (agg < best) { best = agg; ba = a; bb = b; }
      }
    heights.push_back(best);
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  return heights;
}

// Minimum spanning tree weights by Kruskal over all pairs.
std::vector<double> mst_weights(const PointCloud& c) {
  const std::size_t n = c.size();
  std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(std::sqrt(squared_distance(c.point(i), c.point(j))), i, j);
  std::sort(edges.begin(), edges.end());
  std::vector<std::size_t> comp(n);
  for (std::size_t i = 0; i < n; ++i) comp[i] = i;
  std::vector<double> out;
  for (const auto& [w, i, j] : edges) {
    const std::size_t a = comp[i], b = comp[j];
    if (a == b) continue;
    for (auto& x : comp) if (x == b) x = a;
    out.push_back(w);
  }
  return out;
}

std::vector<double> heights(const Dendrogram& d) {
  std::vector<double> h;
  for (const auto& m : d.merges) h.push_back(m.height);
  return h;
}

}  // namespace

TEST_CASE("single linkage on three collinear points") {
  const auto c = testing::cloud_from({{0.0}, {1.0}, {10.0}});
  const auto d = linkage(c, Linkage::Single);
  REQUIRE(d.merges.size() == 2);
  CHECK(d.merges[0].left == 0);
  CHECK(d.merges[0].right == 1);
  CHECK(d.merges[0].height == 1.0);
  CHECK(d.merges[1].left == 2);
  CHECK(d.merges[1].right == 3);
  CHECK(d.merges[1].height == 9.0);
  CHECK(d.merges[1].size == 3);
}

TEST_CASE("linkage heights match the brute-force agglomeration") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto c = testing::random_cloud(12, 2, seed);
    for (Linkage m : {Linkage::Single, Linkage::Average}) {
      const auto got = heights(linkage(c, m));
      const auto want = brute_heights(c, m);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("single linkage heights are the sorted MST weights") {
  const auto c = testing::random_cloud(30, 3, 8);
  CHECK(heights(linkage(c, Linkage::Single)) == mst_weights(c));
}

TEST_CASE("dendrogram invariants and cuts") {
  const auto c = testing::random_cloud(60, 2, 3);
  for (Linkage m : {Linkage::Single, Linkage::Average}) {
    const auto d = linkage(c, m);
    CHECK(d.merges.size() == 59);
    CHECK(d.merges.back().size == 60);
    for (std::size_t i = 1; i < d.merges.size(); ++i) CHECK(d.merges[i].height >= d.merges[i - 1].height);
    CHECK(d.members(d.root()).size() == 60);
    for (std::size_t l = 1; l <= 60; ++l) {
      const auto labels = cut(d, l);
      std::set<int> ids(labels.begin(), labels.end());
      CHECK(ids.size() == l);
      CHECK(*ids.begin() == 1);
      CHECK(*ids.rbegin() == static_cast<int>(l));
    }
    // Each cut refines the previous one.
    for (std::size_t l = 2; l <= 60; ++l) {
      const auto coarse = cut(d, l - 1), fine = cut(d, l);
      for (std::size_t i = 0; i < 60; ++i)
        for (std::size_t j = 0; j < 60; ++j)
          if (fine[i] == fine[j]) CHECK(coarse[i] == coarse[j]);
    }
    CHECK_THROWS_AS(cut(d, 0), ConfigError);
    CHECK_THROWS_AS(cut(d, 61), ConfigError);
  }
  CHECK(cut(linkage(c, Linkage::Single), 1)[0] == 1);
  CHECK_THROWS_AS(linkage(testing::cloud_from({{0.0}}), Linkage::Single), ConfigError);
  CHECK(parse_linkage("average") == Linkage::Average);
  CHECK_THROWS_AS(parse_linkage("ward"), ConfigError);
}

TEST_CASE("random-query LAND") {
  const auto data = gen_gaussians({{0, 0}, {3, 0}}, 0.4, {60, 60}, 1);
  const auto g = build_graph(data.cloud, {});
  const auto a = analyze(g, 20.0);
  GroundTruthOracle o1(data.truth, 7), o2(data.truth, 7), o3(data.truth, 7);
  const auto r1 = land_random(g.density, a.embedding, 7, o1, 99);
  const auto r2 = land_random(g.density, a.embedding, 7, o2, 99);
  const auto r3 = land_random(g.density, a.embedding, 7, o3, 100);
  CHECK(r1.queried_indices == r2.queried_indices);
  CHECK(r1.queried_indices != r3.queried_indices);
  CHECK(std::set<std::size_t>(r1.queried_indices.begin(), r1.queried_indices.end()).size() == 7);
  CHECK(o1.queries_used() == 7);
  CHECK(r1.labels.complete());
  GroundTruthOracle full(data.truth, 120);
  CHECK(land_random(g.density, a.embedding, 120, full, 5).labels == data.truth);
}

TEST_CASE("CBAL respects the budget and labels everything") {
  const auto data = gen_gaussians({{0, 0}, {3, 0}, {0, 3}}, 0.5, {50, 50, 50}, 2);
  const auto tree = linkage(data.cloud, Linkage::Average);
  for (std::size_t b : {1, 2, 5, 10, 40}) {
    GroundTruthOracle o(data.truth, b);
    CbalParams p;
    p.seed = 7;
    const auto r = cbal(tree, b, o, p);
    CHECK(r.queries_used <= b);
    CHECK(o.queries_used() == r.queries_used);
    CHECK(r.labels.complete());
    for (std::size_t i : r.queried_indices) CHECK(r.labels[i] == data.truth[i]);
  }
  // Deterministic per seed.
  GroundTruthOracle a(data.truth, 10), b(data.truth, 10);
  CbalParams p;
  p.seed = 3;
  CHECK(cbal(tree, 10, a, p).labels == cbal(tree, 10, b, p).labels);
  // An unlimited budget ends with every point either queried or in a pure frozen node.
  GroundTruthOracle all(data.truth, 150);
  CbalParams strict;
  strict.purity_threshold = 1.0;
  strict.per_node = 150;
  CHECK(cbal(tree, 150, all, strict).labels == data.truth);
}

TEST_CASE("CBAL on well separated blobs is accurate with a modest budget") {
  const auto data = gen_gaussians({{0, 0}, {10, 0}}, 0.5, {80, 80}, 5);
  const auto tree = linkage(data.cloud, Linkage::Average);
  GroundTruthOracle o(data.truth, 12);
  CbalParams p;
  p.seed = 1;
  CHECK(overall_accuracy(cbal(tree, 12, o, p).labels, data.truth) == 1.0);
}
