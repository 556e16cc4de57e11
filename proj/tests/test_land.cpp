#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "diffal/datagen.hpp"
#include "diffal/errors.hpp"
#include "diffal/land.hpp"
#include "diffal/lund.hpp"
#include "diffal/metrics.hpp"
#include "diffal/pipeline.hpp"
#include "support.hpp"

using namespace diffal;

namespace {

struct Fixture {
  GeneratedData data;
  Graph graph;
  Analysis analysis;
};

Fixture three_blobs(double t = 50.0) {
  auto data = gen_gaussians({{0, 0}, {2.5, 0}, {0, 2.5}}, 0.4, {70, 70, 70}, 4);
  auto graph = build_graph(data.cloud, {});
  auto analysis = analyze(graph, t);
  return {std::move(data), std::move(graph), std::move(analysis)};
}

// Oracle that answers with a fixed labeling.
class TableOracle final : public Oracle {
 public:
  TableOracle(LabelVector table, std::size_t budget) : Oracle(budget), table_(std::move(table)) {}

 protected:
  int answer(std::size_t index) override { return table_[index]; }

 private:
  LabelVector table_;
};

}  // namespace

TEST_CASE("ground-truth oracle memoizes and enforces its cap") {
  GroundTruthOracle o(LabelVector{1, 2, 3, 1}, 3);
  CHECK(o.query(1) == 2);
  CHECK(o.query(1) == 2);
  CHECK(o.queries_used() == 1);
  CHECK(o.query(0) == 1);
  CHECK(o.query(2) == 3);
  CHECK_THROWS_AS(o.query(3), BudgetExhausted);
  CHECK(o.query(2) == 3);  // repeats stay free

  GroundTruthOracle zero(LabelVector{1, 2}, 0);
  CHECK_THROWS_AS(zero.query(0), BudgetExhausted);
  CHECK_THROWS_AS(GroundTruthOracle(LabelVector{1, 0}, 2), DataError);
}

TEST_CASE("stream oracle protocol") {
  std::istringstream in("2\n\n1\n");
  std::ostringstream out;
  StreamOracle o(in, out, 5);
  CHECK(o.query(4) == 2);
  CHECK(o.query(7) == 1);
  CHECK(out.str() == "QUERY 4\nQUERY 7\n");
  CHECK_THROWS_AS(o.query(8), DataError);  // input exhausted

  std::istringstream bad("abc\n");
  std::ostringstream sink;
  StreamOracle b(bad, sink, 5);
  CHECK_THROWS_AS(b.query(0), DataError);

  const auto cloud = testing::cloud_from({{1.5, 2.0}});
  std::istringstream one("3\n");
  std::ostringstream shown;
  StreamOracle c(one, shown, 1, &cloud);
  CHECK(c.query(0) == 3);
  CHECK(shown.str() == "# point 0: 1.5 2\nQUERY 0\n");
}

TEST_CASE("full budget reproduces the truth") {
  auto f = three_blobs();
  const std::size_t n = f.data.truth.size();
  GroundTruthOracle o(f.data.truth, n);
  const auto r = land(f.analysis.scores, f.graph.density, f.analysis.embedding, n, o);
  CHECK(r.labels == f.data.truth);
  CHECK(r.queries_used == n);
}

TEST_CASE("queries are the top of the score order") {
  auto f = three_blobs();
  GroundTruthOracle o(f.data.truth, 5);
  const auto r = land(f.analysis.scores, f.graph.density, f.analysis.embedding, 5, o);
  CHECK(r.queried_indices == std::vector<std::size_t>(f.analysis.scores.order.begin(), f.analysis.scores.order.begin() + 5));
  for (std::size_t i : r.queried_indices) CHECK(r.labels[i] == f.data.truth[i]);
  CHECK(r.labels.complete());

  // Different answers do not change which points are asked.
  LabelVector ones(f.data.truth.size());
  for (std::size_t i = 0; i < ones.size(); ++i) ones[i] = 1;
  TableOracle constant(ones, 5);
  const auto r2 = land(f.analysis.scores, f.graph.density, f.analysis.embedding, 5, constant);
  CHECK(r2.queried_indices == r.queried_indices);

  // Budget monotonicity: the query set for B is a prefix of that for B + 1.
  GroundTruthOracle o6(f.data.truth, 6);
  const auto r6 = land(f.analysis.scores, f.graph.density, f.analysis.embedding, 6, o6);
  CHECK(std::equal(r.queried_indices.begin(), r.queried_indices.end(), r6.queried_indices.begin()));
}

TEST_CASE("budget errors") {
  auto f = three_blobs();
  const std::size_t n = f.data.truth.size();
  GroundTruthOracle big(f.data.truth, n + 1);
  CHECK_THROWS_AS(land(f.analysis.scores, f.graph.density, f.analysis.embedding, n + 1, big), ConfigError);
  CHECK_THROWS_AS(land(f.analysis.scores, f.graph.density, f.analysis.embedding, 0, big), ConfigError);

  GroundTruthOracle small(f.data.truth, 2);
  try {
    (void)land(f.analysis.scores, f.graph.density, f.analysis.embedding, 4, small);
    FAIL("expected a partial result");
  } catch (const PartialResultError& e) {
    CHECK(e.partial().queries_used == 2);
    CHECK(e.partial().queried_indices.size() == 2);
    CHECK(e.partial().labels.count_labeled() == 2);
    CHECK(e.exit_code() == 2);
  }
}

TEST_CASE("fewer queries than classes reports the observed classes") {
  auto f = three_blobs(200.0);
  GroundTruthOracle o(f.data.truth, 1);
  const auto r = land(f.analysis.scores, f.graph.density, f.analysis.embedding, 1, o);
  CHECK(r.observed_classes.size() == 1);
  CHECK(std::all_of(r.labels.begin(), r.labels.end(), [&](int l) { return l == r.observed_classes[0]; }));
}

TEST_CASE("LAND with the LUND labels as oracle reproduces LUND") {
  auto f = three_blobs(200.0);
  const auto u = lund(f.analysis.scores, f.graph.density, f.analysis.embedding);
  for (std::size_t b = u.num_clusters; b <= u.num_clusters + 4; ++b) {
    TableOracle o(u.labels, b);
    const auto r = land(f.analysis.scores, f.graph.density, f.analysis.embedding, b, o);
    CHECK(r.labels == u.labels);
  }
}

TEST_CASE("LAND labels separated clusters perfectly with one query each") {
  auto f = three_blobs(200.0);
  const auto d = separation_diagnostics(f.analysis.embedding, f.graph.density, f.data.truth);
  REQUIRE(d.land_condition_holds);
  GroundTruthOracle o(f.data.truth, 3);
  const auto r = land(f.analysis.scores, f.graph.density, f.analysis.embedding, 3, o);
  CHECK(overall_accuracy(r.labels, f.data.truth) == 1.0);
}
