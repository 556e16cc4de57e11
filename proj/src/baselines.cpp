#include "diffal/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "diffal/errors.hpp"
#include "diffal/kdtree.hpp"
#include "diffal/random.hpp"

namespace diffal {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Keeps the smaller root so the root is always the smallest member.
  std::size_t unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a > b) std::swap(a, b);
    parent_[b] = a;
    return a;
  }

 private:
  std::vector<std::size_t> parent_;
};

struct RawMerge {
  std::size_t a, b;  // representative leaves
  double height;
};

// Turns merges between leaf representatives into a dendrogram with node ids,
// ordered by (height, smaller member index).
Dendrogram assemble(std::size_t n, std::vector<RawMerge> raw) {
  // Rank by height, then by the smallest leaf index of the merged pair.
  DisjointSets probe(n);
  std::vector<std::size_t> min_leaf(raw.size());
  {
    // Replay in discovery order to find each merge's smallest member.
    for (std::size_t i = 0; i < raw.size(); ++i) {
      min_leaf[i] = std::min(probe.find(raw[i].a), probe.find(raw[i].b));
      probe.unite(raw[i].a, raw[i].b);
    }
  }
  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (raw[x].height != raw[y].height) return raw[x].height < raw[y].height;
    return min_leaf[x] < min_leaf[y];
  });

  Dendrogram d;
  d.leaves = n;
  DisjointSets sets(n);
  std::vector<std::size_t> node_of(n);   // root leaf -> current node id
  std::vector<std::size_t> size_of(n, 1);
  std::iota(node_of.begin(), node_of.end(), std::size_t{0});
  for (std::size_t idx : order) {
    const std::size_t ra = sets.find(raw[idx].a);
    const std::size_t rb = sets.find(raw[idx].b);
    const std::size_t na = node_of[ra], nb = node_of[rb];
    const std::size_t size = size_of[ra] + size_of[rb];
    const std::size_t root = sets.unite(ra, rb);
    d.merges.push_back({std::min(na, nb), std::max(na, nb), raw[idx].height, size});
    node_of[root] = n + d.merges.size() - 1;
    size_of[root] = size;
  }
  return d;
}

double euclid(const PointCloud& c, std::size_t i, std::size_t j) {
  return std::sqrt(squared_distance(c.point(i), c.point(j)));
}

Dendrogram single_linkage(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(n, inf);
  std::vector<std::size_t> via(n, 0);
  std::vector<char> in_tree(n, 0);
  std::vector<RawMerge> edges;
  std::size_t current = 0;
  in_tree[0] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = euclid(cloud, current, j);
      if (d < best[j]) { best[j] = d; via[j] = current; }
      if (next == n || best[j] < best[next]) next = j;
    }
    in_tree[next] = 1;
    edges.push_back({via[next], next, best[next]});
    current = next;
  }
  // Kruskal order over MST edges gives the single-linkage merges.
  std::stable_sort(edges.begin(), edges.end(), [](const RawMerge& x, const RawMerge& y) {
    return x.height < y.height;
  });
  return assemble(n, std::move(edges));
}

Dendrogram average_linkage(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  // Full symmetric matrix; the row of a merged cluster lives in the slot of
  // its smaller representative.
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = dist[j * n + i] = euclid(cloud, i, j);
  std::vector<std::size_t> size(n, 1);
  std::vector<char> active(n, 1);
  std::vector<RawMerge> merges;
  std::vector<std::size_t> chain;
  std::size_t remaining = n;
  while (remaining > 1) {
    if (chain.empty()) {
      std::size_t first = 0;
      while (!active[first]) ++first;
      chain.push_back(first);
    }
    const std::size_t a = chain.back();
    const std::size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : n;
    std::size_t b = prev;
    double bd = prev < n ? dist[a * n + prev] : std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == a) continue;
      const double d = dist[a * n + j];
      if (d < bd || (d == bd && b != prev && j < b)) { bd = d; b = j; }
    }
    if (b == prev) {
      chain.pop_back();
      chain.pop_back();
      const std::size_t keep = std::min(a, b), drop = std::max(a, b);
      merges.push_back({keep, drop, bd});
      const double sa = static_cast<double>(size[a]), sb = static_cast<double>(size[b]);
      for (std::size_t j = 0; j < n; ++j) {
        if (!active[j] || j == a || j == b) continue;
        const double d = (sa * dist[a * n + j] + sb * dist[b * n + j]) / (sa + sb);
        dist[keep * n + j] = dist[j * n + keep] = d;
      }
      size[keep] += size[drop];
      active[drop] = 0;
      --remaining;
    } else {
      chain.push_back(b);
    }
  }
  return assemble(n, std::move(merges));
}

int majority(const std::map<int, std::size_t>& counts) {
  int best = 0;
  std::size_t best_count = 0;
  for (const auto& [label, count] : counts)
    if (count > best_count) { best = label; best_count = count; }  // ties keep the smaller label
  return best;
}

}  // namespace

Linkage parse_linkage(const std::string& name) {
  if (name == "single") return Linkage::Single;
  if (name == "average") return Linkage::Average;
  throw ConfigError("unknown linkage '" + name + "'");
}

std::string to_string(Linkage l) { return l == Linkage::Single ? "single" : "average"; }

std::vector<std::size_t> Dendrogram::members(std::size_t node) const {
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{node};
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (is_leaf(v)) {
      out.push_back(v);
    } else {
      const auto& m = merges[v - leaves];
      stack.push_back(m.left);
      stack.push_back(m.right);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Dendrogram linkage(const PointCloud& cloud, Linkage method) {
  if (cloud.size() < 2) throw ConfigError("linkage needs at least two points");
  return method == Linkage::Single ? single_linkage(cloud) : average_linkage(cloud);
}

LabelVector cut(const Dendrogram& d, std::size_t clusters) {
  const std::size_t n = d.leaves;
  if (clusters < 1 || clusters > n)
    throw ConfigError("cut needs 1 <= clusters <= n (got " + std::to_string(clusters) + ")");
  DisjointSets sets(n);
  std::vector<std::size_t> rep(n + d.merges.size());
  std::iota(rep.begin(), rep.begin() + static_cast<std::ptrdiff_t>(n), std::size_t{0});
  for (std::size_t i = 0; i < n - clusters; ++i) {
    const auto& m = d.merges[i];
    rep[n + i] = sets.unite(rep[m.left], rep[m.right]);
  }
  LabelVector labels(n);
  std::vector<int> id(n, 0);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = sets.find(i);
    if (id[r] == 0) id[r] = ++next;
    labels[i] = id[r];
  }
  return labels;
}

void write_dendrogram_csv(const std::filesystem::path& path, const Dendrogram& d) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "left,right,height\n";
  for (const auto& m : d.merges) out << m.left << ',' << m.right << ',' << m.height << '\n';
}

ActiveResult land_random(const DensityEstimate& density, const DiffusionEmbedding& emb,
                         std::size_t budget, Oracle& oracle, std::uint64_t seed) {
  const std::size_t n = density.size();
  if (budget < 1 || budget > n)
    throw ConfigError("land_random needs 1 <= B <= n (B=" + std::to_string(budget) + ")");
  Rng rng(seed);
  return query_and_propagate(rng.sample(n, budget), density, emb, oracle);
}

ActiveResult cbal(const Dendrogram& d, std::size_t budget, Oracle& oracle, const CbalParams& params) {
  if (budget < 1) throw ConfigError("cbal needs B >= 1");
  if (params.per_node < 1) throw ConfigError("cbal per-node sample size must be >= 1");
  const std::size_t n = d.leaves;
  const std::size_t total_nodes = n + d.merges.size();
  constexpr auto none = std::numeric_limits<std::size_t>::max();

  // Leaves of every node occupy a contiguous range of a depth-first order.
  std::vector<std::size_t> parent(total_nodes, none), lo(total_nodes), hi(total_nodes), order;
  order.reserve(n);
  for (std::size_t i = 0; i < d.merges.size(); ++i) {
    parent[d.merges[i].left] = n + i;
    parent[d.merges[i].right] = n + i;
  }
  {
    std::vector<std::pair<std::size_t, bool>> stack{{d.root(), false}};
    while (!stack.empty()) {
      auto [v, done] = stack.back();
      stack.pop_back();
      if (done) { hi[v] = order.size(); continue; }
      lo[v] = order.size();
      if (d.is_leaf(v)) { order.push_back(v); hi[v] = order.size(); continue; }
      stack.push_back({v, true});
      stack.push_back({d.merges[v - n].right, false});
      stack.push_back({d.merges[v - n].left, false});
    }
  }

  Rng rng(params.seed);
  std::vector<int> answer(n, -1);
  ActiveResult result;
  std::set<int> observed;

  const auto counts_in = [&](std::size_t node) {
    std::map<int, std::size_t> counts;
    for (std::size_t p = lo[node]; p < hi[node]; ++p)
      if (answer[order[p]] >= 0) ++counts[answer[order[p]]];
    return counts;
  };
  const auto unqueried_in = [&](std::size_t node) {
    std::vector<std::size_t> out;
    for (std::size_t p = lo[node]; p < hi[node]; ++p)
      if (answer[order[p]] < 0) out.push_back(order[p]);
    std::sort(out.begin(), out.end());
    return out;
  };

  std::vector<std::size_t> frontier{d.root()};
  std::vector<std::pair<std::size_t, int>> frozen;
  while (oracle.queries_used() < budget && !frontier.empty()) {
    // Pruning node with the most unqueried points; ties to the smaller node id.
    std::size_t pick = 0, pick_unq = 0;
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const std::size_t u = unqueried_in(frontier[f]).size();
      if (u > pick_unq || (u == pick_unq && u > 0 && frontier[f] < frontier[pick])) {
        pick = f;
        pick_unq = u;
      }
    }
    if (pick_unq == 0) break;
    const std::size_t node = frontier[pick];
    const auto pool = unqueried_in(node);
    const auto draw = rng.sample(pool.size(), std::min(params.per_node, pool.size()));
    for (std::size_t slot : draw) {
      if (oracle.queries_used() >= budget) break;
      const std::size_t idx = pool[slot];
      answer[idx] = oracle.query(idx);
      observed.insert(answer[idx]);
      result.queried_indices.push_back(idx);
    }

    const auto counts = counts_in(node);
    std::size_t asked = 0;
    for (const auto& [label, c] : counts) asked += c;
    const int top = majority(counts);
    const double fraction = static_cast<double>(counts.at(top)) / static_cast<double>(asked);
    const std::size_t size = hi[node] - lo[node];
    if (d.is_leaf(node) || asked == size || fraction >= params.purity_threshold) {
      frozen.emplace_back(node, top);
      frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pick));
    } else {
      const auto& m = d.merges[node - n];
      frontier[pick] = m.left;
      frontier.push_back(m.right);
    }
  }

  LabelVector labels(n);
  const auto fill = [&](std::size_t node, int label) {
    for (std::size_t p = lo[node]; p < hi[node]; ++p) labels[order[p]] = label;
  };
  for (const auto& [node, label] : frozen) fill(node, label);
  for (std::size_t node : frontier) {
    std::size_t at = node;
    auto counts = counts_in(at);
    while (counts.empty() && parent[at] != none) {
      at = parent[at];
      counts = counts_in(at);
    }
    fill(node, counts.empty() ? 0 : majority(counts));
  }
  for (std::size_t i = 0; i < n; ++i)
    if (answer[i] >= 0) labels[i] = answer[i];

  result.labels = std::move(labels);
  result.queries_used = result.queried_indices.size();
  result.observed_classes.assign(observed.begin(), observed.end());
  return result;
}

}  // namespace diffal
