#include "diffal/land.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "diffal/lund.hpp"

namespace diffal {

int Oracle::query(std::size_t index) {
  if (auto it = answers_.find(index); it != answers_.end()) return it->second;
  if (answers_.size() >= budget_)
    throw BudgetExhausted("oracle budget of " + std::to_string(budget_) + " queries exhausted");
  const int label = answer(index);
  if (label < 1) throw DataError("oracle returned invalid label " + std::to_string(label));
  answers_.emplace(index, label);
  return label;
}

GroundTruthOracle::GroundTruthOracle(LabelVector truth, std::size_t budget)
    : Oracle(budget), truth_(std::move(truth)) {
  if (!truth_.complete()) throw DataError("ground-truth oracle needs fully labeled truth");
}

int GroundTruthOracle::answer(std::size_t index) {
  if (index >= truth_.size()) throw ConfigError("oracle query index out of range");
  return truth_[index];
}

StreamOracle::StreamOracle(std::istream& in, std::ostream& out, std::size_t budget,
                           const PointCloud* cloud)
    : Oracle(budget), in_(in), out_(out), cloud_(cloud) {}

int StreamOracle::answer(std::size_t index) {
  if (cloud_) {
    out_ << "# point " << index << ':';
    for (double v : cloud_->point(index)) out_ << ' ' << v;
    out_ << '\n';
  }
  out_ << "QUERY " << index << std::endl;
  std::string line;
  while (std::getline(in_, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t used = 0;
    int label = 0;
    try {
      label = std::stoi(line, &used);
    } catch (const std::exception&) {
      throw DataError("oracle response is not an integer: '" + line + "'");
    }
    if (line.find_first_not_of(" \t\r", used) != std::string::npos)
      throw DataError("oracle response is not an integer: '" + line + "'");
    return label;
  }
  throw DataError("oracle input closed before answering query " + std::to_string(index));
}

ActiveResult query_and_propagate(const std::vector<std::size_t>& points,
                                 const DensityEstimate& density, const DiffusionEmbedding& emb,
                                 Oracle& oracle, std::span<const std::size_t> nearest_higher) {
  const std::size_t n = density.size();
  ActiveResult result;
  LabelVector seeds(n);
  std::set<int> observed;
  for (std::size_t idx : points) {
    int label = 0;
    try {
      label = oracle.query(idx);
    } catch (const BudgetExhausted& e) {
      result.labels = seeds;
      result.queries_used = oracle.queries_used();
      result.observed_classes.assign(observed.begin(), observed.end());
      throw PartialResultError(e.what(), std::move(result));
    }
    seeds[idx] = label;
    observed.insert(label);
    result.queried_indices.push_back(idx);
  }
  result.queries_used = oracle.queries_used();
  result.observed_classes.assign(observed.begin(), observed.end());
  result.labels = propagate_labels(seeds, density, emb, nearest_higher);
  return result;
}

ActiveResult land(const ModeScores& scores, const DensityEstimate& density,
                  const DiffusionEmbedding& emb, std::size_t budget, Oracle& oracle) {
  const std::size_t n = scores.size();
  if (budget < 1 || budget > n)
    throw ConfigError("land needs 1 <= B <= n (B=" + std::to_string(budget) + ")");
  const std::vector<std::size_t> top(scores.order.begin(),
                                     scores.order.begin() + static_cast<std::ptrdiff_t>(budget));
  return query_and_propagate(top, density, emb, oracle, scores.nearest_higher);
}

}  // namespace diffal
