#include "diffal/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>

#include "diffal/errors.hpp"

namespace diffal {
namespace {

void check_lengths(const LabelVector& pred, const LabelVector& truth) {
  if (pred.size() != truth.size())
    throw DataError("label length mismatch: " + std::to_string(pred.size()) + " predicted vs " +
                    std::to_string(truth.size()) + " truth");
}

std::size_t index_of(const std::vector<int>& sorted, int v) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(const LabelVector& pred, const LabelVector& truth) {
  check_lengths(pred, truth);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0) continue;
    truth_classes_.push_back(truth[i]);
    pred_classes_.push_back(pred[i]);
    ++total_;
  }
  if (total_ == 0) throw DataError("no evaluable points (all truth labels are 0)");
  for (auto* v : {&truth_classes_, &pred_classes_}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  counts_.assign(truth_classes_.size() * pred_classes_.size(), 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0) continue;
    ++counts_[index_of(truth_classes_, truth[i]) * pred_classes_.size() + index_of(pred_classes_, pred[i])];
  }
}

std::size_t ConfusionMatrix::row_total(std::size_t row) const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < pred_classes_.size(); ++c) s += count(row, c);
  return s;
}

std::size_t ConfusionMatrix::col_total(std::size_t col) const {
  std::size_t s = 0;
  for (std::size_t r = 0; r < truth_classes_.size(); ++r) s += count(r, col);
  return s;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t s = 0;
  for (std::size_t r = 0; r < truth_classes_.size(); ++r) {
    const auto it = std::lower_bound(pred_classes_.begin(), pred_classes_.end(), truth_classes_[r]);
    if (it != pred_classes_.end() && *it == truth_classes_[r])
      s += count(r, static_cast<std::size_t>(it - pred_classes_.begin()));
  }
  return s;
}

double overall_accuracy(const LabelVector& pred, const LabelVector& truth) {
  const ConfusionMatrix cm(pred, truth);
  return static_cast<double>(cm.correct()) / static_cast<double>(cm.total());
}

double average_accuracy(const LabelVector& pred, const LabelVector& truth) {
  check_lengths(pred, truth);
  std::map<int, std::pair<std::size_t, std::size_t>> per_class;  // class -> (correct, total)
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0) continue;
    auto& [hit, all] = per_class[truth[i]];
    ++all;
    if (pred[i] == truth[i]) ++hit;
  }
  if (per_class.empty()) throw DataError("no evaluable points (all truth labels are 0)");
  double sum = 0.0;
  for (const auto& [cls, c] : per_class) sum += static_cast<double>(c.first) / static_cast<double>(c.second);
  return sum / static_cast<double>(per_class.size());
}

double cohens_kappa(const LabelVector& pred, const LabelVector& truth) {
  const ConfusionMatrix cm(pred, truth);
  const double n = static_cast<double>(cm.total());
  const double po = static_cast<double>(cm.correct()) / n;
  double pe = 0.0;
  for (std::size_t r = 0; r < cm.truth_classes().size(); ++r) {
    const auto it = std::lower_bound(cm.pred_classes().begin(), cm.pred_classes().end(), cm.truth_classes()[r]);
    if (it == cm.pred_classes().end() || *it != cm.truth_classes()[r]) continue;
    const auto c = static_cast<std::size_t>(it - cm.pred_classes().begin());
    pe += static_cast<double>(cm.row_total(r)) * static_cast<double>(cm.col_total(c));
  }
  pe /= n * n;
  if (pe == 1.0) {
    if (po == 1.0) return 1.0;
    throw NumericalError("kappa undefined: chance agreement is 1 but labelings differ");
  }
  return (po - pe) / (1.0 - pe);
}

std::vector<std::size_t> max_weight_assignment(const std::vector<std::vector<double>>& weights) {
  const std::size_t rows = weights.size();
  if (rows == 0) return {};
  const std::size_t cols = weights[0].size();
  if (rows > cols) throw ConfigError("assignment needs rows <= cols");
  // Hungarian algorithm with potentials on the cost -w, 1-based internally.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> match(cols + 1, 0), way(cols + 1, 0);
  for (std::size_t i = 1; i <= rows; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = -weights[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
        if (minv[j] < delta) { delta = minv[j]; j1 = j; }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) { u[match[j]] += delta; v[j] -= delta; }
        else minv[j] -= delta;
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(rows, 0);
  for (std::size_t j = 1; j <= cols; ++j)
    if (match[j] != 0) assignment[match[j] - 1] = j - 1;
  return assignment;
}

LabelVector align_labels(const LabelVector& pred, const LabelVector& truth) {
  check_lengths(pred, truth);
  if (!pred.complete()) throw DataError("align_labels needs a fully labeled prediction");
  std::vector<int> clusters(pred.begin(), pred.end());
  std::sort(clusters.begin(), clusters.end());
  clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());
  std::vector<int> classes;
  for (int t : truth) if (t != 0) classes.push_back(t);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  // Pad the class side with dummy columns so every cluster gets a column.
  const std::size_t cols = std::max(clusters.size(), classes.size());
  std::vector<std::vector<double>> w(clusters.size(), std::vector<double>(cols, 0.0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (truth[i] == 0) continue;
    w[index_of(clusters, pred[i])][index_of(classes, truth[i])] += 1.0;
  }
  const auto assign = max_weight_assignment(w);
  int fresh = std::max(truth.max_label(), 0);
  std::map<int, int> rename;
  for (std::size_t c = 0; c < clusters.size(); ++c)
    rename[clusters[c]] = assign[c] < classes.size() ? classes[assign[c]] : ++fresh;
  LabelVector out(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) out[i] = rename.at(pred[i]);
  return out;
}

double purity(const LabelVector& clustering, const LabelVector& truth) {
  check_lengths(clustering, truth);
  std::map<int, std::map<int, std::size_t>> table;  // cluster -> class -> count
  std::size_t total = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0) continue;
    ++table[clustering[i]][truth[i]];
    ++total;
  }
  if (total == 0) throw DataError("no evaluable points (all truth labels are 0)");
  std::size_t agree = 0;
  for (const auto& [cluster, counts] : table) {
    std::size_t best = 0;
    for (const auto& [cls, c] : counts) best = std::max(best, c);
    agree += best;
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

std::vector<PurityPoint> purity_curve(const std::vector<LabelVector>& family, const LabelVector& truth) {
  std::vector<PurityPoint> out;
  out.reserve(family.size());
  for (std::size_t l = 0; l < family.size(); ++l) out.push_back({l + 1, purity(family[l], truth)});
  return out;
}

void write_purity_csv(const std::filesystem::path& path, const std::vector<PurityPoint>& curve,
                      const std::string& method, bool append) {
  const bool header = !append || !std::filesystem::exists(path);
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  if (header) out << "l,purity,method\n";
  for (const auto& p : curve) out << p.clusters << ',' << p.purity << ',' << method << '\n';
}

}  // namespace diffal
