#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "diffal/dataset.hpp"

namespace diffal {

// Counts over points whose truth label is nonzero. Rows are truth classes,
// columns predicted labels, both in ascending order of appearance.
class ConfusionMatrix {
 public:
  ConfusionMatrix(const LabelVector& pred, const LabelVector& truth);

  const std::vector<int>& truth_classes() const { return truth_classes_; }
  const std::vector<int>& pred_classes() const { return pred_classes_; }
  std::size_t count(std::size_t row, std::size_t col) const { return counts_[row * pred_classes_.size() + col]; }
  std::size_t row_total(std::size_t row) const;
  std::size_t col_total(std::size_t col) const;
  std::size_t total() const { return total_; }
  std::size_t correct() const;

 private:
  std::vector<int> truth_classes_;
  std::vector<int> pred_classes_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

// Evaluable points are those with a nonzero truth label; each function
// throws DataError when there are none.
double overall_accuracy(const LabelVector& pred, const LabelVector& truth);
double average_accuracy(const LabelVector& pred, const LabelVector& truth);
double cohens_kappa(const LabelVector& pred, const LabelVector& truth);

// Renames predicted clusters by the assignment to truth classes that
// maximizes agreement. Clusters left unmatched get fresh ids above every
// truth class.
LabelVector align_labels(const LabelVector& pred, const LabelVector& truth);

// Fraction of evaluable points carrying their cluster's majority class.
double purity(const LabelVector& clustering, const LabelVector& truth);

struct PurityPoint {
  std::size_t clusters;
  double purity;
};

// `family[l - 1]` is the clustering with l clusters.
std::vector<PurityPoint> purity_curve(const std::vector<LabelVector>& family, const LabelVector& truth);

// Appends rows "l,purity,method"; writes a header when the file is new.
void write_purity_csv(const std::filesystem::path& path, const std::vector<PurityPoint>& curve,
                      const std::string& method, bool append = false);

// Maximum-weight perfect assignment on a rows x cols matrix (rows <= cols).
// Returns the column assigned to each row.
std::vector<std::size_t> max_weight_assignment(const std::vector<std::vector<double>>& weights);

}  // namespace diffal
