#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "diffal/dataset.hpp"
#include "diffal/diffusion_geometry.hpp"
#include "diffal/errors.hpp"

namespace diffal {

// Raised when a query would exceed the oracle's cap.
class BudgetExhausted : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Label source for active learning. Repeated queries of the same index are
// answered from memory and count once against the budget.
class Oracle {
 public:
  explicit Oracle(std::size_t budget) : budget_(budget) {}
  virtual ~Oracle() = default;

  int query(std::size_t index);
  std::size_t queries_used() const { return answers_.size(); }
  std::size_t budget() const { return budget_; }

 protected:
  virtual int answer(std::size_t index) = 0;

 private:
  std::size_t budget_;
  std::map<std::size_t, int> answers_;
};

class GroundTruthOracle final : public Oracle {
 public:
  // Throws DataError unless truth is fully labeled.
  GroundTruthOracle(LabelVector truth, std::size_t budget);

 protected:
  int answer(std::size_t index) override;

 private:
  LabelVector truth_;
};

// Interactive oracle: writes "QUERY <index>" (optionally followed by the
// point's coordinates on a "# " comment line) and reads one integer label per
// query.
class StreamOracle final : public Oracle {
 public:
  StreamOracle(std::istream& in, std::ostream& out, std::size_t budget,
               const PointCloud* cloud = nullptr);

 protected:
  int answer(std::size_t index) override;

 private:
  std::istream& in_;
  std::ostream& out_;
  const PointCloud* cloud_;
};

struct ActiveResult {
  LabelVector labels;
  std::vector<std::size_t> queried_indices;   // in query order
  std::size_t queries_used = 0;
  std::vector<int> observed_classes;          // distinct oracle answers, ascending
};

// Thrown by land() when the oracle runs out mid-run; carries the labels
// gathered so far.
class PartialResultError : public BudgetExhausted {
 public:
  PartialResultError(const std::string& what, ActiveResult partial)
      : BudgetExhausted(what), partial_(std::move(partial)) {}
  const ActiveResult& partial() const { return partial_; }

 private:
  ActiveResult partial_;
};

// Queries the top-B mode-score points in order, then propagates.
ActiveResult land(const ModeScores& scores, const DensityEstimate& density,
                  const DiffusionEmbedding& emb, std::size_t budget, Oracle& oracle);

// Shared by land and its baselines: query `points` in order, then propagate.
ActiveResult query_and_propagate(const std::vector<std::size_t>& points,
                                 const DensityEstimate& density, const DiffusionEmbedding& emb,
                                 Oracle& oracle, std::span<const std::size_t> nearest_higher = {});

}  // namespace diffal
