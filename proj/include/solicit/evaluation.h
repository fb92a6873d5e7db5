#ifndef SOLICIT_EVALUATION_H_
#define SOLICIT_EVALUATION_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "solicit/model.h"

namespace solicit {

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.5;
  // Set when nothing was predicted positive; precision is then reported as 0.
  bool no_predicted_positive = false;
};

// Area under the ROC curve from mid-ranks (Mann-Whitney U), ties count 1/2.
// Throws EvaluationError unless both classes are present.
double RocAuc(std::span<const double> scores, std::span<const int> labels);

// Precision/recall/F1 of the positive class at `p >= threshold`, plus AUC.
Metrics ComputeMetrics(std::span<const double> probabilities,
                       std::span<const int> labels, double threshold = 0.5);

// Stratified fold index per row: each class is shuffled with `seed` and dealt
// round-robin, so fold sizes differ by at most one overall and per class.
// Throws EvaluationError when a class has fewer than k members.
std::vector<int> StratifiedFolds(std::span<const int> labels, int k,
                                 std::uint64_t seed);

struct EvalReport {
  ModelKind kind = ModelKind::kLogistic;
  int k = 5;
  std::uint64_t seed = 0;
  CostConfig cost;
  std::vector<Metrics> folds;
  Metrics mean;

  std::string ToJson() const;
  std::string ToTable() const;
};

// k-fold cross-validation; the standardizer and the weights are fitted on each
// training split only.
EvalReport KFoldEvaluate(const LabeledDataset& data, int k,
                         const TrainOptions& options, std::uint64_t seed);

}  // namespace solicit

#endif  // SOLICIT_EVALUATION_H_
