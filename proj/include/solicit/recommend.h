#ifndef SOLICIT_RECOMMEND_H_
#define SOLICIT_RECOMMEND_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "solicit/features.h"
#include "solicit/model.h"

namespace solicit {

struct RankedEntry {
  std::string id;
  double probability = 0.0;
  std::optional<int> label;
};

// Sorted by probability descending, ties by id ascending.
using RankedList = std::vector<RankedEntry>;

// Sorts entries into ranked order. Throws ContractError on duplicate ids.
RankedList SortRanked(std::vector<RankedEntry> entries);

// Scores every row of the table with the model and ranks them; labels are
// carried over when the table has them.
RankedList RankCandidates(const TrainedModel& model, const FeatureTable& table);

struct IntervalConstraints {
  double min_fraction = 0.05;
  std::size_t min_length = 1;
  double top_exclusion_fraction = 0.05;
  // Longest admissible interval; 0 means no bound.
  std::size_t max_length = 0;

  // L = max(ceil(min_fraction * n), min_length, 1).
  std::size_t MinLength(std::size_t n) const;
};

struct TrainInterval {
  std::size_t begin = 1;  // 1-based, inclusive
  std::size_t end = 1;
  double rate = 0.0;
  std::size_t positives = 0;
  std::size_t length() const { return end - begin + 1; }
};

// Best-rate interval of the 0/1 labels in rank order under the constraints.
// Ties go to the smaller start, then the longer interval. Throws
// ConstraintError when no admissible interval exists.
TrainInterval SelectIntervalTrain(std::span<const int> ranked_labels,
                                  const IntervalConstraints& constraints);

// Percentile mapping of a 1-based interval on n ranks onto m ranks.
std::pair<std::size_t, std::size_t> MapInterval(std::size_t begin,
                                                std::size_t end, std::size_t n,
                                                std::size_t m);

struct IntervalSelection {
  TrainInterval train;
  std::size_t train_size = 0;
  std::size_t test_begin = 1;
  std::size_t test_end = 1;
  std::size_t candidate_count = 0;
  std::vector<std::string> selected_ids;
  IntervalConstraints constraints;
  // Set when the mapped interval was widened to honour the minimum size on
  // the candidate side.
  bool widened = false;

  std::string ToJson() const;
};

// Picks the training interval on the labelled ranking, maps it onto the
// candidate ranking and returns the candidates in the mapped range. The
// mapped range is widened downwards (then upwards) when it is shorter than
// the constraints' minimum length for m candidates.
IntervalSelection RecommendFromRanked(const RankedList& training,
                                      const RankedList& candidates,
                                      const IntervalConstraints& constraints);

IntervalSelection Recommend(const TrainedModel& model,
                            const FeatureTable& training,
                            const FeatureTable& candidates,
                            const IntervalConstraints& constraints);

struct BinarySelection {
  std::vector<std::string> ids;
  bool empty = true;
};

// Candidates with probability >= 0.5, in ranked order.
BinarySelection BaselineBinary(const RankedList& candidates);

// First k candidates; ContractError unless 1 <= k <= m.
std::vector<std::string> BaselineTopK(const RankedList& candidates,
                                      std::size_t k);

struct SelectionEvaluation {
  std::size_t selected = 0;
  std::size_t responders_selected = 0;
  std::size_t total_responders = 0;
  double rate = 0.0;
  double recall = 0.0;
  bool empty_selection = false;
  bool no_responders = false;
};

// Throws ContractError for ids without a ground-truth label.
SelectionEvaluation EvaluateSelection(
    std::span<const std::string> selected,
    const std::unordered_map<std::string, int>& truth);

}  // namespace solicit

#endif  // SOLICIT_RECOMMEND_H_
