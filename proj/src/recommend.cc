#include "solicit/recommend.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "json.hpp"
#include "solicit/error.h"

namespace solicit {

RankedList SortRanked(std::vector<RankedEntry> entries) {
  std::unordered_set<std::string> seen;
  for (const RankedEntry& e : entries) {
    if (!seen.insert(e.id).second) {
      throw ContractError("duplicate candidate id '" + e.id + "'");
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const RankedEntry& a, const RankedEntry& b) {
              if (a.probability != b.probability) {
                return a.probability > b.probability;
              }
              return a.id < b.id;
            });
  return entries;
}

RankedList RankCandidates(const TrainedModel& model, const FeatureTable& table) {
  if (table.feature_names != model.feature_names) {
    throw ContractError("candidate features do not match the model's features");
  }
  // A user with several rows is keyed by user and query time.
  std::unordered_map<std::string, int> occurrences;
  for (const std::string& id : table.user_ids) ++occurrences[id];
  std::vector<RankedEntry> entries;
  entries.reserve(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    RankedEntry e;
    e.id = table.user_ids[r];
    if (occurrences[e.id] > 1) {
      e.id += "@" + std::to_string(table.query_times[r]);
    }
    e.probability = model.PredictProba(table.values[r], table.missing[r]);
    if (table.labeled()) e.label = table.labels[r];
    entries.push_back(std::move(e));
  }
  return SortRanked(std::move(entries));
}

std::size_t IntervalConstraints::MinLength(std::size_t n) const {
  const auto by_fraction =
      static_cast<std::size_t>(std::ceil(min_fraction * static_cast<double>(n) -
                                         1e-9));
  return std::max({by_fraction, min_length, std::size_t{1}});
}

TrainInterval SelectIntervalTrain(std::span<const int> ranked_labels,
                                  const IntervalConstraints& constraints) {
  const std::size_t n = ranked_labels.size();
  if (n == 0) throw ConstraintError("cannot select an interval from no ranks");
  if (!(constraints.min_fraction >= 0.0 && constraints.min_fraction <= 1.0)) {
    throw ConstraintError("min_fraction must lie in [0, 1]");
  }
  const std::size_t min_len = constraints.MinLength(n);
  const std::size_t max_len =
      constraints.max_length == 0 ? n : std::min(constraints.max_length, n);
  if (min_len > n || min_len > max_len) {
    throw ConstraintError("minimum interval length " + std::to_string(min_len) +
                          " exceeds the admissible range (n = " +
                          std::to_string(n) + ")");
  }
  const auto top = static_cast<std::size_t>(std::ceil(
      constraints.top_exclusion_fraction * static_cast<double>(n) - 1e-9));

  std::vector<std::size_t> prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + (ranked_labels[i] == 1 ? 1 : 0);
  }
  TrainInterval best;
  bool found = false;
  for (std::size_t i = 1; i + min_len - 1 <= n; ++i) {
    const std::size_t j_hi = std::min(n, i + max_len - 1);
    for (std::size_t j = j_hi; j >= i + min_len - 1; --j) {
      const std::size_t len = j - i + 1;
      if (j <= top && len < min_len) continue;
      const std::size_t pos = prefix[j] - prefix[i - 1];
      // pos/len > best.positives/best.length(), exactly.
      if (!found || pos * best.length() > best.positives * len) {
        best.begin = i;
        best.end = j;
        best.positives = pos;
        found = true;
      }
    }
  }
  if (!found) throw ConstraintError("no admissible interval");
  best.rate = static_cast<double>(best.positives) /
              static_cast<double>(best.length());
  return best;
}

std::pair<std::size_t, std::size_t> MapInterval(std::size_t begin,
                                                std::size_t end, std::size_t n,
                                                std::size_t m) {
  if (!(begin >= 1 && begin <= end && end <= n) || m == 0) {
    throw ContractError("map_interval needs 1 <= i <= j <= n and m >= 1");
  }
  auto map = [&](std::size_t r) {
    const std::size_t v = (2 * r * m + n) / (2 * n);
    return std::clamp<std::size_t>(v, 1, m);
  };
  std::size_t s = map(begin);
  const std::size_t e = map(end);
  if (s > e) s = e;
  return {s, e};
}

IntervalSelection RecommendFromRanked(const RankedList& training,
                                      const RankedList& candidates,
                                      const IntervalConstraints& constraints) {
  if (training.empty() || candidates.empty()) {
    throw ContractError("recommendation needs training and candidate rows");
  }
  std::vector<int> labels;
  labels.reserve(training.size());
  for (const RankedEntry& e : training) {
    if (!e.label) throw ContractError("training ranking lacks labels");
    labels.push_back(*e.label);
  }
  IntervalSelection sel;
  sel.constraints = constraints;
  sel.train = SelectIntervalTrain(labels, constraints);
  sel.train_size = training.size();
  sel.candidate_count = candidates.size();
  const std::size_t m = candidates.size();
  auto [s, e] = MapInterval(sel.train.begin, sel.train.end, training.size(), m);
  const std::size_t want = std::min(constraints.MinLength(m), m);
  if (e - s + 1 < want) {
    sel.widened = true;
    e = std::min(m, s + want - 1);
    s = e + 1 - want;
  }
  sel.test_begin = s;
  sel.test_end = e;
  for (std::size_t r = s; r <= e; ++r) {
    sel.selected_ids.push_back(candidates[r - 1].id);
  }
  return sel;
}

IntervalSelection Recommend(const TrainedModel& model,
                            const FeatureTable& training,
                            const FeatureTable& candidates,
                            const IntervalConstraints& constraints) {
  if (!training.labeled()) {
    throw ContractError("training table has no labels");
  }
  return RecommendFromRanked(RankCandidates(model, training),
                             RankCandidates(model, candidates), constraints);
}

std::string IntervalSelection::ToJson() const {
  nlohmann::ordered_json j;
  j["train_interval"] = {train.begin, train.end};
  j["train_rate"] = train.rate;
  j["train_size"] = train_size;
  j["test_interval"] = {test_begin, test_end};
  j["candidate_count"] = candidate_count;
  j["selected_ids"] = selected_ids;
  j["widened"] = widened;
  j["constraints"] = {{"min_fraction", constraints.min_fraction},
                      {"min_length", constraints.min_length},
                      {"top_exclusion_fraction",
                       constraints.top_exclusion_fraction},
                      {"max_length", constraints.max_length}};
  return j.dump(2);
}

BinarySelection BaselineBinary(const RankedList& candidates) {
  BinarySelection out;
  for (const RankedEntry& e : candidates) {
    if (e.probability >= 0.5) out.ids.push_back(e.id);
  }
  out.empty = out.ids.empty();
  return out;
}

std::vector<std::string> BaselineTopK(const RankedList& candidates,
                                      std::size_t k) {
  if (k < 1 || k > candidates.size()) {
    throw ContractError("top-k needs 1 <= k <= " +
                        std::to_string(candidates.size()) + ", got " +
                        std::to_string(k));
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(candidates[i].id);
  return out;
}

SelectionEvaluation EvaluateSelection(
    std::span<const std::string> selected,
    const std::unordered_map<std::string, int>& truth) {
  SelectionEvaluation ev;
  for (const auto& [id, label] : truth) {
    if (label == 1) ++ev.total_responders;
  }
  for (const std::string& id : selected) {
    auto it = truth.find(id);
    if (it == truth.end()) {
      throw ContractError("selected id '" + id + "' has no ground truth");
    }
    ++ev.selected;
    if (it->second == 1) ++ev.responders_selected;
  }
  ev.empty_selection = ev.selected == 0;
  ev.no_responders = ev.total_responders == 0;
  if (!ev.empty_selection) {
    ev.rate = static_cast<double>(ev.responders_selected) /
              static_cast<double>(ev.selected);
  }
  if (!ev.no_responders) {
    ev.recall = static_cast<double>(ev.responders_selected) /
                static_cast<double>(ev.total_responders);
  }
  return ev;
}

}  // namespace solicit
