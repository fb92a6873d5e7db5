#include "solicit/evaluation.h"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "solicit/error.h"

namespace solicit {

double RocAuc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ContractError("scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1..j share the mid-rank.
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        pos_rank_sum += mid;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) {
    throw EvaluationError("AUC is undefined without both classes");
  }
  const double np = static_cast<double>(pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(neg));
}

Metrics ComputeMetrics(std::span<const double> probabilities,
                       std::span<const int> labels, double threshold) {
  Metrics m;
  m.auc = RocAuc(probabilities, labels);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= threshold;
    if (predicted && labels[i] == 1) ++tp;
    if (predicted && labels[i] == 0) ++fp;
    if (!predicted && labels[i] == 1) ++fn;
  }
  m.no_predicted_positive = tp + fp == 0;
  m.precision = m.no_predicted_positive
                    ? 0.0
                    : static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

std::vector<int> StratifiedFolds(std::span<const int> labels, int k,
                                 std::uint64_t seed) {
  if (k < 2) throw EvaluationError("k-fold needs k >= 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == 1 ? pos : neg).push_back(i);
  }
  const auto kk = static_cast<std::size_t>(k);
  if (pos.size() < kk || neg.size() < kk) {
    throw EvaluationError("each class needs at least " + std::to_string(k) +
                          " examples (positives " + std::to_string(pos.size()) +
                          ", negatives " + std::to_string(neg.size()) + ")");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<int> fold(labels.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    fold[pos[i]] = static_cast<int>(i % kk);
  }
  // Continue the deal where positives stopped so total sizes stay balanced.
  for (std::size_t j = 0; j < neg.size(); ++j) {
    fold[neg[j]] = static_cast<int>((pos.size() + j) % kk);
  }
  return fold;
}

EvalReport KFoldEvaluate(const LabeledDataset& data, int k,
                         const TrainOptions& options, std::uint64_t seed) {
  options.cost.Validate();
  const std::vector<int> fold = StratifiedFolds(data.labels, k, seed);
  EvalReport report;
  report.kind = options.kind;
  report.k = k;
  report.seed = seed;
  report.cost = options.cost;
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < fold.size(); ++i) {
      (fold[i] == f ? test_idx : train_idx).push_back(i);
    }
    const TrainedModel model = Train(data.Subset(train_idx), options);
    std::vector<double> probs;
    std::vector<int> labels;
    for (std::size_t i : test_idx) {
      probs.push_back(model.PredictProba(data.row(i), data.row_missing(i)));
      labels.push_back(data.labels[i]);
    }
    report.folds.push_back(ComputeMetrics(probs, labels));
  }
  const double kd = static_cast<double>(k);
  report.mean.auc = 0.0;
  for (const Metrics& m : report.folds) {
    report.mean.precision += m.precision / kd;
    report.mean.recall += m.recall / kd;
    report.mean.f1 += m.f1 / kd;
    report.mean.auc += m.auc / kd;
    report.mean.no_predicted_positive |= m.no_predicted_positive;
  }
  return report;
}

namespace {

nlohmann::json MetricsJson(const Metrics& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"auc", m.auc},
          {"no_predicted_positive", m.no_predicted_positive}};
}

}  // namespace

std::string EvalReport::ToJson() const {
  nlohmann::json j;
  j["kind"] = ModelKindName(kind);
  j["k"] = k;
  j["seed"] = seed;
  j["cost"] = {{"benefit", cost.benefit}, {"cost", cost.cost}};
  j["folds"] = nlohmann::json::array();
  for (const Metrics& m : folds) j["folds"].push_back(MetricsJson(m));
  j["mean"] = MetricsJson(mean);
  return j.dump(2);
}

std::string EvalReport::ToTable() const {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-6s %10s %10s %10s %10s\n", "fold",
                "precision", "recall", "f1", "auc");
  out << line;
  auto row = [&](const std::string& label, const Metrics& m) {
    std::snprintf(line, sizeof line, "%-6s %10.4f %10.4f %10.4f %10.4f\n",
                  label.c_str(), m.precision, m.recall, m.f1, m.auc);
    out << line;
  };
  for (std::size_t i = 0; i < folds.size(); ++i) {
    row(std::to_string(i + 1), folds[i]);
  }
  row("mean", mean);
  return out.str();
}

}  // namespace solicit
