#ifndef SOLICIT_EXPERIMENT_H_
#define SOLICIT_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "solicit/features.h"
#include "solicit/model.h"
#include "solicit/recommend.h"
#include "solicit/simulator.h"

namespace solicit {

// Everything a live experiment needs: the observable corpus (with the prior
// solicitations of the training pool), the hidden agent traits and the
// held-out candidates.
struct Benchmark {
  SimConfig config;
  std::vector<AgentSpec> agents;
  Corpus corpus;
  std::vector<std::string> candidate_ids;
};

Benchmark MakeBenchmark(const Population& population);
// Reads a directory written by WritePopulation.
Benchmark LoadBenchmark(const std::string& dir);

struct ExperimentOptions {
  std::size_t budget = 100;
  TrainOptions train;
  std::uint64_t seed = 42;
  // Fixed interval sizes as fractions of the training ranking.
  std::vector<double> interval_sizes;
  // Benefit/cost ratios (C = 1).
  std::vector<double> cost_ratios;
};

struct ArmResult {
  std::string name;
  std::size_t sent = 0;
  std::size_t responded = 0;
  double rate = 0.0;
  double recall = 0.0;
  bool empty = false;
};

struct IntervalSweepRow {
  double size = 0.0;
  TrainInterval train;
  double train_recall = 0.0;
  std::size_t test_begin = 0;
  std::size_t test_end = 0;
  double test_rate = 0.0;
  double test_recall = 0.0;
};

struct CostSweepRow {
  double ratio = 0.0;
  double rate = 0.0;
  double recall = 0.0;
};

struct ExperimentReport {
  std::uint64_t seed = 0;
  std::string config_digest;
  std::size_t budget = 0;
  std::size_t training_rows = 0;
  std::size_t training_positives = 0;
  std::size_t candidates = 0;
  std::size_t candidate_responders = 0;
  Timestamp live_time = 0;
  std::vector<ArmResult> arms;
  std::vector<IntervalSweepRow> interval_sweep;
  std::vector<CostSweepRow> cost_sweep;

  const ArmResult& Arm(const std::string& name) const;
  std::string ToJson() const;
};

// Trains on the prior solicitations, scores the candidates at the live time
// and sends `budget` questions per arm (engine, random, topk, binary). All
// arms share one ground-truth draw per candidate. Throws ConfigError when the
// candidates number fewer than four budgets.
ExperimentReport RunExperiment(const Benchmark& bench,
                               const FeatureExtractor& extractor,
                               const ExperimentOptions& options);

// Contiguous ranks [begin, end] (1-based) resized to exactly `size` entries
// within [1, m], growing towards lower ranks first.
std::pair<std::size_t, std::size_t> FitToSize(std::size_t begin,
                                              std::size_t end, std::size_t m,
                                              std::size_t size);

}  // namespace solicit

#endif  // SOLICIT_EXPERIMENT_H_
