#include "solicit/experiment.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <unordered_map>

#include "json.hpp"
#include "solicit/error.h"
#include "solicit/stats.h"

namespace solicit {

namespace {

const std::uint64_t kStreamTruth = Fnv1a64("truth");
const std::uint64_t kStreamRandomArm = Fnv1a64("random-arm");
const std::uint64_t kStreamBinaryArm = Fnv1a64("binary-arm");

std::optional<Timestamp> LastPost(const Corpus& corpus, const std::string& id,
                                  Timestamp t) {
  const auto timeline = corpus.Timeline(id);
  auto it = std::upper_bound(
      timeline.begin(), timeline.end(), t,
      [](Timestamp v, const PostRecord* p) { return v < p->timestamp; });
  if (it == timeline.begin()) return std::nullopt;
  return (*std::prev(it))->timestamp;
}

// Uniform sample of `k` ids, in the input order.
std::vector<std::string> Sample(const std::vector<std::string>& ids,
                                std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(ids.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + rng.Below(idx.size() - i)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  for (std::size_t i : idx) out.push_back(ids[i]);
  return out;
}

ArmResult Score(const std::string& name, const std::vector<std::string>& ids,
                const std::unordered_map<std::string, int>& truth) {
  const SelectionEvaluation ev = EvaluateSelection(ids, truth);
  ArmResult arm;
  arm.name = name;
  arm.sent = ev.selected;
  arm.responded = ev.responders_selected;
  arm.rate = ev.rate;
  arm.recall = ev.recall;
  arm.empty = ev.empty_selection;
  return arm;
}

std::vector<std::string> Slice(const RankedList& ranked, std::size_t begin,
                               std::size_t end) {
  std::vector<std::string> out;
  for (std::size_t r = begin; r <= end; ++r) out.push_back(ranked[r - 1].id);
  return out;
}

// The engine arm: a fixed-length training interval whose length matches the
// budget's share of the candidates, mapped and resized to the budget.
std::vector<std::string> EngineSelection(const RankedList& training,
                                         const RankedList& candidates,
                                         std::size_t budget) {
  const std::size_t n = training.size();
  const std::size_t m = candidates.size();
  const auto length = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(static_cast<double>(budget) *
                                         static_cast<double>(n) /
                                         static_cast<double>(m))),
      1, n);
  IntervalConstraints c;
  c.min_fraction = 0.0;
  c.min_length = length;
  c.max_length = length;
  const IntervalSelection sel = RecommendFromRanked(training, candidates, c);
  const auto [b, e] = FitToSize(sel.test_begin, sel.test_end, m, budget);
  return Slice(candidates, b, e);
}

}  // namespace

std::pair<std::size_t, std::size_t> FitToSize(std::size_t begin,
                                              std::size_t end, std::size_t m,
                                              std::size_t size) {
  if (size == 0 || size > m || begin < 1 || begin > end || end > m) {
    throw ContractError("cannot resize the interval to " +
                        std::to_string(size) + " of " + std::to_string(m));
  }
  if (end - begin + 1 >= size) return {begin, begin + size - 1};
  end = std::min(m, begin + size - 1);
  begin = end + 1 - size;
  return {begin, end};
}

Benchmark MakeBenchmark(const Population& population) {
  return Benchmark{population.config, population.agents,
                   population.BuildCorpus(), population.candidate_ids};
}

Benchmark LoadBenchmark(const std::string& dir) {
  const std::filesystem::path d(dir);
  SimConfig config = SimConfig::FromJson(
      ReadFile((d / "sim_config.json").string()),
      (d / "sim_config.json").string());
  std::vector<AgentSpec> agents = ReadAgents((d / "agents.jsonl").string());
  std::vector<std::string> candidates;
  for (const std::string& line : ReadLines((d / "candidates.txt").string())) {
    if (!line.empty()) candidates.push_back(line);
  }
  return Benchmark{std::move(config), std::move(agents), LoadCorpusDir(dir),
                   std::move(candidates)};
}

const ArmResult& ExperimentReport::Arm(const std::string& name) const {
  for (const ArmResult& a : arms) {
    if (a.name == name) return a;
  }
  throw ContractError("no arm named '" + name + "'");
}

ExperimentReport RunExperiment(const Benchmark& bench,
                               const FeatureExtractor& extractor,
                               const ExperimentOptions& options) {
  const std::size_t m = bench.candidate_ids.size();
  if (4 * options.budget > m) {
    throw ConfigError("budget " + std::to_string(options.budget) +
                      " needs at least " + std::to_string(4 * options.budget) +
                      " candidates, have " + std::to_string(m));
  }
  ExperimentReport report;
  report.seed = options.seed;
  report.config_digest = bench.config.Digest();
  report.budget = options.budget;
  report.candidates = m;
  report.live_time = bench.config.live_time();

  std::unordered_map<std::string, AgentSpec const*> agent_by_id;
  for (const AgentSpec& a : bench.agents) agent_by_id[a.agent_id] = &a;

  // One uniform draw per candidate decides the outcome for every arm.
  std::unordered_map<std::string, int> truth;
  for (const std::string& id : bench.candidate_ids) {
    auto it = agent_by_id.find(id);
    if (it == agent_by_id.end()) {
      throw IntegrityError("candidate '" + id + "' has no agent spec");
    }
    const double p =
        TrueResponseProbability(*it->second, bench.config.response,
                                report.live_time,
                                LastPost(bench.corpus, id, report.live_time));
    Rng rng(MixSeed(MixSeed(options.seed, kStreamTruth), Fnv1a64(id)));
    const int label = rng.Uniform() < p ? 1 : 0;
    truth.emplace(id, label);
    report.candidate_responders += static_cast<std::size_t>(label);
  }

  const FeatureTable train_table = FeaturizeSolicitations(bench.corpus, extractor);
  report.training_rows = train_table.rows();
  report.training_positives = static_cast<std::size_t>(
      std::count(train_table.labels.begin(), train_table.labels.end(), 1));

  if (options.budget == 0) {
    for (const char* name : {"engine", "random", "topk", "binary"}) {
      report.arms.push_back(Score(name, {}, truth));
    }
    return report;
  }

  const FeatureTable cand_table =
      FeaturizeUsers(bench.corpus, extractor, bench.candidate_ids,
                     report.live_time);
  const LabeledDataset data = LabeledDataset::FromTable(train_table);

  auto rank_with = [&](const TrainOptions& train) {
    const TrainedModel model = Train(data, train);
    return std::make_pair(RankCandidates(model, train_table),
                          RankCandidates(model, cand_table));
  };
  const auto [train_ranked, cand_ranked] = rank_with(options.train);

  report.arms.push_back(Score(
      "engine", EngineSelection(train_ranked, cand_ranked, options.budget),
      truth));
  report.arms.push_back(Score(
      "random",
      Sample(bench.candidate_ids, options.budget,
             MixSeed(options.seed, kStreamRandomArm)),
      truth));
  report.arms.push_back(
      Score("topk", BaselineTopK(cand_ranked, options.budget), truth));
  BinarySelection binary = BaselineBinary(cand_ranked);
  if (binary.ids.size() > options.budget) {
    binary.ids = Sample(binary.ids, options.budget,
                        MixSeed(options.seed, kStreamBinaryArm));
  }
  report.arms.push_back(Score("binary", binary.ids, truth));

  std::vector<int> train_labels;
  for (const RankedEntry& e : train_ranked) train_labels.push_back(*e.label);
  for (double size : options.interval_sizes) {
    if (!(size > 0.0 && size <= 1.0)) {
      throw ConfigError("interval sizes must lie in (0, 1]");
    }
    const std::size_t n = train_ranked.size();
    const auto length = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(size * static_cast<double>(n))),
        1, n);
    IntervalConstraints c;
    c.min_fraction = 0.0;
    c.min_length = length;
    c.max_length = length;
    const IntervalSelection sel = RecommendFromRanked(train_ranked, cand_ranked, c);
    IntervalSweepRow row;
    row.size = size;
    row.train = sel.train;
    row.train_recall =
        report.training_positives > 0
            ? static_cast<double>(sel.train.positives) /
                  static_cast<double>(report.training_positives)
            : 0.0;
    row.test_begin = sel.test_begin;
    row.test_end = sel.test_end;
    const ArmResult test = Score("interval", sel.selected_ids, truth);
    row.test_rate = test.rate;
    row.test_recall = test.recall;
    report.interval_sweep.push_back(row);
  }

  for (double ratio : options.cost_ratios) {
    TrainOptions train = options.train;
    train.cost = CostConfig{ratio, 1.0};
    const auto [tr, cr] = rank_with(train);
    const ArmResult arm =
        Score("engine", EngineSelection(tr, cr, options.budget), truth);
    report.cost_sweep.push_back({ratio, arm.rate, arm.recall});
  }
  return report;
}

std::string ExperimentReport::ToJson() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["config_digest"] = config_digest;
  j["budget"] = budget;
  j["live_time"] = live_time;
  j["training_rows"] = training_rows;
  j["training_positives"] = training_positives;
  j["candidates"] = candidates;
  j["candidate_responders"] = candidate_responders;
  j["arms"] = nlohmann::ordered_json::array();
  for (const ArmResult& a : arms) {
    j["arms"].push_back({{"arm", a.name},
                         {"sent", a.sent},
                         {"responded", a.responded},
                         {"rate", a.rate},
                         {"recall", a.recall},
                         {"empty", a.empty}});
  }
  j["interval_sweep"] = nlohmann::ordered_json::array();
  for (const IntervalSweepRow& r : interval_sweep) {
    j["interval_sweep"].push_back(
        {{"size", r.size},
         {"train_interval", {r.train.begin, r.train.end}},
         {"train_rate", r.train.rate},
         {"train_recall", r.train_recall},
         {"test_interval", {r.test_begin, r.test_end}},
         {"test_rate", r.test_rate},
         {"test_recall", r.test_recall}});
  }
  j["cost_sweep"] = nlohmann::ordered_json::array();
  for (const CostSweepRow& r : cost_sweep) {
    j["cost_sweep"].push_back(
        {{"benefit_cost_ratio", r.ratio}, {"rate", r.rate}, {"recall", r.recall}});
  }
  return j.dump(2);
}

}  // namespace solicit
