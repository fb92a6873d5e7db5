#include "solicit/cli.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "solicit/analysis.h"
#include "solicit/error.h"
#include "solicit/evaluation.h"
#include "solicit/experiment.h"
#include "solicit/service.h"

#ifndef SOLICIT_DATA_DIR
#define SOLICIT_DATA_DIR "data"
#endif

namespace solicit {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string DataPath(const char* name) {
  return (fs::path(SOLICIT_DATA_DIR) / name).string();
}

// Provenance record written next to every output.
class Manifest {
 public:
  Manifest(const CLI::App& sub, std::uint64_t seed)
      : start_(std::chrono::steady_clock::now()) {
    j_["subcommand"] = sub.get_name();
    j_["seed"] = seed;
    json flags = json::object();
    for (const CLI::Option* o : sub.get_options()) {
      const std::string name = o->get_name(false, true);
      if (name.empty() || name == "--help" || name == "-h") continue;
      std::string key = o->get_single_name();
      const auto results = o->results();
      if (!results.empty()) {
        flags[key] = results.size() == 1 ? json(results.front()) : json(results);
      } else if (!o->get_default_str().empty()) {
        flags[key] = o->get_default_str();
      }
    }
    j_["flags"] = std::move(flags);
    j_["inputs"] = json::object();
    j_["outputs"] = json::array();
  }

  void Input(const std::string& path) {
    if (fs::is_directory(path)) {
      json files = json::object();
      std::vector<fs::path> entries;
      for (const auto& e : fs::directory_iterator(path)) {
        if (e.is_regular_file() && e.path().filename() != "manifest.json") {
          entries.push_back(e.path());
        }
      }
      std::sort(entries.begin(), entries.end());
      for (const auto& p : entries) {
        files[p.filename().string()] = FileDigest(p.string());
      }
      j_["inputs"][path] = std::move(files);
    } else {
      j_["inputs"][path] = FileDigest(path);
    }
  }
  void Output(const std::string& path) { j_["outputs"].push_back(path); }
  void Set(const std::string& key, json value) { j_[key] = std::move(value); }

  // Writes `<path>.manifest.json`, or `manifest.json` inside a directory.
  void Write(const std::string& output) {
    const double wall = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start_)
                            .count();
    j_["wall_time_seconds"] = wall;
    const std::string path = fs::is_directory(output)
                                 ? (fs::path(output) / "manifest.json").string()
                                 : output + ".manifest.json";
    WriteFile(path, j_.dump(2) + "\n");
  }

 private:
  json j_;
  std::chrono::steady_clock::time_point start_;
};

struct Common {
  std::uint64_t seed = 42;
  std::string lexicon = DataPath("lexicon.json");
  std::string coefficients = DataPath("coefficients.json");
};

void AddSeed(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed")
      ->envname("SOLICIT_SEED")
      ->capture_default_str();
}

void AddExtractor(CLI::App* sub, Common& c) {
  sub->add_option("--lexicon", c.lexicon, "Category lexicon JSON")
      ->capture_default_str();
  sub->add_option("--coefficients", c.coefficients, "Trait coefficient JSON")
      ->capture_default_str();
}

FeatureExtractor MakeExtractor(const Common& c) {
  CategoryLexicon lexicon = LoadLexicon(c.lexicon);
  TraitCoefficients traits = LoadTraitCoefficients(c.coefficients, lexicon);
  return FeatureExtractor(std::move(lexicon), std::move(traits));
}

struct TrainFlags {
  std::string kind = "logistic";
  double benefit = 2.0;
  double cost = 1.0;
  std::optional<double> lambda;
  std::string subset = subsets::kAll;
  double alpha = 0.05;
  int bins = 4;
};

void AddTrainFlags(CLI::App* sub, TrainFlags& t, bool with_subset) {
  sub->add_option("--kind", t.kind, "logistic or svm")
      ->check(CLI::IsMember({"logistic", "svm", "linear_svm"}))
      ->capture_default_str();
  sub->add_option("--benefit", t.benefit, "Benefit B of a response")
      ->capture_default_str();
  sub->add_option("--cost", t.cost, "Cost C of a question")->capture_default_str();
  sub->add_option("--lambda", t.lambda, "L2 strength (default per kind)");
  if (with_subset) {
    sub->add_option("--subset", t.subset, "Feature subset")
        ->check(CLI::IsMember(SubsetNames()))
        ->capture_default_str();
    sub->add_option("--alpha", t.alpha, "Significance level for subsets")
        ->capture_default_str();
    sub->add_option("--bins", t.bins, "Quantile bins for the chi-square test")
        ->capture_default_str();
  }
}

TrainOptions MakeTrainOptions(const TrainFlags& t, std::uint64_t seed) {
  TrainOptions o;
  o.kind = ParseModelKind(t.kind);
  o.cost = CostConfig{t.benefit, t.cost};
  o.cost.Validate();
  o.logistic.seed = seed;
  o.svm.seed = seed;
  if (t.lambda) {
    o.logistic.lambda = *t.lambda;
    o.svm.lambda = *t.lambda;
  }
  return o;
}

// Labelled dataset restricted to the requested subset.
LabeledDataset SubsetDataset(const FeatureTable& table, const TrainFlags& t) {
  if (!table.labeled()) {
    throw DataError("feature table has no 'responded' column");
  }
  if (t.subset == subsets::kAll) return LabeledDataset::FromTable(table);
  const LabeledDataset full = LabeledDataset::FromTable(table);
  const SignificanceReport report = AnalyzeSignificance(full, t.alpha, t.bins);
  return LabeledDataset::FromTable(
      table.Select(BuildSubset(t.subset, report, table.feature_names)));
}

std::vector<double> ParseList(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad ") + what + " entry '" + item + "'");
    }
  }
  return out;
}

std::string JoinPath(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

int Simulate(CLI::App* sub, const Common& c, const std::string& out_dir,
             const std::optional<std::string>& sim_config,
             std::optional<std::size_t> population, std::optional<int> days,
             const std::string& vocabulary_path, std::ostream& out) {
  SimConfig config;
  Manifest manifest(*sub, c.seed);
  if (sim_config) {
    config = SimConfig::FromJson(ReadFile(*sim_config), *sim_config);
    manifest.Input(*sim_config);
  }
  if (population) config.population = *population;
  if (days) config.days = *days;
  config.seed = c.seed;
  const Vocabulary vocabulary = LoadVocabulary(vocabulary_path);
  manifest.Input(vocabulary_path);
  const Population pop = GeneratePopulation(config, vocabulary);
  for (const std::string& p : WritePopulation(pop, out_dir)) manifest.Output(p);
  manifest.Set("config_digest", config.Digest());
  manifest.Write(out_dir);
  out << "wrote " << pop.agents.size() << " agents, " << pop.posts.size()
      << " posts, " << pop.solicitations.size() << " solicitations to "
      << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Response-likelihood modelling and targeting of information "
               "solicitations"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file");
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  Common common;

  // simulate
  std::string sim_out;
  std::optional<std::string> sim_config;
  std::optional<std::size_t> sim_population;
  std::optional<int> sim_days;
  std::string vocabulary = DataPath("vocabulary.json");
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a population");
  AddSeed(simulate, common);
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_option("--sim-config", sim_config, "Simulator config JSON");
  simulate->add_option("--population", sim_population, "Number of agents");
  simulate->add_option("--days", sim_days, "Simulated days");
  simulate->add_option("--vocabulary", vocabulary, "Category vocabulary JSON")
      ->capture_default_str();

  // featurize
  std::string feat_corpus;
  std::string feat_out;
  std::string feat_rows = "solicitations";
  std::optional<Timestamp> feat_time;
  std::optional<std::string> feat_users;
  CLI::App* featurize = app.add_subcommand("featurize", "Corpus to feature CSV");
  AddSeed(featurize, common);
  AddExtractor(featurize, common);
  featurize->add_option("--corpus", feat_corpus, "Corpus directory")->required();
  featurize->add_option("--out", feat_out, "Output CSV")->required();
  featurize->add_option("--rows", feat_rows, "solicitations or candidates")
      ->check(CLI::IsMember({"solicitations", "candidates"}))
      ->capture_default_str();
  featurize->add_option("--query-time", feat_time,
                        "Query time for candidate rows (UTC seconds)");
  featurize->add_option("--users", feat_users, "Candidate id list");

  // analyze
  std::string an_features;
  std::string an_out;
  double an_alpha = 0.05;
  int an_bins = 4;
  CLI::App* analyze = app.add_subcommand("analyze", "Feature significance");
  AddSeed(analyze, common);
  analyze->add_option("--features", an_features, "Labelled feature CSV")
      ->required();
  analyze->add_option("--out-dir", an_out, "Output directory")->required();
  analyze->add_option("--alpha", an_alpha, "Family-wise level")
      ->capture_default_str();
  analyze->add_option("--bins", an_bins, "Quantile bins")->capture_default_str();

  // train
  std::string tr_features;
  std::string tr_out;
  TrainFlags tr_flags;
  CLI::App* train = app.add_subcommand("train", "Feature CSV to model JSON");
  AddSeed(train, common);
  train->add_option("--features", tr_features, "Labelled feature CSV")
      ->required();
  train->add_option("--out", tr_out, "Model JSON")->required();
  AddTrainFlags(train, tr_flags, true);

  // eval
  std::string ev_features;
  std::optional<std::string> ev_out;
  int ev_k = 5;
  TrainFlags ev_flags;
  CLI::App* eval = app.add_subcommand("eval", "k-fold evaluation");
  AddSeed(eval, common);
  eval->add_option("--features", ev_features, "Labelled feature CSV")
      ->required();
  eval->add_option("--out", ev_out, "Report JSON");
  eval->add_option("--k", ev_k, "Folds")->capture_default_str();
  AddTrainFlags(eval, ev_flags, true);

  // recommend
  std::string rc_model;
  std::string rc_training;
  std::string rc_candidates;
  std::string rc_out;
  IntervalConstraints rc_constraints;
  CLI::App* recommend = app.add_subcommand("recommend", "Select candidates");
  AddSeed(recommend, common);
  recommend->add_option("--model", rc_model, "Model JSON")->required();
  recommend->add_option("--training", rc_training, "Labelled feature CSV")
      ->required();
  recommend->add_option("--candidates", rc_candidates, "Candidate feature CSV")
      ->required();
  recommend->add_option("--out", rc_out, "Selection JSON")->required();
  recommend->add_option("--min-fraction", rc_constraints.min_fraction,
                        "Smallest interval as a fraction of the ranking")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  recommend->add_option("--min-length", rc_constraints.min_length,
                        "Smallest interval length")
      ->capture_default_str();

  // experiment
  std::string ex_population;
  std::string ex_out;
  std::size_t ex_budget = 100;
  std::vector<std::string> ex_sweeps;
  std::string ex_sizes = "25,50,75,100";
  std::string ex_ratios = "2,5,10";
  TrainFlags ex_flags;
  CLI::App* experiment =
      app.add_subcommand("experiment", "Live experiment and sweeps");
  AddSeed(experiment, common);
  AddExtractor(experiment, common);
  experiment->add_option("--population", ex_population, "Population directory")
      ->required();
  experiment->add_option("--out", ex_out, "Report JSON")->required();
  experiment->add_option("--budget", ex_budget, "Questions per arm")
      ->capture_default_str();
  experiment->add_option("--sweep", ex_sweeps, "interval and/or cost")
      ->check(CLI::IsMember({"interval", "cost"}));
  experiment->add_option("--sizes", ex_sizes, "Interval sizes in percent")
      ->capture_default_str();
  experiment->add_option("--ratios", ex_ratios, "Benefit/cost ratios")
      ->capture_default_str();
  AddTrainFlags(experiment, ex_flags, false);

  // serve
  std::string sv_population;
  std::string sv_model;
  std::string sv_host = "127.0.0.1";
  int sv_port = 8080;
  std::string sv_mode = "manual";
  std::size_t sv_budget = 5;
  std::string sv_rules = DataPath("rules.json");
  std::optional<std::string> sv_log;
  CLI::App* serve = app.add_subcommand("serve", "Run the HTTP service");
  AddSeed(serve, common);
  AddExtractor(serve, common);
  serve->add_option("--population", sv_population, "Population directory")
      ->required();
  serve->add_option("--model", sv_model, "Model JSON")->required();
  serve->add_option("--host", sv_host, "Bind address")->capture_default_str();
  serve->add_option("--port", sv_port, "Port")->capture_default_str();
  serve->add_option("--mode", sv_mode, "manual, auto or mixed")
      ->check(CLI::IsMember({"manual", "auto", "mixed"}))
      ->capture_default_str();
  serve->add_option("--auto-budget", sv_budget, "Questions per tick in auto mode")
      ->capture_default_str();
  serve->add_option("--rules", sv_rules, "Keyword rules JSON")
      ->capture_default_str();
  serve->add_option("--log", sv_log, "Session log (JSON lines)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsageError;
  }

  try {
    if (simulate->parsed()) {
      return Simulate(simulate, common, sim_out, sim_config, sim_population,
                      sim_days, vocabulary, out);
    }

    if (featurize->parsed()) {
      Manifest manifest(*featurize, common.seed);
      const FeatureExtractor extractor = MakeExtractor(common);
      const Corpus corpus = LoadCorpusDir(feat_corpus);
      manifest.Input(feat_corpus);
      FeatureTable table;
      if (feat_rows == "solicitations") {
        table = FeaturizeSolicitations(corpus, extractor);
      } else {
        const std::string users_path =
            feat_users.value_or(JoinPath(feat_corpus, "candidates.txt"));
        std::vector<std::string> ids;
        for (const std::string& line : ReadLines(users_path)) {
          if (!line.empty()) ids.push_back(line);
        }
        Timestamp t = corpus.latest_timestamp();
        const std::string config_path = JoinPath(feat_corpus, "sim_config.json");
        if (feat_time) {
          t = *feat_time;
        } else if (fs::exists(config_path)) {
          t = SimConfig::FromJson(ReadFile(config_path), config_path).live_time();
        }
        table = FeaturizeUsers(corpus, extractor, ids, t);
        manifest.Set("query_time", t);
      }
      WriteFeatureCsv(feat_out, table);
      manifest.Output(feat_out);
      manifest.Set("rows", table.rows());
      manifest.Write(feat_out);
      out << "wrote " << table.rows() << " rows x " << table.feature_names.size()
          << " features to " << feat_out << "\n";
      return kExitOk;
    }

    if (analyze->parsed()) {
      Manifest manifest(*analyze, common.seed);
      const FeatureTable table = ReadFeatureCsv(an_features);
      manifest.Input(an_features);
      if (!table.labeled()) {
        throw DataError("feature table has no 'responded' column");
      }
      const LabeledDataset data = LabeledDataset::FromTable(table);
      const SignificanceReport report = AnalyzeSignificance(data, an_alpha, an_bins);
      fs::create_directories(an_out);
      const std::string csv = JoinPath(an_out, "significance.csv");
      const std::string js = JoinPath(an_out, "significance.json");
      const std::string sub = JoinPath(an_out, "subsets.json");
      WriteFile(csv, report.ToCsv());
      WriteFile(js, report.ToJson() + "\n");
      json subsets_json = json::object();
      for (const std::string& name : SubsetNames()) {
        try {
          const std::vector<std::string> names =
              BuildSubset(name, report, table.feature_names);
          std::string lines;
          for (const std::string& n : names) lines += n + "\n";
          const std::string path = JoinPath(an_out, ("subset_" + name + ".txt").c_str());
          WriteFile(path, lines);
          manifest.Output(path);
          subsets_json[name] = names;
        } catch (const Error& e) {
          // Unavailable subsets (e.g. too few rejections) are reported, not fatal.
          subsets_json[name] = {{"error", e.what()}};
        }
      }
      WriteFile(sub, subsets_json.dump(2) + "\n");
      for (const auto& p : {csv, js, sub}) manifest.Output(p);
      manifest.Write(an_out);
      out << report.Significant().size() << " of " << report.tested
          << " features significant at alpha " << FormatDouble(an_alpha)
          << " (estimated FDR " << FormatDouble(report.fdr) << ")\n";
      return kExitOk;
    }

    if (train->parsed()) {
      Manifest manifest(*train, common.seed);
      const TrainOptions options = MakeTrainOptions(tr_flags, common.seed);
      const FeatureTable table = ReadFeatureCsv(tr_features);
      manifest.Input(tr_features);
      const TrainedModel model = Train(SubsetDataset(table, tr_flags), options);
      SaveModel(tr_out, model);
      manifest.Output(tr_out);
      manifest.Set("weights", {{"positive", options.cost.benefit - options.cost.cost},
                               {"negative", options.cost.cost}});
      manifest.Set("features", model.feature_names.size());
      manifest.Write(tr_out);
      out << "trained " << ModelKindName(model.kind) << " on "
          << model.feature_names.size() << " features"
          << (model.converged ? "" : " (stopped before the gradient tolerance)") << "\n";
      return kExitOk;
    }

    if (eval->parsed()) {
      Manifest manifest(*eval, common.seed);
      const TrainOptions options = MakeTrainOptions(ev_flags, common.seed);
      const FeatureTable table = ReadFeatureCsv(ev_features);
      manifest.Input(ev_features);
      const EvalReport report =
          KFoldEvaluate(SubsetDataset(table, ev_flags), ev_k, options, common.seed);
      out << report.ToTable();
      if (ev_out) {
        WriteFile(*ev_out, report.ToJson() + "\n");
        manifest.Output(*ev_out);
        manifest.Write(*ev_out);
      }
      return kExitOk;
    }

    if (recommend->parsed()) {
      Manifest manifest(*recommend, common.seed);
      const TrainedModel model = LoadModel(rc_model);
      const FeatureTable training =
          ReadFeatureCsv(rc_training).Select(model.feature_names);
      const FeatureTable candidates =
          ReadFeatureCsv(rc_candidates).Select(model.feature_names);
      for (const auto& p : {rc_model, rc_training, rc_candidates}) {
        manifest.Input(p);
      }
      if (!training.labeled()) {
        throw DataError("training table has no 'responded' column");
      }
      const IntervalSelection sel =
          Recommend(model, training, candidates, rc_constraints);
      WriteFile(rc_out, sel.ToJson() + "\n");
      manifest.Output(rc_out);
      manifest.Write(rc_out);
      out << "selected " << sel.selected_ids.size() << " of "
          << sel.candidate_count << " candidates (ranks " << sel.test_begin
          << "-" << sel.test_end << ")\n";
      return kExitOk;
    }

    if (experiment->parsed()) {
      Manifest manifest(*experiment, common.seed);
      const FeatureExtractor extractor = MakeExtractor(common);
      const Benchmark bench = LoadBenchmark(ex_population);
      manifest.Input(ex_population);
      ExperimentOptions options;
      options.budget = ex_budget;
      options.seed = common.seed;
      options.train = MakeTrainOptions(ex_flags, common.seed);
      const bool interval =
          std::find(ex_sweeps.begin(), ex_sweeps.end(), "interval") != ex_sweeps.end();
      const bool cost =
          std::find(ex_sweeps.begin(), ex_sweeps.end(), "cost") != ex_sweeps.end();
      if (interval) {
        for (double pct : ParseList(ex_sizes, "size")) {
          options.interval_sizes.push_back(pct / 100.0);
        }
      }
      if (cost) options.cost_ratios = ParseList(ex_ratios, "ratio");
      const ExperimentReport report = RunExperiment(bench, extractor, options);
      WriteFile(ex_out, report.ToJson() + "\n");
      manifest.Output(ex_out);
      manifest.Write(ex_out);
      for (const ArmResult& a : report.arms) {
        out << a.name << ": " << a.responded << "/" << a.sent << " responded\n";
      }
      return kExitOk;
    }

    if (serve->parsed()) {
      SessionOptions options;
      options.population_dir = sv_population;
      options.mode = ParseOperatorMode(sv_mode);
      options.auto_budget = sv_budget;
      options.seed = common.seed;
      options.log_path = sv_log;
      Session session(options, LoadModel(sv_model), MakeExtractor(common),
                      LoadRules(sv_rules));
      Server server(session);
      out << "serving " << session.id() << " on " << sv_host << ":" << sv_port
          << std::endl;
      server.Run(sv_host, sv_port);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const ServiceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsageError;
}

}  // namespace solicit
