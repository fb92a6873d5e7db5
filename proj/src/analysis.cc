#include "solicit/analysis.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "solicit/error.h"
#include "solicit/stats.h"

namespace solicit {

std::vector<double> QuantileCuts(std::vector<double> values, int bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> cuts;
  const std::size_t n = values.size();
  if (n == 0 || bins < 2) return cuts;
  for (int k = 1; k < bins; ++k) {
    const std::size_t rank =
        (static_cast<std::size_t>(k) * n + static_cast<std::size_t>(bins) - 1) /
        static_cast<std::size_t>(bins);
    cuts.push_back(values[std::max<std::size_t>(rank, 1) - 1]);
  }
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

double PearsonStatistic(const std::vector<std::array<double, 2>>& table) {
  double col[2] = {0.0, 0.0};
  double total = 0.0;
  for (const auto& row : table) {
    col[0] += row[0];
    col[1] += row[1];
  }
  total = col[0] + col[1];
  double stat = 0.0;
  for (const auto& row : table) {
    const double row_total = row[0] + row[1];
    if (row_total == 0.0) continue;
    for (int c = 0; c < 2; ++c) {
      const double expected = row_total * col[c] / total;
      if (expected == 0.0) continue;
      const double diff = row[c] - expected;
      stat += diff * diff / expected;
    }
  }
  return stat;
}

ChiSquareResult ChiSquareFeature(std::span<const double> values,
                                 std::span<const std::uint8_t> missing,
                                 std::span<const int> labels, int bins) {
  if (values.size() != labels.size() || missing.size() != labels.size()) {
    throw ContractError("feature column and labels differ in length");
  }
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == labels.size()) {
    throw ContractError("chi-square test needs both classes");
  }
  std::vector<double> observed;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!missing[i]) observed.push_back(values[i]);
  }
  const std::vector<double> cuts = QuantileCuts(observed, bins);
  // Bins 0..cuts.size() for observed values, one more for masked values.
  std::vector<std::array<double, 2>> table(cuts.size() + 2, {0.0, 0.0});
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::size_t bin;
    if (missing[i]) {
      bin = cuts.size() + 1;
    } else {
      bin = static_cast<std::size_t>(
          std::lower_bound(cuts.begin(), cuts.end(), values[i]) - cuts.begin());
    }
    table[bin][labels[i] == 1 ? 1 : 0] += 1.0;
  }
  std::erase_if(table, [](const auto& row) { return row[0] + row[1] == 0.0; });
  ChiSquareResult r;
  if (table.size() < 2) {
    r.degenerate = true;
    return r;
  }
  r.statistic = PearsonStatistic(table);
  r.df = static_cast<int>(table.size()) - 1;
  r.p_value = ChiSquarePValue(r.statistic, r.df);
  return r;
}

SignificanceReport AnalyzeSignificance(const LabeledDataset& data, double alpha,
                                       int bins) {
  data.Validate();
  SignificanceReport report;
  report.alpha = alpha;
  report.bins = bins;
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  std::vector<double> column(n);
  std::vector<std::uint8_t> mask(n);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = data.values[i * d + j];
      mask[i] = data.missing[i * d + j];
    }
    FeatureSignificance f;
    f.name = data.feature_names[j];
    f.test = ChiSquareFeature(column, mask, data.labels, bins);
    if (!f.test.degenerate) ++report.tested;
    report.features.push_back(std::move(f));
  }
  report.threshold =
      report.tested > 0 ? alpha / static_cast<double>(report.tested) : 0.0;
  double p_max = 0.0;
  std::size_t rejected = 0;
  for (FeatureSignificance& f : report.features) {
    f.significant = !f.test.degenerate && f.test.p_value < report.threshold;
    if (f.significant) {
      ++rejected;
      p_max = std::max(p_max, f.test.p_value);
    }
  }
  report.no_rejections = rejected == 0;
  if (rejected > 0) {
    report.fdr = std::min(1.0, p_max * static_cast<double>(report.tested) /
                                   static_cast<double>(rejected));
  }
  return report;
}

std::vector<std::string> SignificanceReport::Significant() const {
  std::vector<std::string> out;
  for (const FeatureSignificance& f : features) {
    if (f.significant) out.push_back(f.name);
  }
  return out;
}

std::string SignificanceReport::ToCsv() const {
  std::ostringstream out;
  out << "feature,chi2,df,p,significant\n";
  for (const FeatureSignificance& f : features) {
    out << f.name << ',';
    if (f.test.degenerate) {
      out << ",,,0\n";
      continue;
    }
    out << FormatDouble(f.test.statistic) << ',' << f.test.df << ','
        << FormatDouble(f.test.p_value) << ',' << (f.significant ? 1 : 0)
        << '\n';
  }
  return out.str();
}

std::string SignificanceReport::ToJson() const {
  nlohmann::ordered_json j;
  j["alpha"] = alpha;
  j["bins"] = bins;
  j["tested"] = tested;
  j["bonferroni_threshold"] = threshold;
  j["fdr_estimate"] = fdr;
  j["no_rejections"] = no_rejections;
  j["features"] = nlohmann::ordered_json::array();
  for (const FeatureSignificance& f : features) {
    nlohmann::ordered_json e;
    e["feature"] = f.name;
    e["degenerate"] = f.test.degenerate;
    e["chi2"] = f.test.statistic;
    e["df"] = f.test.df;
    e["p"] = f.test.p_value;
    e["significant"] = f.significant;
    j["features"].push_back(std::move(e));
  }
  return j.dump(2);
}

const std::vector<std::string>& Top4Features() {
  static const std::vector<std::string> names = {
      "communication", "PastResponseRate", "TweetingInactivity",
      "TweetingLikelihoodOfDay"};
  return names;
}

const std::vector<std::string>& CommonSignificantFeatures() {
  static const std::vector<std::string> names = {
      "PastResponseRate", "TweetingInactivity", "Excitement-Seeking",
      "Cautiousness", "DailyMsgCount"};
  return names;
}

const std::vector<std::string>& SubsetNames() {
  static const std::vector<std::string> names = {
      subsets::kAll, subsets::kSignificant, subsets::kTop10Significant,
      subsets::kTop4, subsets::kCommonSignificant};
  return names;
}

std::vector<std::string> BuildSubset(
    const std::string& name, const SignificanceReport& report,
    const std::vector<std::string>& feature_names) {
  auto fixed = [&](const std::vector<std::string>& list) {
    for (const std::string& f : list) {
      if (std::find(feature_names.begin(), feature_names.end(), f) ==
          feature_names.end()) {
        throw ConfigError("subset '" + name + "' needs feature '" + f +
                          "', which is not in the feature space");
      }
    }
    return list;
  };
  if (name == subsets::kAll) return feature_names;
  if (name == subsets::kTop4) return fixed(Top4Features());
  if (name == subsets::kCommonSignificant) {
    return fixed(CommonSignificantFeatures());
  }
  if (name == subsets::kSignificant) return report.Significant();
  if (name == subsets::kTop10Significant) {
    std::vector<const FeatureSignificance*> rejected;
    for (const FeatureSignificance& f : report.features) {
      if (f.significant) rejected.push_back(&f);
    }
    if (rejected.size() < 10) {
      throw ContractError("top10_significant needs at least 10 significant "
                          "features, found " +
                          std::to_string(rejected.size()));
    }
    std::stable_sort(rejected.begin(), rejected.end(),
                     [](const FeatureSignificance* a,
                        const FeatureSignificance* b) {
                       return a->test.p_value < b->test.p_value;
                     });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < 10; ++i) out.push_back(rejected[i]->name);
    return out;
  }
  throw ConfigError("unknown feature subset '" + name + "'");
}

}  // namespace solicit
