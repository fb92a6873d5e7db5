#ifndef SOLICIT_ANALYSIS_H_
#define SOLICIT_ANALYSIS_H_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "solicit/model.h"

namespace solicit {

struct ChiSquareResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  // Constant feature (or a single occupied bin): no test was run.
  bool degenerate = false;
};

// Pearson chi-square test of independence between a discretized feature and
// binary labels. Unmasked values go into at most `bins` quantile bins; masked
// values form one extra bin. Empty bins are dropped. Throws ContractError
// unless both classes are present.
ChiSquareResult ChiSquareFeature(std::span<const double> values,
                                 std::span<const std::uint8_t> missing,
                                 std::span<const int> labels, int bins = 4);

// Bin index per value: the number of quantile cut points strictly below it.
// Cut points are sorted[ceil(k * n / bins) - 1] for k = 1..bins-1, deduped.
std::vector<double> QuantileCuts(std::vector<double> values, int bins);

// Pearson statistic of a rows x 2 contingency table (rows with zero total
// skipped).
double PearsonStatistic(const std::vector<std::array<double, 2>>& table);

struct FeatureSignificance {
  std::string name;
  ChiSquareResult test;
  bool significant = false;
};

struct SignificanceReport {
  std::vector<FeatureSignificance> features;
  double alpha = 0.05;
  int bins = 4;
  // Number of non-degenerate tests (m) and the per-test threshold alpha / m.
  std::size_t tested = 0;
  double threshold = 0.0;
  // Plug-in estimate p_max_rejected * m / k; 0 with `no_rejections` set when
  // nothing was rejected.
  double fdr = 0.0;
  bool no_rejections = true;

  std::vector<std::string> Significant() const;
  std::string ToCsv() const;
  std::string ToJson() const;
};

SignificanceReport AnalyzeSignificance(const LabeledDataset& data,
                                       double alpha = 0.05, int bins = 4);

namespace subsets {
inline constexpr const char* kAll = "all";
inline constexpr const char* kSignificant = "significant";
inline constexpr const char* kTop10Significant = "top10_significant";
inline constexpr const char* kTop4 = "top4";
inline constexpr const char* kCommonSignificant = "common_significant";
}  // namespace subsets

const std::vector<std::string>& Top4Features();
const std::vector<std::string>& CommonSignificantFeatures();
const std::vector<std::string>& SubsetNames();

// Feature names of a named subset. Fixed lists must exist in `feature_names`
// (ConfigError names the missing one); top10_significant needs at least ten
// rejected features (ContractError otherwise). Unknown names are ConfigError.
std::vector<std::string> BuildSubset(const std::string& name,
                                     const SignificanceReport& report,
                                     const std::vector<std::string>& feature_names);

}  // namespace solicit

#endif  // SOLICIT_ANALYSIS_H_
