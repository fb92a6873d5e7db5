#ifndef SOLICIT_MODEL_H_
#define SOLICIT_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "solicit/features.h"

namespace solicit {

// Row-major examples with labels in {0,1} and positive sample weights.
struct LabeledDataset {
  std::vector<std::string> feature_names;
  std::vector<std::string> ids;
  std::vector<double> values;
  std::vector<std::uint8_t> missing;
  std::vector<int> labels;
  std::vector<double> weights;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return feature_names.size(); }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols(), cols()};
  }
  std::span<const std::uint8_t> row_missing(std::size_t i) const {
    return {missing.data() + i * cols(), cols()};
  }

  // Throws ContractError on inconsistent lengths, labels outside {0,1} or
  // non-positive weights.
  void Validate() const;

  // Rows in the given order (weights and ids carried along).
  LabeledDataset Subset(std::span<const std::size_t> indices) const;

  // From a labelled feature table; weights start at 1.
  static LabeledDataset FromTable(const FeatureTable& table);
};

// Unit benefit of a response and unit cost of a question; requires B > C > 0.
struct CostConfig {
  double benefit = 2.0;
  double cost = 1.0;
  void Validate() const;
};

// B - C for responders, C for everyone else.
std::vector<double> AssignWeights(std::span<const int> labels,
                                  const CostConfig& cost);

// Per-feature centring and scaling fitted on training rows. Masked inputs are
// replaced by the imputation mean before scaling. Features with zero variance
// (or no observed values) get scale 1 and are flagged `pinned`.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<double> impute;
  std::vector<bool> pinned;

  static Standardizer Fit(const LabeledDataset& data);
  std::size_t size() const { return mean.size(); }
  void Transform(std::span<const double> values,
                 std::span<const std::uint8_t> missing,
                 std::span<double> out) const;
  // Standardizes every row; throws DataError on non-finite results.
  std::vector<double> TransformAll(const LabeledDataset& data) const;
};

enum class ModelKind { kLogistic, kLinearSvm };

const char* ModelKindName(ModelKind kind);
ModelKind ParseModelKind(const std::string& name);

struct LogisticParams {
  double lambda = 1e-3;
  int max_iter = 5000;
  double tol = 1e-6;
  std::uint64_t seed = 42;
};

struct SvmParams {
  double lambda = 1e-2;
  int epochs = 2000;
  std::uint64_t seed = 42;
};

// p = sigmoid(a * margin + b), with a > 0.
struct PlattCalibration {
  double a = 1.0;
  double b = 0.0;
  double Apply(double margin) const;
};

// Fits a Platt sigmoid to margins with Platt's smoothed targets. The slope is
// floored at a small positive value so the map stays strictly increasing.
PlattCalibration FitPlatt(std::span<const double> margins,
                          std::span<const int> labels);

struct TrainedModel {
  ModelKind kind = ModelKind::kLogistic;
  std::vector<std::string> feature_names;
  std::vector<double> coefficients;
  double intercept = 0.0;
  Standardizer standardizer;
  std::optional<PlattCalibration> calibration;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = false;
  CostConfig cost;

  std::size_t size() const { return coefficients.size(); }

  // Linear score on the standardized, imputed input.
  double Margin(std::span<const double> values,
                std::span<const std::uint8_t> missing) const;
  // Throws ContractError when the vector length does not match.
  double PredictProba(std::span<const double> values,
                      std::span<const std::uint8_t> missing) const;
  double PredictProba(const FeatureVector& v) const;
  double PredictProba(const std::vector<double>& values,
                      const std::vector<bool>& missing) const;

  std::string ToJson() const;
  static TrainedModel FromJson(std::string_view text,
                               const std::string& source = "model");
};

void SaveModel(const std::string& path, const TrainedModel& model);
TrainedModel LoadModel(const std::string& path);

// Weighted, L2-regularised log-loss on standardized rows. `params` holds the
// coefficients followed by the intercept; the intercept is not regularised.
// Rows whose feature is pinned are expected to carry a zero coefficient.
class LogisticObjective {
 public:
  LogisticObjective(std::span<const double> x, std::size_t cols,
                    std::span<const int> labels,
                    std::span<const double> weights, double lambda);

  std::size_t dim() const { return cols_ + 1; }
  double Value(std::span<const double> params) const;
  // Returns the value and writes the gradient.
  double ValueAndGradient(std::span<const double> params,
                          std::span<double> grad) const;

 private:
  std::span<const double> x_;
  std::size_t cols_;
  std::span<const int> labels_;
  std::span<const double> weights_;
  double lambda_;
};

// Full-batch gradient descent with Armijo backtracking; the trial step is the
// Barzilai-Borwein step, so every accepted step strictly lowers the loss.
// The dataset's weights are used as given.
TrainedModel TrainLogistic(const LabeledDataset& data,
                           const LogisticParams& params = {});

// Loss trace of the accepted iterates, for inspection in tests.
TrainedModel TrainLogistic(const LabeledDataset& data,
                           const LogisticParams& params,
                           std::vector<double>* loss_trace);

// Weighted hinge loss plus (lambda/2)||w||^2, minimised by full-batch
// subgradient steps eta_t = 1/(lambda t) over examples in index order. The
// intercept rides along as a constant feature. Probabilities come from a
// Platt fit on the training margins.
TrainedModel TrainSvm(const LabeledDataset& data, const SvmParams& params = {});

// Sum of w_i * max(0, 1 - s_i * margin_i) over the dataset.
double WeightedHingeLoss(const TrainedModel& model, const LabeledDataset& data);

// Trains the requested kind with weights from `cost`.
struct TrainOptions {
  ModelKind kind = ModelKind::kLogistic;
  CostConfig cost;
  LogisticParams logistic;
  SvmParams svm;
};

TrainedModel Train(LabeledDataset data, const TrainOptions& options);

}  // namespace solicit

#endif  // SOLICIT_MODEL_H_
