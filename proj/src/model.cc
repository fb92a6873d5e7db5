#include "solicit/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "solicit/error.h"

namespace solicit {

using nlohmann::json;

namespace {

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void RequireBothClasses(const LabeledDataset& data) {
  const auto pos = std::count(data.labels.begin(), data.labels.end(), 1);
  if (pos == 0 || static_cast<std::size_t>(pos) == data.rows()) {
    throw TrainingError("training data must contain both classes");
  }
}

}  // namespace

void LabeledDataset::Validate() const {
  const std::size_t n = rows();
  if (values.size() != n * cols() || missing.size() != n * cols()) {
    throw ContractError("dataset matrix size does not match rows x cols");
  }
  if (weights.size() != n) {
    throw ContractError("dataset weights length does not match labels");
  }
  if (!ids.empty() && ids.size() != n) {
    throw ContractError("dataset ids length does not match labels");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ContractError("labels must be 0 or 1");
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ContractError("sample weights must be positive and finite");
    }
  }
}

LabeledDataset LabeledDataset::Subset(
    std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.feature_names = feature_names;
  const std::size_t d = cols();
  for (std::size_t i : indices) {
    out.values.insert(out.values.end(), values.begin() + i * d,
                      values.begin() + (i + 1) * d);
    out.missing.insert(out.missing.end(), missing.begin() + i * d,
                       missing.begin() + (i + 1) * d);
    out.labels.push_back(labels[i]);
    out.weights.push_back(weights[i]);
    if (!ids.empty()) out.ids.push_back(ids[i]);
  }
  return out;
}

LabeledDataset LabeledDataset::FromTable(const FeatureTable& table) {
  if (!table.labeled()) {
    throw ContractError("feature table has no 'responded' labels");
  }
  LabeledDataset d;
  d.feature_names = table.feature_names;
  d.ids = table.user_ids;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    d.values.insert(d.values.end(), table.values[r].begin(),
                    table.values[r].end());
    for (bool m : table.missing[r]) d.missing.push_back(m ? 1 : 0);
  }
  d.labels = table.labels;
  d.weights.assign(d.labels.size(), 1.0);
  return d;
}

void CostConfig::Validate() const {
  if (!(cost > 0.0) || !(benefit > cost) || !std::isfinite(benefit)) {
    throw ConfigError("cost config requires benefit > cost > 0 (got B=" +
                      FormatDouble(benefit) + ", C=" + FormatDouble(cost) +
                      ")");
  }
}

std::vector<double> AssignWeights(std::span<const int> labels,
                                  const CostConfig& cost) {
  cost.Validate();
  std::vector<double> w;
  w.reserve(labels.size());
  for (int y : labels) w.push_back(y == 1 ? cost.benefit - cost.cost : cost.cost);
  return w;
}

Standardizer Standardizer::Fit(const LabeledDataset& data) {
  const std::size_t d = data.cols();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  s.impute.assign(d, 0.0);
  s.pinned.assign(d, false);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (data.row_missing(i)[j]) continue;
      sum += data.row(i)[j];
      ++count;
    }
    if (count == 0) {
      s.pinned[j] = true;
      continue;
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (data.row_missing(i)[j]) continue;
      const double dv = data.row(i)[j] - mean;
      ss += dv * dv;
    }
    const double sd = std::sqrt(ss / static_cast<double>(count));
    s.mean[j] = mean;
    s.impute[j] = mean;
    if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) {
      s.pinned[j] = true;
    } else {
      s.scale[j] = sd;
    }
  }
  return s;
}

void Standardizer::Transform(std::span<const double> values,
                             std::span<const std::uint8_t> missing,
                             std::span<double> out) const {
  for (std::size_t j = 0; j < size(); ++j) {
    if (pinned[j]) {
      out[j] = 0.0;
      continue;
    }
    const double v = missing[j] ? impute[j] : values[j];
    out[j] = (v - mean[j]) / scale[j];
  }
}

std::vector<double> Standardizer::TransformAll(
    const LabeledDataset& data) const {
  const std::size_t d = data.cols();
  std::vector<double> x(data.rows() * d);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    std::span<double> out(x.data() + i * d, d);
    Transform(data.row(i), data.row_missing(i), out);
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(out[j])) {
        throw DataError("non-finite value for feature '" +
                        data.feature_names[j] + "' after standardization");
      }
    }
  }
  return x;
}

const char* ModelKindName(ModelKind kind) {
  return kind == ModelKind::kLogistic ? "logistic" : "linear_svm";
}

ModelKind ParseModelKind(const std::string& name) {
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "linear_svm" || name == "svm") return ModelKind::kLinearSvm;
  throw ConfigError("unknown model kind '" + name + "'");
}

double PlattCalibration::Apply(double margin) const {
  return Sigmoid(a * margin + b);
}

PlattCalibration FitPlatt(std::span<const double> margins,
                          std::span<const int> labels) {
  // Newton iteration with backtracking on Platt's regularised targets, in the
  // p = 1 / (1 + exp(A f + B)) parameterisation.
  const std::size_t n = margins.size();
  double prior1 = 0;
  double prior0 = 0;
  for (int y : labels) (y == 1 ? prior1 : prior0) += 1.0;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] == 1 ? hi : lo;

  double A = 0.0;
  double B = std::log((prior0 + 1.0) / (prior1 + 1.0));
  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fa = margins[i] * a + b;
      f += fa >= 0 ? t[i] * fa + std::log1p(std::exp(-fa))
                   : (t[i] - 1.0) * fa + std::log1p(std::exp(fa));
    }
    return f;
  };
  double fval = objective(A, B);
  constexpr double kSigma = 1e-12;
  for (int iter = 0; iter < 100; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fa = margins[i] * A + B;
      double p, q;
      if (fa >= 0) {
        p = std::exp(-fa) / (1.0 + std::exp(-fa));
        q = 1.0 / (1.0 + std::exp(-fa));
      } else {
        p = 1.0 / (1.0 + std::exp(fa));
        q = std::exp(fa) / (1.0 + std::exp(fa));
      }
      const double d2 = p * q;
      h11 += margins[i] * margins[i] * d2;
      h22 += d2;
      h21 += margins[i] * d2;
      const double d1 = t[i] - p;
      g1 += margins[i] * d1;
      g2 += d1;
    }
    if (std::fabs(g1) < 1e-5 && std::fabs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double dA = -(h22 * g1 - h21 * g2) / det;
    const double dB = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * dA + g2 * dB;
    double step = 1.0;
    bool moved = false;
    while (step >= 1e-10) {
      const double na = A + step * dA;
      const double nb = B + step * dB;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        A = na;
        B = nb;
        fval = nf;
        moved = true;
        break;
      }
      step /= 2.0;
    }
    if (!moved) break;
  }
  PlattCalibration c;
  c.a = std::max(-A, 1e-6);
  c.b = -B;
  return c;
}

double TrainedModel::Margin(std::span<const double> values,
                            std::span<const std::uint8_t> missing) const {
  if (values.size() != size() || missing.size() != size()) {
    throw ContractError("feature vector has " + std::to_string(values.size()) +
                        " entries, model expects " + std::to_string(size()));
  }
  std::vector<double> x(size());
  standardizer.Transform(values, missing, x);
  return Dot(coefficients, x) + intercept;
}

double TrainedModel::PredictProba(std::span<const double> values,
                                  std::span<const std::uint8_t> missing) const {
  const double m = Margin(values, missing);
  if (kind == ModelKind::kLinearSvm && calibration) return calibration->Apply(m);
  return Sigmoid(m);
}

double TrainedModel::PredictProba(const std::vector<double>& values,
                                  const std::vector<bool>& missing) const {
  std::vector<std::uint8_t> m(missing.begin(), missing.end());
  return PredictProba(std::span<const double>(values),
                      std::span<const std::uint8_t>(m));
}

double TrainedModel::PredictProba(const FeatureVector& v) const {
  return PredictProba(v.values, v.missing);
}

std::string TrainedModel::ToJson() const {
  json j;
  j["kind"] = ModelKindName(kind);
  j["feature_names"] = feature_names;
  j["coefficients"] = coefficients;
  j["intercept"] = intercept;
  j["standardizer"] = {{"mean", standardizer.mean},
                       {"scale", standardizer.scale},
                       {"impute", standardizer.impute},
                       {"pinned", standardizer.pinned}};
  j["calibration"] = calibration
                         ? json{{"a", calibration->a}, {"b", calibration->b}}
                         : json(nullptr);
  j["seed"] = seed;
  j["hyperparameters"] = {{"lambda", lambda}};
  j["cost"] = {{"benefit", cost.benefit}, {"cost", cost.cost}};
  j["iterations"] = iterations;
  j["converged"] = converged;
  return j.dump(2);
}

TrainedModel TrainedModel::FromJson(std::string_view text,
                                    const std::string& source) {
  TrainedModel m;
  try {
    const json j = json::parse(text);
    m.kind = ParseModelKind(j.at("kind").get<std::string>());
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    const json& s = j.at("standardizer");
    m.standardizer.mean = s.at("mean").get<std::vector<double>>();
    m.standardizer.scale = s.at("scale").get<std::vector<double>>();
    m.standardizer.impute = s.at("impute").get<std::vector<double>>();
    m.standardizer.pinned = s.at("pinned").get<std::vector<bool>>();
    if (!j.at("calibration").is_null()) {
      m.calibration = PlattCalibration{j["calibration"].at("a").get<double>(),
                                       j["calibration"].at("b").get<double>()};
    }
    m.seed = j.value("seed", std::uint64_t{0});
    m.lambda = j.at("hyperparameters").value("lambda", 0.0);
    if (j.contains("cost")) {
      m.cost.benefit = j["cost"].at("benefit").get<double>();
      m.cost.cost = j["cost"].at("cost").get<double>();
    }
    m.iterations = j.value("iterations", 0);
    m.converged = j.value("converged", false);
  } catch (const json::exception& e) {
    throw ParseError(source, 0, std::string("bad model document: ") + e.what());
  }
  const std::size_t d = m.coefficients.size();
  if (m.feature_names.size() != d || m.standardizer.mean.size() != d ||
      m.standardizer.scale.size() != d || m.standardizer.impute.size() != d ||
      m.standardizer.pinned.size() != d) {
    throw ParseError(source, 0, "model arrays have inconsistent lengths");
  }
  return m;
}

void SaveModel(const std::string& path, const TrainedModel& model) {
  WriteFile(path, model.ToJson() + "\n");
}

TrainedModel LoadModel(const std::string& path) {
  return TrainedModel::FromJson(ReadFile(path), path);
}

LogisticObjective::LogisticObjective(std::span<const double> x,
                                     std::size_t cols,
                                     std::span<const int> labels,
                                     std::span<const double> weights,
                                     double lambda)
    : x_(x), cols_(cols), labels_(labels), weights_(weights), lambda_(lambda) {}

double LogisticObjective::Value(std::span<const double> params) const {
  const std::span<const double> beta = params.first(cols_);
  const double b = params[cols_];
  double f = 0.5 * lambda_ * Dot(beta, beta);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const double z = Dot(beta, x_.subspan(i * cols_, cols_)) + b;
    f += weights_[i] * (Softplus(z) - labels_[i] * z);
  }
  return f;
}

double LogisticObjective::ValueAndGradient(std::span<const double> params,
                                           std::span<double> grad) const {
  const std::span<const double> beta = params.first(cols_);
  const double b = params[cols_];
  double f = 0.5 * lambda_ * Dot(beta, beta);
  for (std::size_t j = 0; j < cols_; ++j) grad[j] = lambda_ * beta[j];
  grad[cols_] = 0.0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const std::span<const double> xi = x_.subspan(i * cols_, cols_);
    const double z = Dot(beta, xi) + b;
    f += weights_[i] * (Softplus(z) - labels_[i] * z);
    const double r = weights_[i] * (Sigmoid(z) - labels_[i]);
    for (std::size_t j = 0; j < cols_; ++j) grad[j] += r * xi[j];
    grad[cols_] += r;
  }
  return f;
}

TrainedModel TrainLogistic(const LabeledDataset& data,
                           const LogisticParams& params) {
  return TrainLogistic(data, params, nullptr);
}

TrainedModel TrainLogistic(const LabeledDataset& data,
                           const LogisticParams& params,
                           std::vector<double>* loss_trace) {
  data.Validate();
  RequireBothClasses(data);
  TrainedModel model;
  model.kind = ModelKind::kLogistic;
  model.feature_names = data.feature_names;
  model.standardizer = Standardizer::Fit(data);
  model.seed = params.seed;
  model.lambda = params.lambda;
  const std::vector<double> x = model.standardizer.TransformAll(data);
  const std::size_t d = data.cols();
  const LogisticObjective objective(x, d, data.labels, data.weights,
                                    params.lambda);

  // Lipschitz bound of the gradient gives a safe first step.
  double lipschitz = params.lambda;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const std::span<const double> xi(x.data() + i * d, d);
    lipschitz += 0.25 * data.weights[i] * (Dot(xi, xi) + 1.0);
  }

  std::vector<double> theta(d + 1, 0.0), grad(d + 1), prev_theta, prev_grad;
  std::vector<double> trial(d + 1), trial_grad(d + 1);
  auto project = [&](std::span<double> g) {
    for (std::size_t j = 0; j < d; ++j) {
      if (model.standardizer.pinned[j]) g[j] = 0.0;
    }
  };
  double f = objective.ValueAndGradient(theta, grad);
  project(grad);
  if (loss_trace) loss_trace->push_back(f);
  double step = 1.0 / lipschitz;
  int iter = 0;
  for (; iter < params.max_iter; ++iter) {
    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::fabs(g));
    if (gmax < params.tol) {
      model.converged = true;
      break;
    }
    if (!prev_theta.empty()) {
      double sy = 0.0, ss = 0.0;
      for (std::size_t j = 0; j <= d; ++j) {
        const double s = theta[j] - prev_theta[j];
        sy += s * (grad[j] - prev_grad[j]);
        ss += s * s;
      }
      step = sy > 0.0 ? ss / sy : 1.0 / lipschitz;
    }
    const double gg = Dot(grad, grad);
    bool accepted = false;
    double nf = f;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t j = 0; j <= d; ++j) trial[j] = theta[j] - step * grad[j];
      nf = objective.Value(trial);
      if (nf <= f - 1e-4 * step * gg && nf < f) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    prev_theta = theta;
    prev_grad = grad;
    theta = trial;
    f = objective.ValueAndGradient(theta, grad);
    project(grad);
    if (loss_trace) loss_trace->push_back(f);
  }
  model.iterations = iter;
  model.coefficients.assign(theta.begin(), theta.begin() + d);
  model.intercept = theta[d];
  return model;
}

TrainedModel TrainSvm(const LabeledDataset& data, const SvmParams& params) {
  data.Validate();
  RequireBothClasses(data);
  if (!(params.lambda > 0.0)) throw ConfigError("svm lambda must be positive");
  TrainedModel model;
  model.kind = ModelKind::kLinearSvm;
  model.feature_names = data.feature_names;
  model.standardizer = Standardizer::Fit(data);
  model.seed = params.seed;
  model.lambda = params.lambda;
  const std::vector<double> x = model.standardizer.TransformAll(data);
  const std::size_t d = data.cols();
  const std::size_t n = data.rows();

  // theta = [w; b], the intercept treated as a weight on a constant feature.
  std::vector<double> theta(d + 1, 0.0), best(d + 1, 0.0), g(d + 1);
  std::vector<double> margins(n);
  double best_objective = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= params.epochs; ++t) {
    std::fill(g.begin(), g.end(), 0.0);
    double objective = 0.5 * params.lambda * Dot(theta, theta);
    for (std::size_t i = 0; i < n; ++i) {
      const std::span<const double> xi(x.data() + i * d, d);
      const double m = Dot(std::span<const double>(theta).first(d), xi) + theta[d];
      const double s = data.labels[i] == 1 ? 1.0 : -1.0;
      const double slack = 1.0 - s * m;
      if (slack > 0.0) {
        objective += data.weights[i] * slack;
        const double c = data.weights[i] * s;
        for (std::size_t j = 0; j < d; ++j) g[j] += c * xi[j];
        g[d] += c;
      }
    }
    if (objective < best_objective) {
      best_objective = objective;
      best = theta;
    }
    const double eta = 1.0 / (params.lambda * static_cast<double>(t));
    const double shrink = 1.0 - 1.0 / static_cast<double>(t);
    for (std::size_t j = 0; j <= d; ++j) theta[j] = shrink * theta[j] + eta * g[j];
  }
  model.iterations = params.epochs;
  model.converged = true;
  model.coefficients.assign(best.begin(), best.begin() + d);
  model.intercept = best[d];

  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> xi(x.data() + i * d, d);
    margins[i] = Dot(model.coefficients, xi) + model.intercept;
  }
  model.calibration = FitPlatt(margins, data.labels);
  return model;
}

double WeightedHingeLoss(const TrainedModel& model, const LabeledDataset& data) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double m = model.Margin(data.row(i), data.row_missing(i));
    const double s = data.labels[i] == 1 ? 1.0 : -1.0;
    loss += data.weights[i] * std::max(0.0, 1.0 - s * m);
  }
  return loss;
}

TrainedModel Train(LabeledDataset data, const TrainOptions& options) {
  data.weights = AssignWeights(data.labels, options.cost);
  TrainedModel m = options.kind == ModelKind::kLogistic
                       ? TrainLogistic(data, options.logistic)
                       : TrainSvm(data, options.svm);
  m.cost = options.cost;
  return m;
}

}  // namespace solicit
