// Logistic regression and linear SVM: full-batch gradient descent on
// standardized features with a fixed step.
#include <cmath>
#include <limits>

#include "internal.hpp"

namespace pam::clf::detail {
namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

class LinearModel final : public Model {
 public:
  LinearModel(Kind kind, FeatureScaler scaler, Eigen::VectorXd w, double b)
      : kind_(kind), scaler_(std::move(scaler)), w_(std::move(w)), b_(b) {}

  Kind kind() const override { return kind_; }
  std::size_t dim() const override { return static_cast<std::size_t>(w_.size()); }
  double score_unchecked(std::span<const double> x) const override {
    return sigmoid(scaler_.transform(x).dot(w_) + b_);
  }
  nlohmann::json parameters() const override {
    return {{"scaler", scaler_.to_json()}, {"weights", to_std(w_)}, {"bias", b_}};
  }

  static ModelPtr load(Kind kind, const nlohmann::json& p) {
    return std::make_shared<LinearModel>(kind, FeatureScaler::from_json(p.at("scaler")),
                                         from_std(p.at("weights").get<std::vector<double>>()),
                                         p.at("bias").get<double>());
  }

 private:
  Kind kind_;
  FeatureScaler scaler_;
  Eigen::VectorXd w_;
  double b_;
};

}  // namespace

ModelPtr train_lr(const LabeledDataset& data, const TrainConfig& config) {
  auto scaler = FeatureScaler::fit(data);
  const RowMatrix x = scaler.transform(data);
  const Eigen::VectorXd y = labels_of(data);
  const double m = static_cast<double>(data.size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
  double b = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < config.max_iter; ++it) {
    const Eigen::VectorXd z = (x * w).array() + b;
    Eigen::VectorXd residual(z.size());
    double loss = 0.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      residual[k] = sigmoid(z[k]) - y[k];
      // -log p for y = 1, -log(1 - p) for y = 0.
      loss += y[k] > 0.5 ? softplus(-z[k]) : softplus(z[k]);
    }
    loss = loss / m + 0.5 * config.l2 * w.squaredNorm();
    if (std::abs(previous - loss) < config.tolerance) break;
    previous = loss;
    const Eigen::VectorXd grad_w = x.transpose() * residual / m + config.l2 * w;
    const double grad_b = residual.sum() / m;
    w -= config.learning_rate * grad_w;
    b -= config.learning_rate * grad_b;
  }
  return std::make_shared<LinearModel>(Kind::lr, std::move(scaler), std::move(w), b);
}

ModelPtr load_lr(const nlohmann::json& p) { return LinearModel::load(Kind::lr, p); }

ModelPtr train_linear_svm(const LabeledDataset& data, const TrainConfig& config) {
  auto scaler = FeatureScaler::fit(data);
  const RowMatrix x = scaler.transform(data);
  Eigen::VectorXd y = labels_of(data).array() * 2.0 - 1.0;  // {-1, +1}
  const double m = static_cast<double>(data.size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
  double b = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < config.max_iter; ++it) {
    const Eigen::VectorXd z = (x * w).array() + b;
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(z.size());
    double loss = 0.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      const double margin = y[k] * z[k];
      if (margin < 1.0) {
        loss += 1.0 - margin;
        coeff[k] = -y[k];
      }
    }
    loss = loss / m + 0.5 * config.l2 * w.squaredNorm();
    if (std::abs(previous - loss) < config.tolerance) break;
    previous = loss;
    const Eigen::VectorXd grad_w = x.transpose() * coeff / m + config.l2 * w;
    const double grad_b = coeff.sum() / m;
    w -= config.learning_rate * grad_w;
    b -= config.learning_rate * grad_b;
  }
  return std::make_shared<LinearModel>(Kind::linear_svm, std::move(scaler), std::move(w), b);
}

ModelPtr load_linear_svm(const nlohmann::json& p) { return LinearModel::load(Kind::linear_svm, p); }

}  // namespace pam::clf::detail
