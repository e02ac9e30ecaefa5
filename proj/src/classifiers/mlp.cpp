#include "pam/mlp.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "internal.hpp"
#include "pam/error.hpp"

namespace pam::clf {
namespace mlp {

std::size_t Params::size() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + 1);
}

std::vector<double> Params::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  out.insert(out.end(), w1.data(), w1.data() + w1.size());
  out.insert(out.end(), b1.data(), b1.data() + b1.size());
  out.insert(out.end(), w2.data(), w2.data() + w2.size());
  out.push_back(b2);
  return out;
}

void Params::assign(const std::vector<double>& flat) {
  if (flat.size() != size()) throw InvalidInput("flat parameter vector has the wrong size");
  auto it = flat.begin();
  std::copy(it, it + w1.size(), w1.data());
  it += w1.size();
  std::copy(it, it + b1.size(), b1.data());
  it += b1.size();
  std::copy(it, it + w2.size(), w2.data());
  it += w2.size();
  b2 = *it;
}

Params init(std::size_t dim, std::size_t hidden, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Params p;
  const auto d = static_cast<Eigen::Index>(dim);
  const auto h = static_cast<Eigen::Index>(hidden);
  p.w1.resize(d, h);
  p.b1 = Eigen::VectorXd::Zero(h);
  p.w2.resize(h);
  const double r1 = std::sqrt(6.0 / static_cast<double>(dim + hidden));
  const double r2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  std::uniform_real_distribution<double> u1(-r1, r1), u2(-r2, r2);
  for (Eigen::Index j = 0; j < h; ++j)
    for (Eigen::Index i = 0; i < d; ++i) p.w1(i, j) = u1(rng);
  for (Eigen::Index j = 0; j < h; ++j) p.w2[j] = u2(rng);
  return p;
}

Eigen::VectorXd forward(const Params& p, const RowMatrix& x) {
  const Eigen::MatrixXd a = ((x * p.w1).rowwise() + p.b1.transpose()).array().tanh();
  Eigen::VectorXd z = (a * p.w2).array() + p.b2;
  return z.unaryExpr([](double v) { return detail::sigmoid(v); });
}

LossGradient loss_and_gradient(const Params& p, const RowMatrix& x, const Eigen::VectorXd& y,
                               double l2) {
  const double m = static_cast<double>(x.rows());
  const Eigen::MatrixXd a = ((x * p.w1).rowwise() + p.b1.transpose()).array().tanh();
  const Eigen::VectorXd z = (a * p.w2).array() + p.b2;
  Eigen::VectorXd dz(z.size());
  double loss = 0.0;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const double s = y[k] > 0.5 ? -z[k] : z[k];
    loss += s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    dz[k] = (detail::sigmoid(z[k]) - y[k]) / m;
  }
  loss = loss / m + 0.5 * l2 * (p.w1.squaredNorm() + p.w2.squaredNorm());

  LossGradient out;
  out.loss = loss;
  out.grad.w2 = a.transpose() * dz + l2 * p.w2;
  out.grad.b2 = dz.sum();
  const Eigen::MatrixXd dpre = (dz * p.w2.transpose()).array() * (1.0 - a.array().square());
  out.grad.w1 = x.transpose() * dpre + l2 * p.w1;
  out.grad.b1 = dpre.colwise().sum().transpose();
  return out;
}

}  // namespace mlp

namespace detail {
namespace {

class Mlp final : public Model {
 public:
  Mlp(FeatureScaler scaler, mlp::Params params)
      : scaler_(std::move(scaler)), params_(std::move(params)) {}

  Kind kind() const override { return Kind::mlp; }
  std::size_t dim() const override { return static_cast<std::size_t>(params_.w1.rows()); }

  double score_unchecked(std::span<const double> x) const override {
    const Eigen::VectorXd v = scaler_.transform(x);
    const Eigen::VectorXd a = (params_.w1.transpose() * v + params_.b1).array().tanh();
    return sigmoid(a.dot(params_.w2) + params_.b2);
  }

  nlohmann::json parameters() const override {
    return {{"scaler", scaler_.to_json()},
            {"dim", params_.w1.rows()},
            {"hidden", params_.w1.cols()},
            {"flat", params_.flatten()}};
  }

  static ModelPtr load(const nlohmann::json& p) {
    mlp::Params params;
    const auto dim = p.at("dim").get<Eigen::Index>();
    const auto hidden = p.at("hidden").get<Eigen::Index>();
    params.w1.resize(dim, hidden);
    params.b1.resize(hidden);
    params.w2.resize(hidden);
    params.assign(p.at("flat").get<std::vector<double>>());
    return std::make_shared<Mlp>(FeatureScaler::from_json(p.at("scaler")), std::move(params));
  }

 private:
  FeatureScaler scaler_;
  mlp::Params params_;
};

}  // namespace

ModelPtr train_mlp(const LabeledDataset& data, const TrainConfig& config, std::uint64_t seed) {
  if (config.mlp_hidden < 1) throw TrainingError("mlp_hidden must be at least 1");
  auto scaler = FeatureScaler::fit(data);
  const RowMatrix x = scaler.transform(data);
  const Eigen::VectorXd y = labels_of(data);
  auto params = mlp::init(data.dim(), static_cast<std::size_t>(config.mlp_hidden), seed);
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < config.mlp_max_iter; ++it) {
    const auto lg = mlp::loss_and_gradient(params, x, y, config.l2);
    if (std::abs(previous - lg.loss) < config.tolerance) break;
    previous = lg.loss;
    const double step = config.mlp_learning_rate;
    params.w1 -= step * lg.grad.w1;
    params.b1 -= step * lg.grad.b1;
    params.w2 -= step * lg.grad.w2;
    params.b2 -= step * lg.grad.b2;
  }
  return std::make_shared<Mlp>(std::move(scaler), std::move(params));
}

ModelPtr load_mlp(const nlohmann::json& p) { return Mlp::load(p); }

}  // namespace detail
}  // namespace pam::clf
