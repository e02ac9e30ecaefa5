// Generative Gaussian classifiers: naive Bayes, LDA and QDA. Each scores with
// the class-1 posterior.
#include <cmath>

#include "internal.hpp"
#include "pam/error.hpp"

namespace pam::clf::detail {
namespace {

struct ClassStats {
  Eigen::VectorXd mean;
  RowMatrix centered;
  double prior = 0.0;
};

ClassStats class_stats(const LabeledDataset& data, int label) {
  const auto x = as_matrix(data);
  std::vector<Eigen::Index> rows;
  for (std::size_t k = 0; k < data.size(); ++k)
    if (data.label(k) == label) rows.push_back(static_cast<Eigen::Index>(k));
  RowMatrix xc(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) xc.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
  ClassStats s;
  s.mean = xc.colwise().mean().transpose();
  xc.rowwise() -= s.mean.transpose();
  s.centered = std::move(xc);
  s.prior = static_cast<double>(rows.size()) / static_cast<double>(data.size());
  return s;
}

// Cholesky factor of a covariance estimate. When the matrix is near-singular
// (factorization fails or its reciprocal condition estimate is tiny), lambda I
// with lambda = 1e-6 trace / dim is added first.
Eigen::MatrixXd regularized_cholesky(Eigen::MatrixXd cov, bool* regularized = nullptr) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const bool singular = llt.info() != Eigen::Success || !(llt.rcond() > 1e-12);
  if (regularized) *regularized = singular;
  if (singular) {
    double lambda = 1e-6 * cov.trace() / static_cast<double>(cov.rows());
    if (!(lambda > 0.0)) lambda = 1e-12;
    cov.diagonal().array() += lambda;
    llt.compute(cov);
    if (llt.info() != Eigen::Success) throw TrainingError("covariance is not positive definite");
  }
  return llt.matrixL();
}

RowMatrix to_matrix(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != rows * cols)
    throw StructuralError("matrix parameter has the wrong size");
  return Eigen::Map<const RowMatrix>(v.data(), rows, cols);
}

std::vector<double> flatten(const RowMatrix& m) { return {m.data(), m.data() + m.size()}; }

class NaiveBayes final : public Model {
 public:
  NaiveBayes(Eigen::VectorXd mean0, Eigen::VectorXd var0, Eigen::VectorXd mean1,
             Eigen::VectorXd var1, double prior1)
      : mean_{std::move(mean0), std::move(mean1)}, var_{std::move(var0), std::move(var1)},
        prior1_(prior1) {}

  Kind kind() const override { return Kind::nb; }
  std::size_t dim() const override { return static_cast<std::size_t>(mean_[0].size()); }

  double score_unchecked(std::span<const double> x) const override {
    const auto v = as_vector(x);
    double log_odds = std::log(prior1_) - std::log1p(-prior1_);
    for (Eigen::Index f = 0; f < v.size(); ++f) {
      const double d0 = v[f] - mean_[0][f];
      const double d1 = v[f] - mean_[1][f];
      log_odds += -0.5 * (d1 * d1 / var_[1][f] - d0 * d0 / var_[0][f]) -
                  0.5 * (std::log(var_[1][f]) - std::log(var_[0][f]));
    }
    return sigmoid(log_odds);
  }

  nlohmann::json parameters() const override {
    return {{"mean0", to_std(mean_[0])}, {"var0", to_std(var_[0])}, {"mean1", to_std(mean_[1])},
            {"var1", to_std(var_[1])},   {"prior1", prior1_}};
  }

 private:
  Eigen::VectorXd mean_[2];
  Eigen::VectorXd var_[2];
  double prior1_;
};

class Lda final : public Model {
 public:
  Lda(Eigen::VectorXd w, double b) : w_(std::move(w)), b_(b) {}
  Kind kind() const override { return Kind::lda; }
  std::size_t dim() const override { return static_cast<std::size_t>(w_.size()); }
  double score_unchecked(std::span<const double> x) const override {
    return sigmoid(as_vector(x).dot(w_) + b_);
  }
  nlohmann::json parameters() const override { return {{"weights", to_std(w_)}, {"bias", b_}}; }
  const Eigen::VectorXd& weights() const { return w_; }

 private:
  Eigen::VectorXd w_;
  double b_;
};

class Qda final : public Model {
 public:
  struct Component {
    Eigen::VectorXd mean;
    Eigen::MatrixXd chol;  // lower-triangular factor of the covariance
    double log_prior = 0.0;
    double half_log_det = 0.0;
  };

  explicit Qda(Component c0, Component c1) : c_{std::move(c0), std::move(c1)} {}

  Kind kind() const override { return Kind::qda; }
  std::size_t dim() const override { return static_cast<std::size_t>(c_[0].mean.size()); }

  double score_unchecked(std::span<const double> x) const override {
    const auto v = as_vector(x);
    double ll[2];
    for (int c = 0; c < 2; ++c) {
      const Eigen::VectorXd z =
          c_[c].chol.triangularView<Eigen::Lower>().solve(v - c_[c].mean);
      ll[c] = -0.5 * z.squaredNorm() - c_[c].half_log_det + c_[c].log_prior;
    }
    return sigmoid(ll[1] - ll[0]);
  }

  nlohmann::json parameters() const override {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : c_) {
      comps.push_back({{"mean", to_std(c.mean)},
                       {"chol", flatten(RowMatrix(c.chol))},
                       {"log_prior", c.log_prior},
                       {"half_log_det", c.half_log_det}});
    }
    return {{"components", comps}};
  }

  static Component make_component(const ClassStats& s) {
    const double n = static_cast<double>(s.centered.rows());
    Eigen::MatrixXd cov = (s.centered.transpose() * s.centered) / n;
    Component c;
    c.mean = s.mean;
    c.chol = regularized_cholesky(std::move(cov));
    c.half_log_det = c.chol.diagonal().array().log().sum();
    c.log_prior = std::log(s.prior);
    return c;
  }

  static Component load_component(const nlohmann::json& j) {
    Component c;
    c.mean = from_std(j.at("mean").get<std::vector<double>>());
    c.chol = to_matrix(j.at("chol"), c.mean.size(), c.mean.size());
    c.log_prior = j.at("log_prior").get<double>();
    c.half_log_det = j.at("half_log_det").get<double>();
    return c;
  }

 private:
  Component c_[2];
};

}  // namespace

ModelPtr train_nb(const LabeledDataset& data, const TrainConfig& config) {
  const auto s0 = class_stats(data, 0);
  const auto s1 = class_stats(data, 1);
  const auto x = as_matrix(data);
  const Eigen::RowVectorXd overall = x.colwise().mean();
  const double widest = (x.rowwise() - overall).array().square().colwise().mean().maxCoeff();
  double epsilon = config.nb_var_smoothing * widest;
  if (!(epsilon > 0.0)) epsilon = 1e-300;
  auto var = [&](const ClassStats& s) -> Eigen::VectorXd {
    return (s.centered.array().square().colwise().mean().transpose() + epsilon).matrix();
  };
  return std::make_shared<NaiveBayes>(s0.mean, var(s0), s1.mean, var(s1), s1.prior);
}

ModelPtr load_nb(const nlohmann::json& p) {
  return std::make_shared<NaiveBayes>(from_std(p.at("mean0").get<std::vector<double>>()),
                                      from_std(p.at("var0").get<std::vector<double>>()),
                                      from_std(p.at("mean1").get<std::vector<double>>()),
                                      from_std(p.at("var1").get<std::vector<double>>()),
                                      p.at("prior1").get<double>());
}

ModelPtr train_lda(const LabeledDataset& data) {
  const auto s0 = class_stats(data, 0);
  const auto s1 = class_stats(data, 1);
  const double m = static_cast<double>(data.size());
  Eigen::MatrixXd cov =
      (s0.centered.transpose() * s0.centered + s1.centered.transpose() * s1.centered) / m;
  const Eigen::MatrixXd chol = regularized_cholesky(std::move(cov));
  const auto lower = chol.triangularView<Eigen::Lower>();
  Eigen::VectorXd w = lower.transpose().solve(lower.solve(s1.mean - s0.mean));
  const double b = -0.5 * (s1.mean + s0.mean).dot(w) + std::log(s1.prior) - std::log(s0.prior);
  return std::make_shared<Lda>(std::move(w), b);
}

ModelPtr load_lda(const nlohmann::json& p) {
  return std::make_shared<Lda>(from_std(p.at("weights").get<std::vector<double>>()),
                               p.at("bias").get<double>());
}

ModelPtr train_qda(const LabeledDataset& data) {
  return std::make_shared<Qda>(Qda::make_component(class_stats(data, 0)),
                               Qda::make_component(class_stats(data, 1)));
}

ModelPtr load_qda(const nlohmann::json& p) {
  const auto& comps = p.at("components");
  if (!comps.is_array() || comps.size() != 2) throw StructuralError("QDA needs two components");
  return std::make_shared<Qda>(Qda::load_component(comps[0]), Qda::load_component(comps[1]));
}

}  // namespace pam::clf::detail
