#include "pam/classifiers.hpp"

#include <cmath>
#include <fstream>

#include "internal.hpp"
#include "pam/error.hpp"
#include "pam/parallel.hpp"

namespace pam::clf {

namespace {

struct KindEntry {
  Kind kind;
  std::string_view name;
};

constexpr KindEntry kKindNames[] = {
    {Kind::lr, "lr"},         {Kind::knn, "knn"},       {Kind::linear_svm, "linear_svm"},
    {Kind::nb, "nb"},         {Kind::lda, "lda"},       {Kind::qda, "qda"},
    {Kind::tree, "tree"},     {Kind::forest, "forest"}, {Kind::adaboost, "adaboost"},
    {Kind::gbt, "gbt"},       {Kind::mlp, "mlp"},       {Kind::const_pos, "const_pos"},
};

constexpr int kModelFormatVersion = 1;

class ConstPositive final : public Model {
 public:
  explicit ConstPositive(std::size_t dim) : dim_(dim) {}
  Kind kind() const override { return Kind::const_pos; }
  std::size_t dim() const override { return dim_; }
  double score_unchecked(std::span<const double>) const override { return 1.0; }
  nlohmann::json parameters() const override { return {{"dim", dim_}}; }

 private:
  std::size_t dim_;
};

}  // namespace

std::string_view kind_name(Kind kind) {
  for (const auto& e : kKindNames)
    if (e.kind == kind) return e.name;
  return "unknown";
}

Kind parse_kind(std::string_view name) {
  for (const auto& e : kKindNames)
    if (e.name == name) return e.kind;
  throw ConfigError("unknown classifier '" + std::string(name) + "'");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {
      {"learning_rate", c.learning_rate},
      {"max_iter", c.max_iter},
      {"tolerance", c.tolerance},
      {"l2", c.l2},
      {"knn_k", c.knn_k},
      {"nb_var_smoothing", c.nb_var_smoothing},
      {"tree_max_depth", c.tree_max_depth},
      {"min_samples_leaf", c.min_samples_leaf},
      {"forest_trees", c.forest_trees},
      {"forest_max_depth", c.forest_max_depth},
      {"adaboost_rounds", c.adaboost_rounds},
      {"gbt_rounds", c.gbt_rounds},
      {"gbt_max_depth", c.gbt_max_depth},
      {"gbt_shrinkage", c.gbt_shrinkage},
      {"gbt_lambda", c.gbt_lambda},
      {"mlp_hidden", c.mlp_hidden},
      {"mlp_learning_rate", c.mlp_learning_rate},
      {"mlp_max_iter", c.mlp_max_iter},
  };
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (!j.is_object()) throw ConfigError("classifier hyperparameters must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "learning_rate") c.learning_rate = value.get<double>();
    else if (key == "max_iter") c.max_iter = value.get<int>();
    else if (key == "tolerance") c.tolerance = value.get<double>();
    else if (key == "l2") c.l2 = value.get<double>();
    else if (key == "knn_k") c.knn_k = value.get<int>();
    else if (key == "nb_var_smoothing") c.nb_var_smoothing = value.get<double>();
    else if (key == "tree_max_depth") c.tree_max_depth = value.get<int>();
    else if (key == "min_samples_leaf") c.min_samples_leaf = value.get<int>();
    else if (key == "forest_trees") c.forest_trees = value.get<int>();
    else if (key == "forest_max_depth") c.forest_max_depth = value.get<int>();
    else if (key == "adaboost_rounds") c.adaboost_rounds = value.get<int>();
    else if (key == "gbt_rounds") c.gbt_rounds = value.get<int>();
    else if (key == "gbt_max_depth") c.gbt_max_depth = value.get<int>();
    else if (key == "gbt_shrinkage") c.gbt_shrinkage = value.get<double>();
    else if (key == "gbt_lambda") c.gbt_lambda = value.get<double>();
    else if (key == "mlp_hidden") c.mlp_hidden = value.get<int>();
    else if (key == "mlp_learning_rate") c.mlp_learning_rate = value.get<double>();
    else if (key == "mlp_max_iter") c.mlp_max_iter = value.get<int>();
    else throw ConfigError("unknown hyperparameter '" + key + "'");
  }
  return c;
}

double TrainedModel::score(std::span<const double> x) const {
  if (x.size() != dim())
    throw InvalidInput("feature vector has length " + std::to_string(x.size()) +
                       ", model expects " + std::to_string(dim()));
  return model_->score_unchecked(x);
}

int TrainedModel::predict(std::span<const double> x) const {
  return score(x) >= kDecisionThreshold ? 1 : 0;
}

std::vector<double> TrainedModel::score_all(const LabeledDataset& data, unsigned threads) const {
  if (data.dim() != dim())
    throw InvalidInput("dataset dimension " + std::to_string(data.dim()) +
                       " does not match model dimension " + std::to_string(dim()));
  std::vector<double> out(data.size());
  parallel_for(data.size(), threads,
               [&](std::size_t k) { out[k] = model_->score_unchecked(data.row(k)); });
  return out;
}

nlohmann::json TrainedModel::to_json() const {
  return {{"format", "pam-model"},
          {"version", kModelFormatVersion},
          {"kind", kind_name(kind())},
          {"seed", seed_},
          {"config", clf::to_json(config_)},
          {"parameters", model_->parameters()}};
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
  using namespace detail;
  if (j.value("format", "") != "pam-model") throw StructuralError("not a pam-model document");
  if (j.value("version", 0) != kModelFormatVersion)
    throw StructuralError("unsupported model format version");
  const Kind kind = parse_kind(j.at("kind").get<std::string>());
  const auto& p = j.at("parameters");
  ModelPtr model;
  switch (kind) {
    case Kind::lr: model = load_lr(p); break;
    case Kind::knn: model = load_knn(p); break;
    case Kind::linear_svm: model = load_linear_svm(p); break;
    case Kind::nb: model = load_nb(p); break;
    case Kind::lda: model = load_lda(p); break;
    case Kind::qda: model = load_qda(p); break;
    case Kind::tree: model = load_tree(p); break;
    case Kind::forest: model = load_forest(p); break;
    case Kind::adaboost: model = load_adaboost(p); break;
    case Kind::gbt: model = load_gbt(p); break;
    case Kind::mlp: model = load_mlp(p); break;
    case Kind::const_pos: model = load_const_pos(p); break;
  }
  return TrainedModel(std::move(model), train_config_from_json(j.at("config")),
                      j.at("seed").get<std::uint64_t>());
}

void TrainedModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << to_json().dump() << '\n';
}

TrainedModel TrainedModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(path + ": " + e.what());
  }
}

TrainedModel train(Kind kind, const LabeledDataset& data, const TrainConfig& config,
                   std::uint64_t seed) {
  using namespace detail;
  if (data.size() < 2 || !data.has_both_classes())
    throw TrainingError(std::string(kind_name(kind)) + ": training data must contain both classes");
  ModelPtr model;
  switch (kind) {
    case Kind::lr: model = train_lr(data, config); break;
    case Kind::knn: model = train_knn(data, config); break;
    case Kind::linear_svm: model = train_linear_svm(data, config); break;
    case Kind::nb: model = train_nb(data, config); break;
    case Kind::lda: model = train_lda(data); break;
    case Kind::qda: model = train_qda(data); break;
    case Kind::tree: model = train_tree(data, config); break;
    case Kind::forest: model = train_forest(data, config, seed); break;
    case Kind::adaboost: model = train_adaboost(data, config); break;
    case Kind::gbt: model = train_gbt(data, config); break;
    case Kind::mlp: model = train_mlp(data, config, seed); break;
    case Kind::const_pos: model = train_const_pos(data); break;
  }
  return TrainedModel(std::move(model), config, seed);
}

namespace detail {

Eigen::VectorXd labels_of(const LabeledDataset& data) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(data.size()));
  for (std::size_t k = 0; k < data.size(); ++k) y[static_cast<Eigen::Index>(k)] = data.label(k);
  return y;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

FeatureScaler FeatureScaler::fit(const LabeledDataset& data) {
  const auto x = as_matrix(data);
  FeatureScaler s;
  s.mean = x.colwise().mean().transpose();
  Eigen::VectorXd sd = ((x.rowwise() - s.mean.transpose()).array().square().colwise().mean())
                           .sqrt()
                           .transpose();
  const double widest = sd.size() ? sd.maxCoeff() : 0.0;
  s.inv_scale.resize(sd.size());
  for (Eigen::Index k = 0; k < sd.size(); ++k)
    s.inv_scale[k] = sd[k] > 1e-9 * widest && sd[k] > 0.0 ? 1.0 / sd[k] : 1.0;
  return s;
}

RowMatrix FeatureScaler::transform(const LabeledDataset& data) const {
  RowMatrix x = as_matrix(data);
  x.rowwise() -= mean.transpose();
  x.array().rowwise() *= inv_scale.transpose().array();
  return x;
}

Eigen::VectorXd FeatureScaler::transform(std::span<const double> x) const {
  return ((as_vector(x) - mean).array() * inv_scale.array()).matrix();
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_std(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json FeatureScaler::to_json() const {
  return {{"mean", to_std(mean)}, {"inv_scale", to_std(inv_scale)}};
}

FeatureScaler FeatureScaler::from_json(const nlohmann::json& j) {
  return {from_std(j.at("mean").get<std::vector<double>>()),
          from_std(j.at("inv_scale").get<std::vector<double>>())};
}

ModelPtr train_const_pos(const LabeledDataset& data) {
  return std::make_shared<ConstPositive>(data.dim());
}

ModelPtr load_const_pos(const nlohmann::json& p) {
  return std::make_shared<ConstPositive>(p.at("dim").get<std::size_t>());
}

}  // namespace detail
}  // namespace pam::clf
