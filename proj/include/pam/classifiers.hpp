#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pam/dataset.hpp"

namespace pam::clf {

enum class Kind {
  lr,
  knn,
  linear_svm,
  nb,
  lda,
  qda,
  tree,
  forest,
  adaboost,
  gbt,
  mlp,
  const_pos,
};

inline constexpr Kind kAllKinds[] = {Kind::lr,     Kind::knn,      Kind::linear_svm, Kind::nb,
                                     Kind::lda,    Kind::qda,      Kind::tree,       Kind::forest,
                                     Kind::adaboost, Kind::gbt,    Kind::mlp,        Kind::const_pos};

std::string_view kind_name(Kind kind);
// Throws ConfigError for unknown names.
Kind parse_kind(std::string_view name);

// Hyperparameters for every family; each model reads only its own fields.
struct TrainConfig {
  // Gradient-descent models (lr, linear_svm, mlp).
  double learning_rate = 0.1;
  int max_iter = 500;
  double tolerance = 1e-8;  // stop when |loss delta| falls below
  double l2 = 1e-4;

  int knn_k = 2;
  double nb_var_smoothing = 1e-9;

  int tree_max_depth = 8;
  int min_samples_leaf = 1;

  int forest_trees = 100;
  int forest_max_depth = 12;

  int adaboost_rounds = 100;

  int gbt_rounds = 100;
  int gbt_max_depth = 3;
  double gbt_shrinkage = 0.1;
  double gbt_lambda = 1.0;

  int mlp_hidden = 64;
  double mlp_learning_rate = 0.5;
  int mlp_max_iter = 300;

  // Training threads for models that split work deterministically (forest).
  unsigned threads = 1;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

// Learned state of one classifier family.
class Model {
 public:
  virtual ~Model() = default;
  virtual Kind kind() const = 0;
  virtual std::size_t dim() const = 0;
  // Score in [0, 1]; higher means more cancer-like. Input length is checked by
  // the caller.
  virtual double score_unchecked(std::span<const double> x) const = 0;
  virtual nlohmann::json parameters() const = 0;
  // Training loss per boosting round, where the family defines one.
  virtual std::vector<double> loss_history() const { return {}; }
};

// Immutable, cheaply copyable handle to a trained classifier.
class TrainedModel {
 public:
  TrainedModel(std::shared_ptr<const Model> model, TrainConfig config, std::uint64_t seed)
      : model_(std::move(model)), config_(config), seed_(seed) {}

  Kind kind() const { return model_->kind(); }
  std::size_t dim() const { return model_->dim(); }
  const TrainConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  const Model& model() const { return *model_; }

  // Throws InvalidInput on dimension mismatch.
  double score(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
  std::vector<double> score_all(const LabeledDataset& data, unsigned threads = 1) const;

  std::vector<double> loss_history() const { return model_->loss_history(); }

  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static TrainedModel load(const std::string& path);

 private:
  std::shared_ptr<const Model> model_;
  TrainConfig config_;
  std::uint64_t seed_;
};

// Deterministic in (kind, data, config, seed). Throws TrainingError when the
// data holds a single class.
TrainedModel train(Kind kind, const LabeledDataset& data, const TrainConfig& config,
                   std::uint64_t seed);

inline constexpr double kDecisionThreshold = 0.5;

}  // namespace pam::clf
