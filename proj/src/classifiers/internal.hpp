#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "pam/classifiers.hpp"

namespace pam::clf::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ModelPtr = std::shared_ptr<const Model>;

inline Eigen::Map<const RowMatrix> as_matrix(const LabeledDataset& data) {
  return {data.values().data(), static_cast<Eigen::Index>(data.size()),
          static_cast<Eigen::Index>(data.dim())};
}

inline Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

Eigen::VectorXd labels_of(const LabeledDataset& data);

double sigmoid(double z);

// Per-feature standardization. Features whose spread is negligible relative
// to the widest feature are centered but not rescaled, so numerically-zero
// bins are not inflated into unit-variance noise.
struct FeatureScaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd inv_scale;

  static FeatureScaler fit(const LabeledDataset& data);
  RowMatrix transform(const LabeledDataset& data) const;
  Eigen::VectorXd transform(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static FeatureScaler from_json(const nlohmann::json& j);
};

std::vector<double> to_std(const Eigen::VectorXd& v);
Eigen::VectorXd from_std(const std::vector<double>& v);

ModelPtr train_const_pos(const LabeledDataset& data);
ModelPtr load_const_pos(const nlohmann::json& p);

ModelPtr train_lr(const LabeledDataset& data, const TrainConfig& config);
ModelPtr load_lr(const nlohmann::json& p);
ModelPtr train_linear_svm(const LabeledDataset& data, const TrainConfig& config);
ModelPtr load_linear_svm(const nlohmann::json& p);

ModelPtr train_knn(const LabeledDataset& data, const TrainConfig& config);
ModelPtr load_knn(const nlohmann::json& p);

ModelPtr train_nb(const LabeledDataset& data, const TrainConfig& config);
ModelPtr load_nb(const nlohmann::json& p);
ModelPtr train_lda(const LabeledDataset& data);
ModelPtr load_lda(const nlohmann::json& p);
ModelPtr train_qda(const LabeledDataset& data);
ModelPtr load_qda(const nlohmann::json& p);

ModelPtr train_tree(const LabeledDataset& data, const TrainConfig& config);
ModelPtr load_tree(const nlohmann::json& p);
ModelPtr train_forest(const LabeledDataset& data, const TrainConfig& config, std::uint64_t seed);
ModelPtr load_forest(const nlohmann::json& p);
ModelPtr train_adaboost(const LabeledDataset& data, const TrainConfig& config);
ModelPtr load_adaboost(const nlohmann::json& p);
ModelPtr train_gbt(const LabeledDataset& data, const TrainConfig& config);
ModelPtr load_gbt(const nlohmann::json& p);

ModelPtr train_mlp(const LabeledDataset& data, const TrainConfig& config, std::uint64_t seed);
ModelPtr load_mlp(const nlohmann::json& p);

}  // namespace pam::clf::detail
