#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "pam/dataset.hpp"

namespace pam::clf::detail {

// Flat binary tree. Internal nodes send x[feature] <= threshold left.
struct Tree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  double predict(std::span<const double> x) const;
  nlohmann::json to_json() const;
  static Tree from_json(const nlohmann::json& j);
};

// Per-sample additive statistics. Classification stores (positive weight,
// negative weight); gradient boosting stores (gradient, hessian).
struct SplitStats {
  double a = 0.0;
  double b = 0.0;
  std::size_t count = 0;
};

enum class Criterion {
  gini,    // leaf = a / (a + b)
  newton,  // gain from g^2 / (h + lambda), leaf = -g / (h + lambda)
};

struct TreeParams {
  Criterion criterion = Criterion::gini;
  int max_depth = 8;
  int min_samples_leaf = 1;
  double lambda = 1.0;  // newton only
  // Features examined per node; 0 means all.
  std::size_t max_features = 0;
};

// Feature-major sort order of the rows of a dataset, computed once and shared
// by every tree grown on that dataset.
struct SortedColumns {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<std::uint32_t> order;  // dim blocks of `rows` indices

  static SortedColumns build(const LabeledDataset& data);
  std::span<const std::uint32_t> column(std::size_t f) const {
    return {order.data() + f * rows, rows};
  }
};

// Level-wise CART growth. Samples with zero weight (both stats zero and
// `active` false) are ignored. Splits are evaluated at midpoints between
// consecutive distinct values; ties keep the lowest feature index, then the
// lowest threshold. `rng` is consulted only when max_features limits the
// per-node candidate set.
Tree grow_tree(const LabeledDataset& data, const SortedColumns& sorted,
               std::span<const double> stat_a, std::span<const double> stat_b,
               std::span<const std::uint8_t> active, const TreeParams& params,
               std::mt19937_64* rng = nullptr);

}  // namespace pam::clf::detail
