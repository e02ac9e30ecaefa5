// Tree-based classifiers built on the shared CART grower: a single CART tree,
// a bootstrap random forest, SAMME AdaBoost over stumps and logistic-loss
// gradient-boosted trees.
#include <cmath>

#include "cart.hpp"
#include "internal.hpp"
#include "pam/error.hpp"
#include "pam/parallel.hpp"

namespace pam::clf::detail {
namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed ^ (stream * 0x9E3779B97F4A7C15ull);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::vector<Tree> trees_from_json(const nlohmann::json& j) {
  std::vector<Tree> out;
  for (const auto& t : j) out.push_back(Tree::from_json(t));
  return out;
}

nlohmann::json trees_to_json(const std::vector<Tree>& trees) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : trees) out.push_back(t.to_json());
  return out;
}

class SingleTree final : public Model {
 public:
  SingleTree(std::size_t dim, Tree tree) : dim_(dim), tree_(std::move(tree)) {}
  Kind kind() const override { return Kind::tree; }
  std::size_t dim() const override { return dim_; }
  double score_unchecked(std::span<const double> x) const override { return tree_.predict(x); }
  nlohmann::json parameters() const override { return {{"dim", dim_}, {"tree", tree_.to_json()}}; }

 private:
  std::size_t dim_;
  Tree tree_;
};

class Forest final : public Model {
 public:
  Forest(std::size_t dim, std::vector<Tree> trees) : dim_(dim), trees_(std::move(trees)) {}
  Kind kind() const override { return Kind::forest; }
  std::size_t dim() const override { return dim_; }
  double score_unchecked(std::span<const double> x) const override {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(x);
    return sum / static_cast<double>(trees_.size());
  }
  nlohmann::json parameters() const override {
    return {{"dim", dim_}, {"trees", trees_to_json(trees_)}};
  }

 private:
  std::size_t dim_;
  std::vector<Tree> trees_;
};

// F(x) = sum alpha_t h_t(x) with h in {-1, +1}; score = sigmoid(F).
class AdaBoost final : public Model {
 public:
  AdaBoost(std::size_t dim, std::vector<Tree> stumps, std::vector<double> alphas,
           std::vector<double> losses)
      : dim_(dim), stumps_(std::move(stumps)), alphas_(std::move(alphas)),
        losses_(std::move(losses)) {}
  Kind kind() const override { return Kind::adaboost; }
  std::size_t dim() const override { return dim_; }
  double score_unchecked(std::span<const double> x) const override {
    double f = 0.0;
    for (std::size_t t = 0; t < stumps_.size(); ++t)
      f += alphas_[t] * (stumps_[t].predict(x) >= 0.5 ? 1.0 : -1.0);
    return sigmoid(f);
  }
  nlohmann::json parameters() const override {
    return {{"dim", dim_}, {"stumps", trees_to_json(stumps_)}, {"alphas", alphas_},
            {"losses", losses_}};
  }
  std::vector<double> loss_history() const override { return losses_; }

 private:
  std::size_t dim_;
  std::vector<Tree> stumps_;
  std::vector<double> alphas_;
  std::vector<double> losses_;
};

// F(x) = base + shrinkage * sum tree_t(x); score = sigmoid(F).
class Gbt final : public Model {
 public:
  Gbt(std::size_t dim, double base, double shrinkage, std::vector<Tree> trees,
      std::vector<double> losses)
      : dim_(dim), base_(base), shrinkage_(shrinkage), trees_(std::move(trees)),
        losses_(std::move(losses)) {}
  Kind kind() const override { return Kind::gbt; }
  std::size_t dim() const override { return dim_; }
  double score_unchecked(std::span<const double> x) const override {
    double f = 0.0;
    for (const auto& t : trees_) f += t.predict(x);
    return sigmoid(base_ + shrinkage_ * f);
  }
  nlohmann::json parameters() const override {
    return {{"dim", dim_},         {"base", base_},     {"shrinkage", shrinkage_},
            {"trees", trees_to_json(trees_)}, {"losses", losses_}};
  }
  std::vector<double> loss_history() const override { return losses_; }

 private:
  std::size_t dim_;
  double base_;
  double shrinkage_;
  std::vector<Tree> trees_;
  std::vector<double> losses_;
};

double log_loss(double f, double y) {
  // -[y log sigmoid(f) + (1 - y) log(1 - sigmoid(f))], computed stably.
  const double z = y > 0.5 ? -f : f;
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace

ModelPtr train_tree(const LabeledDataset& data, const TrainConfig& config) {
  const auto sorted = SortedColumns::build(data);
  std::vector<double> a(data.size()), b(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    a[k] = data.label(k);
    b[k] = 1.0 - a[k];
  }
  const std::vector<std::uint8_t> active(data.size(), 1);
  TreeParams params;
  params.max_depth = config.tree_max_depth;
  params.min_samples_leaf = config.min_samples_leaf;
  return std::make_shared<SingleTree>(data.dim(), grow_tree(data, sorted, a, b, active, params));
}

ModelPtr load_tree(const nlohmann::json& p) {
  return std::make_shared<SingleTree>(p.at("dim").get<std::size_t>(), Tree::from_json(p.at("tree")));
}

ModelPtr train_forest(const LabeledDataset& data, const TrainConfig& config, std::uint64_t seed) {
  if (config.forest_trees < 1) throw TrainingError("forest_trees must be at least 1");
  const auto sorted = SortedColumns::build(data);
  const std::size_t m = data.size();
  TreeParams params;
  params.max_depth = config.forest_max_depth;
  params.min_samples_leaf = config.min_samples_leaf;
  params.max_features =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(data.dim()))));

  std::vector<Tree> trees(static_cast<std::size_t>(config.forest_trees));
  // Each tree owns a generator seeded from (seed, tree index), so the forest
  // is identical for any thread count.
  parallel_for(trees.size(), config.threads, [&](std::size_t t) {
    std::mt19937_64 rng(mix_seed(seed, t));
    std::uniform_int_distribution<std::size_t> draw(0, m - 1);
    std::vector<double> counts(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) counts[draw(rng)] += 1.0;
    std::vector<double> a(m), b(m);
    std::vector<std::uint8_t> active(m);
    for (std::size_t k = 0; k < m; ++k) {
      a[k] = counts[k] * data.label(k);
      b[k] = counts[k] - a[k];
      active[k] = counts[k] > 0.0;
    }
    trees[t] = grow_tree(data, sorted, a, b, active, params, &rng);
  });
  return std::make_shared<Forest>(data.dim(), std::move(trees));
}

ModelPtr load_forest(const nlohmann::json& p) {
  return std::make_shared<Forest>(p.at("dim").get<std::size_t>(), trees_from_json(p.at("trees")));
}

ModelPtr train_adaboost(const LabeledDataset& data, const TrainConfig& config) {
  const auto sorted = SortedColumns::build(data);
  const std::size_t m = data.size();
  std::vector<double> w(m, 1.0 / static_cast<double>(m));
  std::vector<double> f(m, 0.0);
  std::vector<double> a(m), b(m);
  const std::vector<std::uint8_t> active(m, 1);
  TreeParams params;
  params.max_depth = 1;

  std::vector<Tree> stumps;
  std::vector<double> alphas;
  std::vector<double> losses;
  for (int round = 0; round < config.adaboost_rounds; ++round) {
    for (std::size_t k = 0; k < m; ++k) {
      a[k] = w[k] * data.label(k);
      b[k] = w[k] - a[k];
    }
    Tree stump = grow_tree(data, sorted, a, b, active, params);
    std::vector<std::uint8_t> wrong(m);
    double err = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const int h = stump.predict(data.row(k)) >= 0.5 ? 1 : 0;
      wrong[k] = h != data.label(k);
      if (wrong[k]) err += w[k];
    }
    if (err >= 0.5) break;
    const double clipped = std::max(err, 1e-10);
    // Two-class SAMME weight.
    const double alpha = std::log((1.0 - clipped) / clipped);
    double total = 0.0;
    double loss = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (wrong[k]) w[k] *= std::exp(alpha);
      total += w[k];
      const double y = data.label(k) ? 1.0 : -1.0;
      f[k] += alpha * (wrong[k] ? -y : y);
      // Exponential loss of the half-margin, which SAMME's reweighting minimizes.
      loss += std::exp(-0.5 * y * f[k]);
    }
    for (auto& v : w) v /= total;
    stumps.push_back(std::move(stump));
    alphas.push_back(alpha);
    losses.push_back(loss / static_cast<double>(m));
    if (err <= 0.0) break;
  }
  return std::make_shared<AdaBoost>(data.dim(), std::move(stumps), std::move(alphas),
                                    std::move(losses));
}

ModelPtr load_adaboost(const nlohmann::json& p) {
  return std::make_shared<AdaBoost>(p.at("dim").get<std::size_t>(), trees_from_json(p.at("stumps")),
                                    p.at("alphas").get<std::vector<double>>(),
                                    p.at("losses").get<std::vector<double>>());
}

ModelPtr train_gbt(const LabeledDataset& data, const TrainConfig& config) {
  const auto sorted = SortedColumns::build(data);
  const std::size_t m = data.size();
  const double prevalence = static_cast<double>(data.count_positive()) / static_cast<double>(m);
  const double base = std::log(prevalence / (1.0 - prevalence));
  std::vector<double> f(m, base);
  std::vector<double> g(m), h(m);
  const std::vector<std::uint8_t> active(m, 1);
  TreeParams params;
  params.criterion = Criterion::newton;
  params.max_depth = config.gbt_max_depth;
  params.min_samples_leaf = config.min_samples_leaf;
  params.lambda = config.gbt_lambda;

  auto mean_loss = [&] {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += log_loss(f[k], data.label(k));
    return s / static_cast<double>(m);
  };

  std::vector<Tree> trees;
  std::vector<double> losses{mean_loss()};
  for (int round = 0; round < config.gbt_rounds; ++round) {
    for (std::size_t k = 0; k < m; ++k) {
      const double p = sigmoid(f[k]);
      g[k] = p - data.label(k);
      h[k] = std::max(p * (1.0 - p), 1e-16);
    }
    Tree tree = grow_tree(data, sorted, g, h, active, params);
    for (std::size_t k = 0; k < m; ++k) f[k] += config.gbt_shrinkage * tree.predict(data.row(k));
    trees.push_back(std::move(tree));
    losses.push_back(mean_loss());
  }
  return std::make_shared<Gbt>(data.dim(), base, config.gbt_shrinkage, std::move(trees),
                               std::move(losses));
}

ModelPtr load_gbt(const nlohmann::json& p) {
  return std::make_shared<Gbt>(p.at("dim").get<std::size_t>(), p.at("base").get<double>(),
                               p.at("shrinkage").get<double>(), trees_from_json(p.at("trees")),
                               p.at("losses").get<std::vector<double>>());
}

}  // namespace pam::clf::detail
