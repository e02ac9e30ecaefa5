#include <algorithm>
#include <limits>

#include "internal.hpp"
#include "pam/error.hpp"

namespace pam::clf::detail {
namespace {

// Euclidean k-NN on raw features. Equal distances resolve to the lower
// training index, so results never depend on traversal order.
class Knn final : public Model {
 public:
  Knn(int k, std::size_t dim, std::vector<double> points, std::vector<std::uint8_t> labels)
      : k_(k), dim_(dim), points_(std::move(points)), labels_(std::move(labels)) {}

  Kind kind() const override { return Kind::knn; }
  std::size_t dim() const override { return dim_; }

  double score_unchecked(std::span<const double> x) const override {
    const std::size_t n = labels_.size();
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), n);
    // Insertion into a sorted list of the k best (distance, index) pairs.
    std::vector<std::pair<double, std::size_t>> best;
    best.reserve(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double* p = points_.data() + i * dim_;
      double d = 0.0;
      for (std::size_t f = 0; f < dim_; ++f) {
        const double diff = p[f] - x[f];
        d += diff * diff;
      }
      if (best.size() == k && d >= best.back().first) continue;
      auto pos = std::upper_bound(best.begin(), best.end(), std::make_pair(d, i));
      best.insert(pos, {d, i});
      if (best.size() > k) best.pop_back();
    }
    std::size_t positive = 0;
    for (const auto& [d, i] : best) positive += labels_[i];
    return static_cast<double>(positive) / static_cast<double>(best.size());
  }

  nlohmann::json parameters() const override {
    return {{"k", k_}, {"dim", dim_}, {"points", points_}, {"labels", labels_}};
  }

 private:
  int k_;
  std::size_t dim_;
  std::vector<double> points_;
  std::vector<std::uint8_t> labels_;
};

}  // namespace

ModelPtr train_knn(const LabeledDataset& data, const TrainConfig& config) {
  if (config.knn_k < 1) throw TrainingError("knn_k must be at least 1");
  return std::make_shared<Knn>(config.knn_k, data.dim(),
                               std::vector<double>(data.values().begin(), data.values().end()),
                               std::vector<std::uint8_t>(data.labels().begin(), data.labels().end()));
}

ModelPtr load_knn(const nlohmann::json& p) {
  return std::make_shared<Knn>(p.at("k").get<int>(), p.at("dim").get<std::size_t>(),
                               p.at("points").get<std::vector<double>>(),
                               p.at("labels").get<std::vector<std::uint8_t>>());
}

}  // namespace pam::clf::detail
