#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <Eigen/Dense>

#include "pam/classifiers.hpp"
#include "pam/error.hpp"
#include "pam/mlp.hpp"

using namespace pam;
using namespace pam::clf;

namespace {

// Two Gaussian blobs in `dim` dimensions, centres `gap` apart along every axis.
LabeledDataset blobs(std::size_t n, std::size_t dim, double gap, std::uint64_t seed,
                     double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  LabeledDataset d(dim, 0.0);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    for (auto& v : x) v = g(rng) + (y ? gap / 2 : -gap / 2);
    d.add(x, y, {0, static_cast<std::uint32_t>(i), 0});
  }
  return d;
}

LabeledDataset flip(const LabeledDataset& d) {
  LabeledDataset out(d.dim(), d.sample_rate());
  for (std::size_t i = 0; i < d.size(); ++i) out.add(d.row(i), 1 - d.label(i), d.source(i));
  return out;
}

TrainConfig quick() {
  TrainConfig c;
  c.forest_trees = 20;
  c.adaboost_rounds = 30;
  c.gbt_rounds = 30;
  c.mlp_hidden = 8;
  c.mlp_max_iter = 200;
  return c;
}

double accuracy(const TrainedModel& m, const LabeledDataset& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) ok += m.predict(d.row(i)) == d.label(i);
  return static_cast<double>(ok) / static_cast<double>(d.size());
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

TEST_CASE("kind names round-trip") {
  for (Kind k : kAllKinds) CHECK(parse_kind(kind_name(k)) == k);
  CHECK_THROWS_AS(parse_kind("rbf_svm"), ConfigError);
}

TEST_CASE("const_pos scores one everywhere") {
  const auto d = blobs(20, 3, 2.0, 1);
  const auto m = train(Kind::const_pos, d, {}, 0);
  for (double x : {-1e9, 0.0, 3.5}) {
    std::vector<double> p(3, x);
    CHECK(m.score(p) == 1.0);
    CHECK(m.predict(p) == 1);
  }
}

TEST_CASE("training rejects single-class data and scoring checks dimension") {
  LabeledDataset d(2, 0.0);
  d.add(std::vector<double>{0.0, 1.0}, 1, {});
  d.add(std::vector<double>{1.0, 1.0}, 1, {});
  for (Kind k : kAllKinds) CHECK_THROWS_AS(train(k, d, quick(), 0), TrainingError);
  const auto m = train(Kind::lr, blobs(20, 2, 3.0, 2), quick(), 0);
  CHECK_THROWS_AS(m.score(std::vector<double>{1.0}), InvalidInput);
}

TEST_CASE("separable blobs are learned by every family") {
  const auto train_set = blobs(200, 2, 6.0, 3);
  const auto test_set = blobs(200, 2, 6.0, 4);
  for (Kind k : kAllKinds) {
    if (k == Kind::const_pos) continue;
    CAPTURE(kind_name(k));
    const auto m = train(k, train_set, quick(), 5);
    CHECK(accuracy(m, test_set) >= 0.95);
    if (k == Kind::lr) CHECK(accuracy(m, train_set) >= 0.99);
  }
}

TEST_CASE("training and scoring are deterministic") {
  const auto d = blobs(120, 4, 1.5, 6);
  const auto probe = blobs(50, 4, 1.5, 7);
  for (Kind k : kAllKinds) {
    CAPTURE(kind_name(k));
    auto cfg = quick();
    const auto a = train(k, d, cfg, 11).score_all(probe);
    cfg.threads = 3;
    const auto b = train(k, d, cfg, 11).score_all(probe, 2);
    CHECK(a == b);
  }
}

TEST_CASE("scores stay in [0, 1] for arbitrary finite inputs") {
  const auto d = blobs(100, 3, 2.0, 8);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> exponent(-3, 8);
  for (Kind k : kAllKinds) {
    CAPTURE(kind_name(k));
    const auto m = train(k, d, quick(), 1);
    bool ok = true;
    for (int trial = 0; trial < 10000; ++trial) {
      std::vector<double> x(3);
      for (auto& v : x) v = g(rng) * std::pow(10.0, exponent(rng));
      const double s = m.score(x);
      ok = ok && s >= 0.0 && s <= 1.0;
    }
    CHECK(ok);
  }
}

TEST_CASE("flipping labels mirrors LR, LDA and NB scores") {
  const auto d = blobs(150, 3, 1.0, 10);
  const auto flipped = flip(d);
  const auto probe = blobs(40, 3, 1.0, 12);
  for (Kind k : {Kind::lr, Kind::lda, Kind::nb}) {
    CAPTURE(kind_name(k));
    const auto a = train(k, d, quick(), 0).score_all(probe);
    const auto b = train(k, flipped, quick(), 0).score_all(probe);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] + b[i] - 1.0) <= 1e-9);
  }
}

TEST_CASE("k-NN with k = 2") {
  const auto d = blobs(100, 2, 1.0, 13);
  const auto m = train(Kind::knn, d, {}, 0);
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> x{g(rng), g(rng)};
    const double s = m.score(x);
    CHECK((s == 0.0 || s == 0.5 || s == 1.0));
  }

  LabeledDataset two(1, 0.0);
  two.add(std::vector<double>{0.0}, 0, {});
  two.add(std::vector<double>{1.0}, 1, {});
  two.add(std::vector<double>{10.0}, 0, {});
  const auto mixed = train(Kind::knn, two, {}, 0);
  CHECK(mixed.score(std::vector<double>{0.4}) == 0.5);
  CHECK(mixed.predict(std::vector<double>{0.4}) == 1);
  CHECK(mixed.score(std::vector<double>{9.0}) == 0.5);
}

TEST_CASE("naive Bayes is confident at a well separated class mean") {
  const auto d = blobs(200, 2, 8.0, 15);
  const auto m = train(Kind::nb, d, {}, 0);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  std::size_t n = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!d.label(i)) continue;
    mean += Eigen::Map<const Eigen::Vector2d>(d.row(i).data());
    ++n;
  }
  mean /= static_cast<double>(n);
  CHECK(m.score(std::vector<double>{mean[0], mean[1]}) > 0.99);
}

TEST_CASE("LDA direction agrees with the Fisher direction") {
  // Shared correlated covariance so the Fisher direction differs from the mean gap.
  std::mt19937_64 rng(16);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Matrix3d chol;
  chol << 1.0, 0.0, 0.0, 0.8, 0.6, 0.0, -0.3, 0.5, 0.7;
  const Eigen::Vector3d mu0(0.0, 0.0, 0.0), mu1(1.0, 0.5, -0.4);
  LabeledDataset d(3, 0.0);
  for (int i = 0; i < 4000; ++i) {
    const int y = i % 2;
    Eigen::Vector3d z(g(rng), g(rng), g(rng));
    Eigen::Vector3d x = (y ? mu1 : mu0) + chol * z;
    d.add(std::vector<double>{x[0], x[1], x[2]}, y, {});
  }
  // Independent pooled estimate.
  Eigen::Vector3d m[2] = {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  double cnt[2] = {0, 0};
  for (std::size_t i = 0; i < d.size(); ++i) {
    m[d.label(i)] += Eigen::Map<const Eigen::Vector3d>(d.row(i).data());
    cnt[d.label(i)] += 1;
  }
  m[0] /= cnt[0];
  m[1] /= cnt[1];
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < d.size(); ++i) {
    Eigen::Vector3d r = Eigen::Map<const Eigen::Vector3d>(d.row(i).data()) - m[d.label(i)];
    s += r * r.transpose();
  }
  s /= static_cast<double>(d.size() - 2);
  const Eigen::Vector3d fisher = s.ldlt().solve(m[1] - m[0]).normalized();

  const auto model = train(Kind::lda, d, {}, 0);
  const double base = logit(model.score(std::vector<double>{0, 0, 0}));
  Eigen::Vector3d w;
  for (int j = 0; j < 3; ++j) {
    std::vector<double> e(3, 0.0);
    e[j] = 0.1;
    w[j] = (logit(model.score(e)) - base) / 0.1;
  }
  const double angle = std::acos(std::clamp(w.normalized().dot(fisher), -1.0, 1.0));
  CHECK(angle * 180.0 / std::numbers::pi < 5.0);
}

TEST_CASE("near-singular covariance is regularized, not fatal") {
  LabeledDataset d(3, 0.0);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    const double a = g(rng) + (i % 2) * 2.0;
    d.add(std::vector<double>{a, 2.0 * a, 5.0}, i % 2, {});
  }
  for (Kind k : {Kind::lda, Kind::qda, Kind::nb}) {
    CAPTURE(kind_name(k));
    const auto m = train(k, d, {}, 0);
    const double s = m.score(std::vector<double>{1.0, 2.0, 5.0});
    CHECK(std::isfinite(s));
    CHECK(accuracy(m, d) > 0.7);
  }
}

TEST_CASE("boosting losses never increase") {
  const auto d = blobs(200, 3, 1.0, 18);
  for (Kind k : {Kind::adaboost, Kind::gbt}) {
    CAPTURE(kind_name(k));
    const auto loss = train(k, d, quick(), 0).loss_history();
    REQUIRE(loss.size() >= 2);
    for (std::size_t r = 1; r < loss.size(); ++r) CHECK(loss[r] <= loss[r - 1] + 1e-12);
    CHECK(loss.back() < loss.front());
  }
}

TEST_CASE("MLP gradient matches central differences") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> g(0.0, 1.0);
  mlp::RowMatrix x(5, 4);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 4; ++j) x(i, j) = g(rng);
    y[i] = i % 2;
  }
  auto p = mlp::init(4, 6, 3);
  p.b1.setConstant(0.1);
  p.b2 = -0.2;
  const auto analytic = mlp::loss_and_gradient(p, x, y, 1e-3).grad.flatten();
  auto flat = p.flatten();
  std::vector<double> numeric(flat.size());
  const double h = 1e-5;
  for (std::size_t k = 0; k < flat.size(); ++k) {
    auto q = p;
    auto f = flat;
    f[k] = flat[k] + h;
    q.assign(f);
    const double up = mlp::loss_and_gradient(q, x, y, 1e-3).loss;
    f[k] = flat[k] - h;
    q.assign(f);
    const double down = mlp::loss_and_gradient(q, x, y, 1e-3).loss;
    numeric[k] = (up - down) / (2 * h);
  }
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t k = 0; k < flat.size(); ++k) {
    diff += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
    na += analytic[k] * analytic[k];
    nn += numeric[k] * numeric[k];
  }
  CHECK(std::sqrt(diff) / std::max(std::sqrt(na), std::sqrt(nn)) < 1e-4);
}

TEST_CASE("model serialization round-trips scores") {
  const auto d = blobs(120, 3, 1.5, 20);
  const auto probe = blobs(60, 3, 1.5, 21);
  for (Kind k : kAllKinds) {
    CAPTURE(kind_name(k));
    const auto m = train(k, d, quick(), 4);
    const auto text = m.to_json().dump();
    const auto back = TrainedModel::from_json(nlohmann::json::parse(text));
    CHECK(back.kind() == k);
    CHECK(back.seed() == 4);
    const auto a = m.score_all(probe);
    const auto b = back.score_all(probe);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
  }
  auto j = train(Kind::lr, d, quick(), 0).to_json();
  j["version"] = 99;
  CHECK_THROWS(TrainedModel::from_json(j));
}

TEST_CASE("train config JSON round-trip and unknown keys") {
  TrainConfig c;
  c.knn_k = 5;
  c.gbt_shrinkage = 0.25;
  const auto back = train_config_from_json(to_json(c));
  CHECK(back.knn_k == 5);
  CHECK(back.gbt_shrinkage == 0.25);
  auto j = to_json(c);
  j["bogus"] = 1;
  CHECK_THROWS_AS(train_config_from_json(j), ConfigError);
}
