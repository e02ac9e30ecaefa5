#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pam/error.hpp"
#include "pam/preprocess.hpp"

using namespace pam;
using pam::preprocess::features;

TEST_CASE("pure tone has a single one-sided spectral line") {
  std::vector<double> s(64);
  for (std::size_t n = 0; n < 64; ++n) s[n] = std::cos(2 * std::numbers::pi * 4 * n / 64.0);
  const auto y = features(s);
  REQUIRE(y.size() == 64);
  const auto peak = std::max_element(y.begin(), y.end()) - y.begin();
  CHECK(peak == 4);
  for (std::size_t k = 33; k < 64; ++k) CHECK(y[k] < 1e-9);
  for (std::size_t k = 0; k < 64; ++k)
    if (k != 4) CHECK(y[k] < 1e-9 * y[4]);
}

TEST_CASE("zero variance is a degenerate signal") {
  CHECK_THROWS_AS(features(std::vector<double>(16, 3.25)), DegenerateSignal);
}

TEST_CASE("matches the direct-summation oracle") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 2.0);
  for (std::size_t n : {32u, 31u, 7u}) {
    std::vector<double> s(n);
    for (auto& v : s) v = g(rng) + 5.0;
    const auto got = features(s);
    const auto want = oracle::preprocess(s);
    REQUIRE(got.size() == n);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(got[k] - want[k]) <= 1e-9);
  }
}

TEST_CASE("affine invariance, one-sidedness and Parseval") {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0), offset(-50.0, 50.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 16 + static_cast<std::size_t>(trial) * 7;
    std::vector<double> s(n), t(n);
    const double a = scale(rng), b = offset(rng);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = g(rng);
      t[i] = a * s[i] + b;
    }
    const auto y = features(s);
    const auto y2 = features(t);
    double peak = 0.0, energy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(y[k] - y2[k]) <= 1e-9 * std::max(1.0, y[k]));
      CHECK(y[k] >= 0.0);
      peak = std::max(peak, y[k]);
      energy += y[k] * y[k];
    }
    for (std::size_t k = n / 2 + 1; k < n; ++k) CHECK(y[k] <= 1e-9 * peak);

    // standardized then analytic, in the time domain
    double mean = 0.0, var = 0.0;
    for (double v : s) mean += v / n;
    for (double v : s) var += (v - mean) * (v - mean) / n;
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (s[i] - mean) / std::sqrt(var);
    double time_energy = 0.0;
    for (const auto& c : oracle::analytic(z)) time_energy += std::norm(c);
    CHECK(std::abs(energy - n * time_energy) <= 1e-9 * energy);
  }
}

TEST_CASE("batch preprocessing drops flat signals and ignores thread count") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  LabeledDataset raw(40, 80e6);
  for (std::uint32_t k = 0; k < 30; ++k) {
    std::vector<double> s(40);
    if (k % 7 == 3) {
      std::fill(s.begin(), s.end(), 1.5);
    } else {
      for (auto& v : s) v = g(rng);
    }
    raw.add(s, static_cast<int>(k % 2), {k / 10, k % 10, 0});
  }
  const auto one = preprocess::preprocess_dataset(raw, 1);
  const auto four = preprocess::preprocess_dataset(raw, 4);
  CHECK(one.dropped.size() == 4);
  CHECK(one.features.size() == 26);
  CHECK(one.features.sample_rate() == 0.0);
  CHECK(std::equal(one.features.values().begin(), one.features.values().end(),
                   four.features.values().begin(), four.features.values().end()));
  CHECK(one.dropped == four.dropped);
  for (const auto& src : one.dropped) CHECK((src.sample_id * 10 + src.row) % 7 == 3);
  for (std::size_t k = 0; k < one.features.size(); ++k) {
    const auto src = one.features.source(k);
    CHECK((src.sample_id * 10 + src.row) % 7 != 3);
  }
}

TEST_CASE("FeatureVector carries its source") {
  std::vector<double> s{1.0, 2.0, 0.5, -1.0};
  const auto fv = preprocess::preprocess(AScan(s, 80e6), {3, 4, 5});
  CHECK(fv.source == SourceId{3, 4, 5});
  CHECK(fv.values.size() == 4);
}
