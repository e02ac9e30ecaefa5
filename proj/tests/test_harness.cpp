#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "pam/error.hpp"
#include "pam/harness.hpp"

using namespace pam;
using namespace pam::harness;
namespace fs = std::filesystem;

namespace {

LabeledDataset numbered(std::size_t n, std::size_t dim = 3) {
  LabeledDataset d(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(dim, static_cast<double>(i));
    d.add(x, static_cast<int>(i % 2), {static_cast<std::uint32_t>(i / 10), static_cast<std::uint32_t>(i), 0});
  }
  return d;
}

ExperimentConfig small_config(const fs::path& dir) {
  auto c = default_config();
  c.population.benign_samples = 1;
  c.population.malignant_samples = 1;
  c.population.ood_benign_samples = 1;
  c.population.ood_malignant_samples = 1;
  c.acquisition.rows = 20;
  c.acquisition.cols = 20;
  c.acquisition.n_samples = 256;
  for (auto& e : c.classifiers) {
    e.config.forest_trees = 10;
    e.config.adaboost_rounds = 10;
    e.config.gbt_rounds = 10;
    e.config.mlp_hidden = 8;
    e.config.mlp_max_iter = 50;
    e.config.max_iter = 100;
  }
  c.output_dir = dir.string();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("pam_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("split sizes, determinism and partition law") {
  const auto d = numbered(100);
  const auto a = split(d, 0.75, 42);
  CHECK(a.train.size() == 75);
  CHECK(a.test.size() == 25);
  const auto b = split(d, 0.75, 42);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(split(d, 0.75, 43).train != a.train);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  for (auto i : a.test) CHECK(all.insert(i).second);
  CHECK(all.size() == 100);
  CHECK(std::is_sorted(a.train.begin(), a.train.end()));

  CHECK_THROWS_AS(split(d, 0.0, 1), InvalidInput);
  CHECK_THROWS_AS(split(d, 1.0, 1), InvalidInput);
  CHECK_THROWS_AS(split(numbered(2), 0.75, 1), InvalidInput);
}

TEST_CASE("split warns when a part lacks a class") {
  LabeledDataset d(1, 0.0);
  for (int i = 0; i < 9; ++i) d.add(std::vector<double>{1.0 * i}, 0, {});
  d.add(std::vector<double>{9.0}, 1, {});
  const auto s = split(d, 0.5, 3);
  CHECK(!s.warnings.empty());
}

TEST_CASE("dataset files round-trip bitwise") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e300, 1e300);
  LabeledDataset d(7, 80e6);
  for (std::uint32_t i = 0; i < 13; ++i) {
    std::vector<double> x(7);
    for (auto& v : x) v = u(rng);
    x[0] = -0.0;
    x[1] = std::numeric_limits<double>::denorm_min();
    d.add(x, static_cast<int>(i % 2), {i, i + 1, i + 2});
  }
  std::stringstream buf;
  write_dataset(buf, d);
  const auto back = read_dataset(buf);
  CHECK(back.dim() == 7);
  CHECK(back.sample_rate() == 80e6);
  REQUIRE(back.size() == d.size());
  CHECK(std::memcmp(back.values().data(), d.values().data(), d.values().size() * sizeof(double)) == 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.label(i) == d.label(i));
    CHECK(back.source(i) == d.source(i));
  }
  const std::string bytes = [&] {
    std::stringstream s;
    write_dataset(s, d);
    return s.str();
  }();
  CHECK(bytes.substr(0, 4) == "PAMD");

  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(read_dataset(truncated), StructuralError);
  std::stringstream garbage(std::string("NOPE") + bytes.substr(4));
  CHECK_THROWS_AS(read_dataset(garbage), StructuralError);
}

TEST_CASE("feature datasets use their own magic") {
  std::stringstream buf;
  write_dataset(buf, numbered(4));
  CHECK(buf.str().substr(0, 4) == "PAMF");
  CHECK(read_dataset(buf).sample_rate() == 0.0);
}

TEST_CASE("score tables round-trip") {
  ScoreTable t;
  t.sources = {{1, 2, 3}, {4, 5, 6}};
  t.labels = {1, 0};
  t.scores = {0.1, 1.0 / 3.0};
  std::stringstream buf;
  write_scores(buf, t);
  const auto back = read_scores(buf);
  CHECK(back.scores == t.scores);
  CHECK(back.labels == t.labels);
  CHECK(back.sources == t.sources);
}

TEST_CASE("config JSON round-trip and validation") {
  const auto c = default_config();
  const auto back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(c.split_fraction == 0.75);

  auto j = to_json(c);
  j["surprise"] = true;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = to_json(c);
  j["schema_version"] = 2;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = to_json(c);
  j["split_fraction"] = 1.0;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = to_json(c);
  j["population"]["mystery"] = 1;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);

  const auto ood = c.ood_sample_ids();
  const auto ind = c.in_distribution_sample_ids();
  for (auto id : ood) CHECK(std::find(ind.begin(), ind.end(), id) == ind.end());
}

TEST_CASE("seed derivation separates streams") {
  CHECK(derive_seed(1, SeedStream::split) == derive_seed(1, SeedStream::split));
  CHECK(derive_seed(1, SeedStream::split) != derive_seed(1, SeedStream::simulate));
  CHECK(derive_seed(1, SeedStream::classifier, 0) != derive_seed(1, SeedStream::classifier, 1));
  CHECK(derive_seed(1, SeedStream::split) != derive_seed(2, SeedStream::split));
}

TEST_CASE("exit codes are distinct and nonzero") {
  std::set<int> codes;
  for (auto s : {Stage::config, Stage::simulate, Stage::reconstruct, Stage::preprocess, Stage::train,
                 Stage::evaluate, Stage::report}) {
    CHECK(exit_code(s) != 0);
    codes.insert(exit_code(s));
  }
  CHECK(codes.size() == 7);
}

TEST_CASE("OOD audit catches leakage") {
  const auto d = numbered(30);
  CHECK_NOTHROW(audit_ood(d, {7, 8}));
  CHECK_THROWS(audit_ood(d, {2}));
}

TEST_CASE("partition keeps OOD samples out of training") {
  auto c = default_config();
  LabeledDataset d(2, 0.0);
  for (std::uint32_t s = 0; s < 11; ++s)
    for (std::uint32_t k = 0; k < 20; ++k) d.add(std::vector<double>{1.0 * s, 1.0 * k}, s >= 4 && s < 8 ? 1 : (s == 10 ? 1 : 0), {s, k, 0});
  const auto p = partition(d, c);
  const auto ood = c.ood_sample_ids();
  for (auto src : p.train.sources())
    CHECK(std::find(ood.begin(), ood.end(), src.sample_id) == ood.end());
  for (auto src : p.ood.sources())
    CHECK(std::find(ood.begin(), ood.end(), src.sample_id) != ood.end());
  CHECK(p.train.size() + p.test.size() + p.ood.size() == d.size());
}

TEST_CASE("small pipeline runs, reports every classifier and is reproducible") {
  const auto dir_a = scratch("run_a");
  const auto dir_b = scratch("run_b");
  const auto config = small_config(dir_a);
  const auto summary = run_experiment(config, {1});
  CHECK(summary.results.size() == config.classifiers.size());
  CHECK(summary.simulated == 4 * 400);

  std::ifstream metrics(dir_a / "metrics_test.csv");
  std::string line;
  std::getline(metrics, line);
  CHECK(line == metrics::kReportHeader);
  std::size_t rows = 0;
  double prev = 2.0;
  while (std::getline(metrics, line)) {
    ++rows;
    const double acc = std::stod(line.substr(line.find(',') + 1));
    CHECK(acc <= prev);
    prev = acc;
  }
  CHECK(rows == config.classifiers.size());

  for (const auto& r : summary.results) {
    if (r.name != "const_pos") continue;
    const double prevalence = static_cast<double>(r.eval.counts.tp + r.eval.counts.fn) /
                              static_cast<double>(r.eval.counts.total());
    CHECK(r.eval.ppv == prevalence);
    CHECK(r.test.sensitivity == 1.0);
  }

  // Rerun from the written manifest with a different thread count.
  auto again = load_config((dir_a / "manifest.json").string());
  again.output_dir = dir_b.string();
  run_experiment(again, {3});
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    const auto ext = entry.path().extension();
    if (ext != ".csv" && ext != ".pgm") continue;
    CAPTURE(entry.path().filename().string());
    CHECK(slurp(entry.path()) == slurp(dir_b / entry.path().filename()));
    ++compared;
  }
  CHECK(compared >= 2 + 4 * config.classifiers.size() + 4);

  const auto manifest = nlohmann::json::parse(slurp(dir_a / "manifest.json"));
  CHECK(manifest["status"] == "complete");
  CHECK(manifest["split"]["audit"] == "passed");
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("a failing stage marks the manifest incomplete") {
  const auto dir = scratch("fail");
  auto config = small_config(dir);
  // Silent tissue and no noise: every signal is flat and gets dropped.
  config.acquisition.noise_sigma = 0.0;
  config.population.benign.mu_a_min = config.population.benign.mu_a_max = 0.0;
  config.population.malignant.mu_a_min = config.population.malignant.mu_a_max = 0.0;
  try {
    run_experiment(config);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == Stage::train);
  }
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["status"] == "incomplete");
  CHECK(manifest["failed_stage"] == "train");
  fs::remove_all(dir);

  auto bad = small_config(dir);
  bad.split_fraction = 2.0;
  try {
    run_experiment(bad);
    FAIL("expected a config error");
  } catch (const StageError& e) {
    CHECK(e.stage() == Stage::config);
    CHECK(exit_code(e.stage()) == 2);
  }
}
