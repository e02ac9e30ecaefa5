#include <filesystem>
#include <fstream>
#include <type_traits>

#include "pam/harness.hpp"
#include "pam/preprocess.hpp"
#include "pam/signal.hpp"

namespace pam::harness {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
}

void mark_done(json& manifest, Stage stage) {
  auto& done = manifest["stages_completed"];
  const std::string name(stage_name(stage));
  for (const auto& s : done)
    if (s == name) return;
  done.push_back(name);
}

template <typename Fn>
auto run_stage(Stage stage, json& manifest, Fn&& fn) {
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      mark_done(manifest, stage);
    } else {
      auto result = fn();
      mark_done(manifest, stage);
      return result;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

ScoreTable make_table(const LabeledDataset& data, std::vector<double> scores) {
  ScoreTable t;
  t.sources.assign(data.sources().begin(), data.sources().end());
  t.labels.assign(data.labels().begin(), data.labels().end());
  t.scores = std::move(scores);
  return t;
}

}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::config: return "config";
    case Stage::simulate: return "simulate";
    case Stage::reconstruct: return "reconstruct";
    case Stage::preprocess: return "preprocess";
    case Stage::train: return "train";
    case Stage::evaluate: return "evaluate";
    case Stage::report: return "report";
  }
  return "unknown";
}

int exit_code(Stage stage) {
  switch (stage) {
    case Stage::config: return 2;
    case Stage::simulate: return 10;
    case Stage::reconstruct: return 11;
    case Stage::preprocess: return 12;
    case Stage::train: return 13;
    case Stage::evaluate: return 14;
    case Stage::report: return 15;
  }
  return 1;
}

void write_reports(const fs::path& dir, const std::vector<std::string>& names,
                   const std::vector<ScoreTable>& tables, std::string_view set_name) {
  std::vector<metrics::NamedReport> rows;
  const std::string infix = set_name == "test" ? "" : std::string(set_name) + "_";
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto& t = tables[k];
    rows.push_back({names[k], metrics::report(t.scores, t.labels)});
    std::ofstream roc(dir / ("roc_" + infix + names[k] + ".csv"), std::ios::binary);
    metrics::write_curve_csv(roc, metrics::roc_curve(t.scores, t.labels).points);
    std::ofstream prc(dir / ("prc_" + infix + names[k] + ".csv"), std::ios::binary);
    metrics::write_curve_csv(prc, metrics::pr_curve(t.scores, t.labels).points);
    if (!roc || !prc) throw Error("failed writing curves for " + names[k]);
  }
  std::ofstream out(dir / ("metrics_" + std::string(set_name) + ".csv"), std::ios::binary);
  if (!out) throw Error("cannot write metrics_" + std::string(set_name) + ".csv");
  metrics::write_report_csv(out, std::move(rows));
}

RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  try {
    config.validate();
  } catch (const std::exception& e) {
    throw StageError(Stage::config, e.what());
  }
  const fs::path dir = config.output_dir;
  fs::create_directories(dir);

  json manifest = {{"format", "pam-run"},
                   {"version", kVersion},
                   {"status", "incomplete"},
                   {"config", to_json(config)},
                   {"stages_completed", json::array()}};
  const auto manifest_path = dir / "manifest.json";
  auto flush_manifest = [&] { write_text(manifest_path, manifest.dump(2) + "\n"); };

  RunSummary summary;
  summary.output_dir = dir;
  const unsigned threads = std::max(1u, options.threads);

  try {
    auto acquisition = config.acquisition;
    acquisition.rng_seed = derive_seed(config.seed, SeedStream::simulate);
    manifest["seeds"] = {{"global", config.seed},
                         {"simulate", acquisition.rng_seed},
                         {"split", derive_seed(config.seed, SeedStream::split)}};

    auto population = run_stage(Stage::simulate, manifest, [&] {
      auto pop = phantom::simulate_dataset(config.population, acquisition, config.transducer,
                                           threads);
      write_text(dir / "simulation.log", pop.log.str());
      if (config.write_datasets) write_dataset((dir / "signals.bin").string(), pop.signals);
      return pop;
    });
    summary.simulated = population.signals.size();
    json samples = json::array();
    for (const auto& s : population.samples)
      samples.push_back({{"id", s.id},
                         {"label", s.label == phantom::TissueClass::malignant ? "malignant" : "benign"},
                         {"ood", s.ood}});
    manifest["samples"] = samples;

    run_stage(Stage::reconstruct, manifest, [&] {
      for (const auto& s : population.samples) {
        const auto grid = phantom::sample_grid(population.signals, s.id, acquisition);
        const auto img = signal::normalize_image(signal::map_project(grid, threads),
                                                 config.image_bit_depth);
        signal::write_pgm((dir / ("map_" + std::to_string(s.id) + ".pgm")).string(), img);
      }
    });

    auto features = run_stage(Stage::preprocess, manifest, [&] {
      auto batch = preprocess::preprocess_dataset(population.signals, threads);
      if (config.write_datasets) write_dataset((dir / "features.bin").string(), batch.features);
      return batch;
    });
    population.signals = LabeledDataset();
    summary.dropped = features.dropped.size();
    manifest["signals"] = {{"simulated", summary.simulated}, {"dropped_zero_variance", summary.dropped}};

    auto parts = run_stage(Stage::train, manifest, [&] { return partition(features.features, config); });
    features.features = LabeledDataset();
    summary.train_size = parts.train.size();
    summary.test_size = parts.test.size();
    summary.ood_size = parts.ood.size();
    manifest["split"] = {{"train", summary.train_size},
                         {"test", summary.test_size},
                         {"ood", summary.ood_size},
                         {"warnings", parts.warnings},
                         {"ood_sample_ids", config.ood_sample_ids()},
                         {"audit", "passed"}};
    flush_manifest();

    std::vector<std::string> names;
    std::vector<ScoreTable> test_tables, eval_tables;
    json trained = json::array();
    for (std::size_t c = 0; c < config.classifiers.size(); ++c) {
      const auto& entry = config.classifiers[c];
      const std::string name(clf::kind_name(entry.kind));
      const auto seed = derive_seed(config.seed, SeedStream::classifier, static_cast<std::uint64_t>(entry.kind));
      auto train_config = entry.config;
      train_config.threads = threads;
      const auto model = run_stage(Stage::train, manifest,
                                   [&] { return clf::train(entry.kind, parts.train, train_config, seed); });
      run_stage(Stage::evaluate, manifest, [&] {
        test_tables.push_back(make_table(parts.test, model.score_all(parts.test, threads)));
        if (!parts.ood.empty())
          eval_tables.push_back(make_table(parts.ood, model.score_all(parts.ood, threads)));
      });
      names.push_back(name);
      trained.push_back({{"classifier", name}, {"seed", seed}});
    }
    manifest["classifiers"] = trained;

    run_stage(Stage::report, manifest, [&] {
      write_reports(dir, names, test_tables, "test");
      if (!eval_tables.empty()) write_reports(dir, names, eval_tables, "eval");
    });
    for (std::size_t k = 0; k < names.size(); ++k) {
      ClassifierResult r;
      r.name = names[k];
      r.test = metrics::report(test_tables[k].scores, test_tables[k].labels);
      if (!eval_tables.empty()) {
        r.has_eval = true;
        r.eval = metrics::report(eval_tables[k].scores, eval_tables[k].labels);
      }
      summary.results.push_back(std::move(r));
    }
    manifest["status"] = "complete";
    flush_manifest();
  } catch (const StageError& e) {
    manifest["status"] = "incomplete";
    manifest["failed_stage"] = stage_name(e.stage());
    manifest["error"] = e.what();
    flush_manifest();
    throw;
  }
  return summary;
}

}  // namespace pam::harness
