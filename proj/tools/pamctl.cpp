// Command-line front end: one subcommand per pipeline stage plus `pipeline`
// to run them all.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "pam/harness.hpp"
#include "pam/preprocess.hpp"
#include "pam/signal.hpp"

namespace fs = std::filesystem;
using namespace pam;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

harness::ExperimentConfig load(const Common& c) {
  auto config = c.config_path.empty() ? harness::default_config() : harness::load_config(c.config_path);
  if (c.seed) config.seed = *c.seed;
  return config;
}

void add_common(CLI::App* cmd, Common& c, bool with_threads = true) {
  cmd->add_option("-c,--config", c.config_path, "Experiment config (JSON); defaults if omitted");
  cmd->add_option("-s,--seed", c.seed, "Override the global seed");
  if (with_threads) cmd->add_option("-j,--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

template <typename Fn>
int stage(harness::Stage s, Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const harness::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return harness::exit_code(e.stage());
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return harness::exit_code(harness::Stage::config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << harness::stage_name(s) << ": " << e.what() << '\n';
    return harness::exit_code(s);
  }
}

phantom::AcquisitionConfig acquisition_for(const harness::ExperimentConfig& config) {
  auto acq = config.acquisition;
  acq.rng_seed = harness::derive_seed(config.seed, harness::SeedStream::simulate);
  return acq;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photoacoustic A-scan simulation, MAP reconstruction and classifier benchmark"};
  app.require_subcommand(1);

  Common common;
  std::string out;
  std::string signals_path, features_path, model_path, in_dir, classifier;

  auto* config_cmd = app.add_subcommand("config", "Print the default experiment config");

  auto* simulate = app.add_subcommand("simulate", "Simulate the phantom population");
  add_common(simulate, common);
  simulate->add_option("-o,--out", out, "Output directory")->required();

  auto* reconstruct = app.add_subcommand("reconstruct", "Write MAP images for every sample");
  add_common(reconstruct, common);
  reconstruct->add_option("--signals", signals_path, "Raw signal dataset")->required();
  reconstruct->add_option("-o,--out", out, "Output directory")->required();

  auto* prep = app.add_subcommand("preprocess", "Extract spectral features from raw signals");
  add_common(prep, common);
  prep->add_option("--signals", signals_path, "Raw signal dataset")->required();
  prep->add_option("-o,--out", out, "Feature dataset path")->required();

  auto* train = app.add_subcommand("train", "Train one classifier on the training split");
  add_common(train, common);
  train->add_option("--features", features_path, "Feature dataset")->required();
  train->add_option("--classifier", classifier, "Classifier kind")->required();
  train->add_option("-o,--out", out, "Model output path (JSON)")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score the test split and OOD set");
  add_common(evaluate, common);
  evaluate->add_option("--features", features_path, "Feature dataset")->required();
  evaluate->add_option("--model", model_path, "Trained model (JSON)")->required();
  evaluate->add_option("-o,--out", out, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Build metric tables and curves from score files");
  report->add_option("--in", in_dir, "Directory holding scores_<clf>_<set>.csv")->required();
  report->add_option("-o,--out", out, "Output directory")->required();

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end");
  add_common(pipeline, common);
  pipeline->add_option("-o,--out", out, "Output directory (overrides config)");

  CLI11_PARSE(app, argc, argv);

  if (config_cmd->parsed()) {
    std::cout << harness::to_json(harness::default_config()).dump(2) << '\n';
    return 0;
  }

  if (simulate->parsed()) {
    return stage(harness::Stage::simulate, [&] {
      const auto config = load(common);
      fs::create_directories(out);
      const auto pop = phantom::simulate_dataset(config.population, acquisition_for(config),
                                                 config.transducer, common.threads);
      harness::write_dataset((fs::path(out) / "signals.bin").string(), pop.signals);
      std::ofstream(fs::path(out) / "simulation.log") << pop.log.str();
      std::cout << "simulated " << pop.signals.size() << " signals from " << pop.samples.size()
                << " samples\n";
    });
  }

  if (reconstruct->parsed()) {
    return stage(harness::Stage::reconstruct, [&] {
      const auto config = load(common);
      const auto signals = harness::read_dataset(signals_path);
      fs::create_directories(out);
      for (const auto& s : config.population.samples()) {
        const auto grid = phantom::sample_grid(signals, s.id, config.acquisition);
        const auto img = signal::normalize_image(signal::map_project(grid, common.threads),
                                                 config.image_bit_depth);
        signal::write_pgm((fs::path(out) / ("map_" + std::to_string(s.id) + ".pgm")).string(), img);
      }
    });
  }

  if (prep->parsed()) {
    return stage(harness::Stage::preprocess, [&] {
      const auto signals = harness::read_dataset(signals_path);
      const auto batch = preprocess::preprocess_dataset(signals, common.threads);
      harness::write_dataset(out, batch.features);
      std::cout << "features: " << batch.features.size() << " rows, dropped "
                << batch.dropped.size() << " zero-variance signals\n";
      for (const auto& d : batch.dropped)
        std::cerr << "dropped sample " << d.sample_id << " (" << d.row << "," << d.col << ")\n";
    });
  }

  if (train->parsed()) {
    return stage(harness::Stage::train, [&] {
      const auto config = load(common);
      const auto kind = clf::parse_kind(classifier);
      clf::TrainConfig hyper;
      for (const auto& e : config.classifiers)
        if (e.kind == kind) hyper = e.config;
      hyper.threads = common.threads;
      const auto parts = harness::partition(harness::read_dataset(features_path), config);
      for (const auto& w : parts.warnings) std::cerr << "warning: " << w << '\n';
      const auto seed = harness::derive_seed(config.seed, harness::SeedStream::classifier,
                                             static_cast<std::uint64_t>(kind));
      clf::train(kind, parts.train, hyper, seed).save(out);
    });
  }

  if (evaluate->parsed()) {
    return stage(harness::Stage::evaluate, [&] {
      const auto config = load(common);
      const auto model = clf::TrainedModel::load(model_path);
      const auto parts = harness::partition(harness::read_dataset(features_path), config);
      fs::create_directories(out);
      const std::string name(clf::kind_name(model.kind()));
      auto emit = [&](const LabeledDataset& data, const std::string& set) {
        harness::ScoreTable t;
        t.sources.assign(data.sources().begin(), data.sources().end());
        t.labels.assign(data.labels().begin(), data.labels().end());
        t.scores = model.score_all(data, common.threads);
        std::ofstream f(fs::path(out) / ("scores_" + name + "_" + set + ".csv"), std::ios::binary);
        harness::write_scores(f, t);
      };
      emit(parts.test, "test");
      if (!parts.ood.empty()) emit(parts.ood, "eval");
    });
  }

  if (report->parsed()) {
    return stage(harness::Stage::report, [&] {
      // scores_<clf>_<set>.csv, grouped by set, classifiers in name order.
      std::map<std::string, std::map<std::string, harness::ScoreTable>> sets;
      for (const auto& entry : fs::directory_iterator(in_dir)) {
        const auto file = entry.path().filename().string();
        if (file.rfind("scores_", 0) != 0 || entry.path().extension() != ".csv") continue;
        const auto stem = entry.path().stem().string().substr(7);
        const auto cut = stem.rfind('_');
        if (cut == std::string::npos) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        sets[stem.substr(cut + 1)][stem.substr(0, cut)] = harness::read_scores(in);
      }
      if (sets.empty()) throw Error("no score files found in " + in_dir);
      fs::create_directories(out);
      for (const auto& [set, tables] : sets) {
        std::vector<std::string> names;
        std::vector<harness::ScoreTable> list;
        for (const auto& [name, t] : tables) {
          names.push_back(name);
          list.push_back(t);
        }
        harness::write_reports(out, names, list, set);
      }
    });
  }

  if (pipeline->parsed()) {
    return stage(harness::Stage::config, [&] {
      auto config = load(common);
      if (!out.empty()) config.output_dir = out;
      const auto summary = harness::run_experiment(config, {common.threads});
      std::cout << "signals: " << summary.simulated << " simulated, " << summary.dropped
                << " dropped; train " << summary.train_size << ", test " << summary.test_size
                << ", ood " << summary.ood_size << '\n';
      for (const auto& r : summary.results) {
        std::cout << "  " << r.name << ": test acc " << metrics::format_value(r.test.accuracy)
                  << " auroc " << metrics::format_value(r.test.auroc);
        if (r.has_eval)
          std::cout << " | eval acc " << metrics::format_value(r.eval.accuracy) << " auroc "
                    << metrics::format_value(r.eval.auroc);
        std::cout << '\n';
      }
      std::cout << "outputs in " << summary.output_dir.string() << '\n';
    });
  }
  return 0;
}
