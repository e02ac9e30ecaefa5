#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pam/classifiers.hpp"
#include "pam/dataset.hpp"
#include "pam/error.hpp"
#include "pam/metrics.hpp"
#include "pam/phantom.hpp"

namespace pam::harness {

inline constexpr int kConfigSchemaVersion = 1;

struct ClassifierEntry {
  clf::Kind kind = clf::Kind::lr;
  clf::TrainConfig config;
};

struct ExperimentConfig {
  phantom::PopulationSpec population;
  phantom::AcquisitionConfig acquisition;
  phantom::TransducerModel transducer;
  std::vector<ClassifierEntry> classifiers;
  double split_fraction = 0.75;
  std::uint64_t seed = 2023;
  std::string output_dir = "out";
  int image_bit_depth = 8;
  // Raw signal and feature files are large; written only on request.
  bool write_datasets = false;

  // Sample ids used for out-of-distribution evaluation.
  std::vector<std::uint32_t> ood_sample_ids() const;
  std::vector<std::uint32_t> in_distribution_sample_ids() const;

  // Throws ConfigError when any invariant fails.
  void validate() const;
};

// Defaults matching the bundled example configuration: every classifier,
// 4 + 4 in-distribution samples on a 25 x 25 raster and a shifted OOD set.
ExperimentConfig default_config();

nlohmann::json to_json(const ExperimentConfig& config);
// Keys omitted from the document keep their defaults; unknown keys are errors.
ExperimentConfig config_from_json(const nlohmann::json& j);
// Accepts either a config document or a run manifest.json.
ExperimentConfig load_config(const std::string& path);

// Independent random streams derived from the global seed.
enum class SeedStream : std::uint64_t {
  simulate = 1,
  split = 2,
  classifier = 3,
};
std::uint64_t derive_seed(std::uint64_t global, SeedStream stream, std::uint64_t index = 0);

// ---- dataset files -------------------------------------------------------
// Little-endian layout:
//   magic "PAMD" (raw signals) or "PAMF" (features), u32 version, u32 N,
//   f64 sample_rate, u64 count, then per record:
//   u32 sample_id, u32 row, u32 col, u8 label, N x f64 values.
inline constexpr std::uint32_t kDatasetVersion = 1;

void write_dataset(std::ostream& out, const LabeledDataset& data);
void write_dataset(const std::string& path, const LabeledDataset& data);
LabeledDataset read_dataset(std::istream& in);
LabeledDataset read_dataset(const std::string& path);

// ---- splits --------------------------------------------------------------
struct Split {
  std::vector<std::size_t> train;  // indices into the source dataset, ascending
  std::vector<std::size_t> test;
  std::vector<std::string> warnings;
};

// Seeded uniform shuffle, then round(fraction * M) rows go to training.
// Throws InvalidInput if either part would be empty.
Split split(const LabeledDataset& data, double fraction, std::uint64_t seed);

struct Partition {
  LabeledDataset train;
  LabeledDataset test;
  LabeledDataset ood;
  std::vector<std::string> warnings;
};

// Separates OOD samples, then splits the in-distribution rows.
Partition partition(const LabeledDataset& features, const ExperimentConfig& config);

// Throws Error if any training row comes from an OOD sample.
void audit_ood(const LabeledDataset& train, const std::vector<std::uint32_t>& ood_ids);

// ---- scores --------------------------------------------------------------
struct ScoreTable {
  std::vector<SourceId> sources;
  std::vector<std::uint8_t> labels;
  std::vector<double> scores;
};

void write_scores(std::ostream& out, const ScoreTable& table);
ScoreTable read_scores(std::istream& in);

// ---- pipeline ------------------------------------------------------------
enum class Stage { config, simulate, reconstruct, preprocess, train, evaluate, report };

std::string_view stage_name(Stage stage);
int exit_code(Stage stage);

class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& what)
      : Error(std::string(stage_name(stage)) + ": " + what), stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

struct RunOptions {
  unsigned threads = 1;
};

struct ClassifierResult {
  std::string name;
  metrics::MetricReport test;
  bool has_eval = false;
  metrics::MetricReport eval;
};

struct RunSummary {
  std::size_t simulated = 0;
  std::size_t dropped = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t ood_size = 0;
  std::vector<ClassifierResult> results;
  std::filesystem::path output_dir;
};

// simulate -> reconstruct -> preprocess -> train -> evaluate -> report.
// Writes metrics_test.csv, metrics_eval.csv, roc_/prc_ curves, map_<id>.pgm
// and manifest.json under config.output_dir. On failure the manifest is
// marked incomplete and a StageError is thrown.
RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Writes metrics_<set>.csv plus ROC/PRC curve CSVs for one evaluation set.
// Curves for the "test" set are roc_<clf>.csv / prc_<clf>.csv; other sets
// insert the set name, e.g. roc_eval_<clf>.csv.
void write_reports(const std::filesystem::path& dir, const std::vector<std::string>& names,
                   const std::vector<ScoreTable>& tables, std::string_view set_name);

}  // namespace pam::harness
