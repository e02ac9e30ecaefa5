#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pam/dataset.hpp"
#include "pam/signal.hpp"

namespace pam::preprocess {

struct FeatureVector {
  std::vector<double> values;  // |DFT(analytic(standardized s))|, same length as s
  SourceId source;
};

// Standardize with population statistics, take the analytic signal, apply an
// unnormalized forward DFT and return bin magnitudes. Throws DegenerateSignal
// when the population standard deviation is zero.
std::vector<double> features(std::span<const double> samples);
FeatureVector preprocess(const AScan& s, SourceId source = {});

struct BatchResult {
  LabeledDataset features;
  std::vector<SourceId> dropped;  // zero-variance signals skipped
};

// Applies the pipeline to every row of a raw-signal dataset. Output order
// matches input order with dropped rows removed, whatever the thread count.
BatchResult preprocess_dataset(const LabeledDataset& signals, unsigned threads = 1);

}  // namespace pam::preprocess
