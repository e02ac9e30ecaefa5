#include "pam/preprocess.hpp"

#include <cmath>
#include <optional>

#include "pam/error.hpp"
#include "pam/fft.hpp"
#include "pam/parallel.hpp"

namespace pam::preprocess {

std::vector<double> features(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw InvalidInput("preprocess needs at least 2 samples");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) throw DegenerateSignal("signal has zero variance");

  std::vector<double> z(n);
  for (std::size_t k = 0; k < n; ++k) z[k] = (samples[k] - mean) / sd;
  const auto analytic = signal::analytic_signal(z);
  const auto spectrum = fft::forward(analytic);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = std::abs(spectrum[k]);
  return out;
}

FeatureVector preprocess(const AScan& s, SourceId source) {
  return {features(s.samples()), source};
}

BatchResult preprocess_dataset(const LabeledDataset& signals, unsigned threads) {
  std::vector<std::optional<std::vector<double>>> rows(signals.size());
  parallel_for(signals.size(), threads, [&](std::size_t k) {
    try {
      rows[k] = features(signals.row(k));
    } catch (const DegenerateSignal&) {
      rows[k].reset();
    }
  });
  BatchResult result{LabeledDataset(signals.dim(), 0.0), {}};
  result.features.reserve(signals.size());
  for (std::size_t k = 0; k < signals.size(); ++k) {
    if (rows[k])
      result.features.add(*rows[k], signals.label(k), signals.source(k));
    else
      result.dropped.push_back(signals.source(k));
  }
  return result;
}

}  // namespace pam::preprocess
