#include "pam/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pam/error.hpp"

namespace pam {

void LabeledDataset::add(std::span<const double> values, int label, SourceId source) {
  if (values.size() != dim_)
    throw InvalidInput("row has " + std::to_string(values.size()) + " values, dataset expects " +
                       std::to_string(dim_));
  if (label != 0 && label != 1) throw InvalidInput("label must be 0 or 1");
  if (std::any_of(values.begin(), values.end(), [](double v) { return std::isnan(v); }))
    throw InvalidInput("row contains NaN");
  values_.insert(values_.end(), values.begin(), values.end());
  labels_.push_back(static_cast<std::uint8_t>(label));
  sources_.push_back(source);
}

void LabeledDataset::reserve(std::size_t rows) {
  values_.reserve(rows * dim_);
  labels_.reserve(rows);
  sources_.reserve(rows);
}

std::size_t LabeledDataset::count_positive() const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
}

bool LabeledDataset::has_both_classes() const {
  const auto pos = count_positive();
  return pos > 0 && pos < size();
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out(dim_, sample_rate_);
  out.reserve(indices.size());
  for (auto k : indices) {
    if (k >= size()) throw InvalidInput("subset index out of range");
    out.values_.insert(out.values_.end(), values_.begin() + k * dim_,
                       values_.begin() + (k + 1) * dim_);
    out.labels_.push_back(labels_[k]);
    out.sources_.push_back(sources_[k]);
  }
  return out;
}

}  // namespace pam
