#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pam {

// Where a row came from: virtual sample plus zero-based raster position.
struct SourceId {
  std::uint32_t sample_id = 0;
  std::uint32_t row = 0;
  std::uint32_t col = 0;

  friend bool operator==(const SourceId&, const SourceId&) = default;
};

// Row-major M x dim matrix of real values with binary labels (1 = cancer /
// positive, 0 = normal / negative) and provenance. Holds either raw A-scans
// (sample_rate > 0) or extracted feature vectors (sample_rate == 0).
class LabeledDataset {
 public:
  LabeledDataset() = default;
  LabeledDataset(std::size_t dim, double sample_rate) : dim_(dim), sample_rate_(sample_rate) {}

  std::size_t dim() const { return dim_; }
  double sample_rate() const { return sample_rate_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  std::span<const double> row(std::size_t k) const {
    return {values_.data() + k * dim_, dim_};
  }
  std::span<double> row(std::size_t k) { return {values_.data() + k * dim_, dim_}; }
  int label(std::size_t k) const { return labels_[k]; }
  const SourceId& source(std::size_t k) const { return sources_[k]; }

  std::span<const double> values() const { return values_; }
  std::span<const std::uint8_t> labels() const { return labels_; }
  std::span<const SourceId> sources() const { return sources_; }

  // Throws InvalidInput on dimension mismatch, non-binary label or NaN value.
  void add(std::span<const double> values, int label, SourceId source);
  void reserve(std::size_t rows);

  std::size_t count_positive() const;
  bool has_both_classes() const;

  LabeledDataset subset(std::span<const std::size_t> indices) const;

 private:
  std::size_t dim_ = 0;
  double sample_rate_ = 0.0;
  std::vector<double> values_;
  std::vector<std::uint8_t> labels_;
  std::vector<SourceId> sources_;
};

}  // namespace pam
