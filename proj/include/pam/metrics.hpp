#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace pam::metrics {

inline constexpr double kThreshold = 0.5;
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
};

struct PointMetrics {
  double accuracy = kNaN;
  double sensitivity = kNaN;
  double specificity = kNaN;
  double ppv = kNaN;
  double npv = kNaN;
  double f1 = kNaN;
};

struct CurvePoint {
  double threshold;  // +inf for the initial point
  double x;
  double y;
};

// Points run from threshold +inf (0, 0) down through each distinct score to
// (1, 1). x = FPR, y = TPR.
struct RocCurve {
  std::vector<CurvePoint> points;
};

// x = recall, y = precision. First point is (0, 1) at threshold +inf.
struct PrCurve {
  std::vector<CurvePoint> points;
};

struct MetricReport {
  double accuracy = kNaN;
  double auroc = kNaN;
  double ap = kNaN;
  double sensitivity = kNaN;
  double specificity = kNaN;
  double ppv = kNaN;
  double npv = kNaN;
  double f1 = kNaN;
  double brier = kNaN;
  ConfusionCounts counts;
};

// Positive prediction iff score >= threshold.
ConfusionCounts confusion(std::span<const double> scores, std::span<const std::uint8_t> labels,
                          double threshold = kThreshold);

// Ratios with 0/0 reported as NaN. F1 is 0 when tp == 0 but errors exist.
PointMetrics point_metrics(const ConfusionCounts& c);

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);
double auroc(const RocCurve& curve);

PrCurve pr_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);
// Step sum of (R_k - R_{k-1}) P_k.
double average_precision(const PrCurve& curve);

double brier(std::span<const double> scores, std::span<const std::uint8_t> labels);

MetricReport report(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Fixed six-decimal rendering; NaN renders as "NaN".
std::string format_value(double v);

struct NamedReport {
  std::string classifier;
  MetricReport report;
};

inline constexpr const char* kReportHeader =
    "classifier,accuracy,auroc,ap,sensitivity,specificity,ppv,npv,f1,brier";

// Sorts by decreasing accuracy, ties by name, then writes one CSV row each.
void write_report_csv(std::ostream& out, std::vector<NamedReport> rows);
void write_curve_csv(std::ostream& out, std::span<const CurvePoint> points);

}  // namespace pam::metrics
