#include "pam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "pam/error.hpp"

namespace pam::metrics {
namespace {

void check_inputs(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw InvalidInput("scores and labels differ in length");
  if (scores.empty()) throw InvalidInput("no scores to evaluate");
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (std::isnan(scores[k])) throw InvalidInput("score " + std::to_string(k) + " is NaN");
    if (labels[k] > 1) throw InvalidInput("label " + std::to_string(k) + " is not binary");
  }
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? kNaN : static_cast<double>(num) / static_cast<double>(den);
}

// Cumulative (tp, fp) after admitting every score >= each distinct threshold,
// thresholds in decreasing order.
struct SweepStep {
  double threshold;
  std::uint64_t tp;
  std::uint64_t fp;
};

std::vector<SweepStep> sweep(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<SweepStep> steps;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto idx = order[k];
    if (labels[idx]) ++tp; else ++fp;
    const bool group_end = k + 1 == order.size() || scores[order[k + 1]] != scores[idx];
    if (group_end) steps.push_back({scores[idx], tp, fp});
  }
  return steps;
}

}  // namespace

ConfusionCounts confusion(std::span<const double> scores, std::span<const std::uint8_t> labels,
                          double threshold) {
  check_inputs(scores, labels);
  ConfusionCounts c;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const bool predicted = scores[k] >= threshold;
    if (labels[k]) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

PointMetrics point_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw InvalidInput("confusion counts are empty");
  PointMetrics m;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.sensitivity = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  m.ppv = ratio(c.tp, c.tp + c.fp);
  m.npv = ratio(c.tn, c.tn + c.fn);
  if (c.tp == 0) {
    m.f1 = (c.fp > 0 || c.fn > 0) ? 0.0 : kNaN;
  } else {
    m.f1 = 2.0 * m.ppv * m.sensitivity / (m.ppv + m.sensitivity);
  }
  return m;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_inputs(scores, labels);
  const auto positives = static_cast<std::uint64_t>(std::count(labels.begin(), labels.end(), 1));
  const auto negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0)
    throw UndefinedMetric("ROC needs both classes present");
  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (const auto& s : sweep(scores, labels))
    curve.points.push_back({s.threshold, ratio(s.fp, negatives), ratio(s.tp, positives)});
  return curve;
}

double auroc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    area += (b.x - a.x) * (a.y + b.y) * 0.5;
  }
  return area;
}

PrCurve pr_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_inputs(scores, labels);
  const auto positives = static_cast<std::uint64_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0) throw UndefinedMetric("precision-recall needs at least one positive");
  PrCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  for (const auto& s : sweep(scores, labels))
    curve.points.push_back({s.threshold, ratio(s.tp, positives), ratio(s.tp, s.tp + s.fp)});
  return curve;
}

double average_precision(const PrCurve& curve) {
  double ap = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k)
    ap += (curve.points[k].x - curve.points[k - 1].x) * curve.points[k].y;
  return ap;
}

double brier(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_inputs(scores, labels);
  double sum = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (!(scores[k] >= 0.0 && scores[k] <= 1.0))
      throw InvalidInput("score " + std::to_string(k) + " outside [0, 1]");
    const double d = scores[k] - labels[k];
    sum += d * d;
  }
  return sum / static_cast<double>(scores.size());
}

MetricReport report(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  MetricReport r;
  r.counts = confusion(scores, labels, kThreshold);
  const auto pm = point_metrics(r.counts);
  r.accuracy = pm.accuracy;
  r.sensitivity = pm.sensitivity;
  r.specificity = pm.specificity;
  r.ppv = pm.ppv;
  r.npv = pm.npv;
  r.f1 = pm.f1;
  r.auroc = auroc(roc_curve(scores, labels));
  r.ap = average_precision(pr_curve(scores, labels));
  r.brier = brier(scores, labels);
  return r;
}

std::string format_value(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_report_csv(std::ostream& out, std::vector<NamedReport> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const NamedReport& a, const NamedReport& b) {
    const double x = a.report.accuracy;
    const double y = b.report.accuracy;
    if (std::isnan(x) != std::isnan(y)) return std::isnan(y);
    if (!std::isnan(x) && x != y) return x > y;
    return a.classifier < b.classifier;
  });
  out << kReportHeader << '\n';
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << row.classifier;
    for (double v : {r.accuracy, r.auroc, r.ap, r.sensitivity, r.specificity, r.ppv, r.npv, r.f1,
                     r.brier})
      out << ',' << format_value(v);
    out << '\n';
  }
}

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> points) {
  out << "threshold,x,y\n";
  char buf[128];
  for (const auto& p : points) {
    if (std::isinf(p.threshold)) {
      std::snprintf(buf, sizeof buf, "inf,%.17g,%.17g\n", p.x, p.y);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.threshold, p.x, p.y);
    }
    out << buf;
  }
}

}  // namespace pam::metrics
