#pragma once

// Brute-force reference computations used only by the tests. None of these
// call into the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;

inline std::vector<Complex> dft(const std::vector<Complex>& x, int sign = -1) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double phase = sign * 2.0 * std::numbers::pi * static_cast<double>((k * t) % n) /
                           static_cast<double>(n);
      acc += x[t] * Complex(std::cos(phase), std::sin(phase));
    }
    out[k] = acc;
  }
  return out;
}

// Analytic signal through explicit O(N^2) DFT sums with the one-sided
// spectral weights (1 at DC and even-N Nyquist, 2 for positive, 0 negative).
inline std::vector<Complex> analytic(const std::vector<double>& s) {
  const std::size_t n = s.size();
  std::vector<Complex> x(s.begin(), s.end());
  auto spec = dft(x, -1);
  for (std::size_t k = 0; k < n; ++k) {
    double w;
    if (k == 0 || (n % 2 == 0 && k == n / 2)) w = 1.0;
    else if (k < (n + 1) / 2) w = 2.0;
    else w = 0.0;
    spec[k] *= w;
  }
  auto out = dft(spec, +1);
  for (auto& v : out) v /= static_cast<double>(n);
  return out;
}

// |DFT(analytic(standardized s))| by direct summation.
inline std::vector<double> preprocess(const std::vector<double>& s) {
  const double n = static_cast<double>(s.size());
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> z;
  for (double v : s) z.push_back((v - mean) / sd);
  const auto spec = dft(analytic(z), -1);
  std::vector<double> out;
  for (const auto& c : spec) out.push_back(std::abs(c));
  return out;
}

// (concordant + 0.5 ties) / (P N) over all positive/negative pairs.
inline double auroc_pairs(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  double concordant = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) concordant += 1.0;
      else if (scores[i] == scores[j]) concordant += 0.5;
    }
  }
  return concordant / pairs;
}

// Enumerates every distinct threshold, recounting precision and recall from
// scratch at each one, and sums (R_k - R_{k-1}) P_k.
inline double ap_enumerate(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
  double positives = 0.0;
  for (auto l : labels) positives += l;
  double prev_recall = 0.0;
  double ap = 0.0;
  for (double t : thresholds) {
    double tp = 0.0, predicted = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) {
        predicted += 1.0;
        tp += labels[i];
      }
    }
    const double recall = tp / positives;
    ap += (recall - prev_recall) * (tp / predicted);
    prev_recall = recall;
  }
  return ap;
}

struct Counts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Counts count(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels,
                    double threshold) {
  Counts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool p = scores[i] >= threshold;
    if (p && labels[i]) ++c.tp;
    if (p && !labels[i]) ++c.fp;
    if (!p && !labels[i]) ++c.tn;
    if (!p && labels[i]) ++c.fn;
  }
  return c;
}

// Random scores drawn from a small grid so ties are common.
inline void random_scored(std::mt19937_64& rng, std::size_t n, std::vector<double>& scores,
                          std::vector<std::uint8_t>& labels) {
  std::uniform_int_distribution<int> level(0, 9);
  std::bernoulli_distribution coin(0.5);
  scores.assign(n, 0.0);
  labels.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = coin(rng);
    // Positives lean higher so curves are non-trivial.
    scores[i] = (level(rng) + (labels[i] ? 2 : 0)) / 11.0;
  }
  labels[0] = 1;
  labels[n - 1] = 0;
}

}  // namespace oracle
