#include "pam/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "pam/error.hpp"
#include "pam/fft.hpp"
#include "pam/parallel.hpp"

namespace pam {

AScan::AScan(std::vector<double> samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (samples_.size() < 2) throw InvalidInput("AScan needs at least 2 samples");
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_))
    throw InvalidInput("AScan sample_rate must be positive");
  for (std::size_t n = 0; n < samples_.size(); ++n) {
    if (!std::isfinite(samples_[n]))
      throw InvalidInput("AScan sample " + std::to_string(n) + " is not finite");
  }
}

ScanGrid::ScanGrid(std::size_t rows, std::size_t cols, double row_step_um, double col_step_um,
                   std::vector<AScan> signals)
    : rows_(rows), cols_(cols), row_step_(row_step_um), col_step_(col_step_um),
      signals_(std::move(signals)) {
  if (rows_ == 0 || cols_ == 0) throw StructuralError("ScanGrid must be at least 1x1");
  if (signals_.size() != rows_ * cols_)
    throw StructuralError("ScanGrid expects " + std::to_string(rows_ * cols_) + " signals, got " +
                          std::to_string(signals_.size()));
  const auto& first = signals_.front();
  for (std::size_t k = 1; k < signals_.size(); ++k) {
    if (signals_[k].size() != first.size() || signals_[k].sample_rate() != first.sample_rate())
      throw StructuralError("ScanGrid signal " + std::to_string(k) +
                            " differs in length or sample rate from signal 0");
  }
}

ScanGrid ScanGrid::transposed() const {
  std::vector<AScan> out;
  out.reserve(signals_.size());
  for (std::size_t c = 0; c < cols_; ++c)
    for (std::size_t r = 0; r < rows_; ++r) out.push_back(at(r, c));
  return ScanGrid(cols_, rows_, col_step_, row_step_, std::move(out));
}

MapImage MapImage::transposed() const {
  MapImage t{cols, rows, std::vector<double>(pixels.size())};
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t.pixels[c * rows + r] = at(r, c);
  return t;
}

namespace signal {

std::vector<Complex> analytic_signal(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw InvalidInput("analytic_signal needs at least 2 samples");
  std::vector<Complex> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(samples[k]))
      throw InvalidInput("sample " + std::to_string(k) + " is not finite");
    x[k] = samples[k];
  }
  auto spectrum = fft::forward(x);
  // Bins 1..ceil(N/2)-1 are positive frequencies; for even N, bin N/2 is
  // Nyquist and keeps weight 1 like DC.
  const std::size_t half = n / 2;
  const std::size_t positive_end = (n % 2 == 0) ? half : half + 1;
  for (std::size_t k = 1; k < positive_end; ++k) spectrum[k] *= 2.0;
  for (std::size_t k = half + 1; k < n; ++k) spectrum[k] = 0.0;
  auto result = fft::inverse(spectrum);
  // Restore the exact real part; the round trip only perturbs it by rounding.
  for (std::size_t k = 0; k < n; ++k) result[k].real(samples[k]);
  return result;
}

std::vector<Complex> analytic_signal(const AScan& s) { return analytic_signal(s.samples()); }

std::vector<double> envelope(std::span<const double> samples) {
  const auto a = analytic_signal(samples);
  std::vector<double> env(a.size());
  std::transform(a.begin(), a.end(), env.begin(), [](const Complex& c) { return std::abs(c); });
  return env;
}

std::vector<double> envelope(const AScan& s) { return envelope(s.samples()); }

double max_envelope(const AScan& s) {
  const auto env = envelope(s);
  return *std::max_element(env.begin(), env.end());
}

MapImage map_project(const ScanGrid& grid, unsigned threads) {
  MapImage img{grid.rows(), grid.cols(), std::vector<double>(grid.rows() * grid.cols())};
  const auto signals = grid.signals();
  parallel_for(signals.size(), threads,
               [&](std::size_t k) { img.pixels[k] = max_envelope(signals[k]); });
  return img;
}

IntImage normalize_image(const MapImage& img, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw InvalidInput("bit_depth must be 8 or 16");
  IntImage out{img.rows, img.cols, bit_depth, std::vector<std::uint16_t>(img.pixels.size(), 0)};
  if (img.pixels.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(img.pixels.begin(), img.pixels.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) return out;
  const double top = static_cast<double>((1u << bit_depth) - 1u);
  for (std::size_t k = 0; k < img.pixels.size(); ++k) {
    const double v = std::floor((img.pixels[k] - lo) / range * top + 0.5);
    out.pixels[k] = static_cast<std::uint16_t>(std::clamp(v, 0.0, top));
  }
  return out;
}

void write_pgm(std::ostream& out, const IntImage& img) {
  const unsigned maxval = (1u << img.bit_depth) - 1u;
  out << "P5\n" << img.cols << ' ' << img.rows << '\n' << maxval << '\n';
  if (img.bit_depth == 8) {
    for (auto p : img.pixels) out.put(static_cast<char>(p & 0xFF));
  } else {
    for (auto p : img.pixels) {
      out.put(static_cast<char>((p >> 8) & 0xFF));
      out.put(static_cast<char>(p & 0xFF));
    }
  }
}

void write_pgm(const std::string& path, const IntImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_pgm(out, img);
}

}  // namespace signal
}  // namespace pam
