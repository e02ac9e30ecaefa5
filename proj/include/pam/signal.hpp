#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pam {

inline constexpr double kDefaultSampleRate = 80.0e6;  // Hz
inline constexpr std::size_t kDefaultSignalLength = 1000;

// One time-domain photoacoustic record. Construction validates length >= 2,
// finite samples and a positive sample rate.
class AScan {
 public:
  AScan(std::vector<double> samples, double sample_rate);

  std::span<const double> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double sample_rate() const { return sample_rate_; }

 private:
  std::vector<double> samples_;
  double sample_rate_;
};

// H x W raster of A-scans stored row-major. Row/column indices are zero-based
// in this API; row 0 is the first raster line.
class ScanGrid {
 public:
  ScanGrid(std::size_t rows, std::size_t cols, double row_step_um, double col_step_um,
           std::vector<AScan> signals);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double row_step() const { return row_step_; }
  double col_step() const { return col_step_; }
  const AScan& at(std::size_t row, std::size_t col) const { return signals_[row * cols_ + col]; }
  std::span<const AScan> signals() const { return signals_; }

  ScanGrid transposed() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  double row_step_;
  double col_step_;
  std::vector<AScan> signals_;
};

struct MapImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> pixels;  // row-major, all >= 0

  double at(std::size_t row, std::size_t col) const { return pixels[row * cols + col]; }
  MapImage transposed() const;
};

struct IntImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> pixels;
};

namespace signal {

using Complex = std::complex<double>;

// Discrete analytic signal via the frequency-domain construction: DC (and
// Nyquist for even N) kept, positive bins doubled, negative bins zeroed.
// Real part reproduces the input; imaginary part is the discrete Hilbert
// transform. Throws InvalidInput naming the first non-finite index.
std::vector<Complex> analytic_signal(std::span<const double> samples);
std::vector<Complex> analytic_signal(const AScan& s);

std::vector<double> envelope(std::span<const double> samples);
std::vector<double> envelope(const AScan& s);

// Maximum envelope amplitude over the whole record.
double max_envelope(const AScan& s);

// Pixel (i, j) is the maximum envelope amplitude of the A-scan at (i, j).
MapImage map_project(const ScanGrid& grid, unsigned threads = 1);

// Linear min-max rescale onto [0, 2^bit_depth - 1], rounding half up.
// A constant image maps to zeros.
IntImage normalize_image(const MapImage& img, int bit_depth);

// Binary PGM (P5). 16-bit samples are written big-endian as the format requires.
void write_pgm(std::ostream& out, const IntImage& img);
void write_pgm(const std::string& path, const IntImage& img);

}  // namespace signal
}  // namespace pam
