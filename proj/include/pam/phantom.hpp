#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pam/dataset.hpp"
#include "pam/signal.hpp"

namespace pam::phantom {

// Optical and thermodynamic properties of one absorber.
// mu_a [1/mm], eta [-], beta [1/K], kappa [1/Pa], rho [kg/m^3], c_v [J/(kg K)].
struct OpticalProperties {
  double mu_a = 0.0;
  double eta = 1.0;
  double beta = 2.07e-4;
  double kappa = 4.48e-10;
  double rho = 1000.0;
  double c_v = 4184.0;

  void validate() const;
};

struct Absorber {
  double depth_mm = 0.0;
  OpticalProperties props;
};

enum class TissueClass : std::uint8_t { benign = 0, malignant = 1 };

struct TissuePhantom {
  // One absorber stack per lateral position, depths strictly increasing.
  std::vector<std::vector<Absorber>> depth_profile;
  double surface_fluence = 0.02;  // J/cm^2
  double fluence_decay = 0.5;     // 1/mm
  TissueClass class_label = TissueClass::benign;
  double speed_of_sound = 1.54;  // mm/us

  void validate() const;
};

struct TransducerModel {
  double center_freq = 10.0e6;       // Hz
  double fractional_bandwidth = 0.6;  // -6 dB width / center frequency
  double focal_length = 18.0;        // mm, metadata only

  void validate() const;
  // Standard deviation (s) of the Gaussian time envelope.
  double envelope_sigma() const;
};

struct AcquisitionConfig {
  double sample_rate = kDefaultSampleRate;
  std::size_t n_samples = kDefaultSignalLength;
  std::size_t rows = 100;
  std::size_t cols = 250;
  double row_step = 100.0;  // um
  double col_step = 40.0;   // um
  double noise_sigma = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Plain-text record of non-fatal simulation events (truncated layers).
class SimulationLog {
 public:
  void note(std::string line) { lines_.push_back(std::move(line)); }
  const std::vector<std::string>& lines() const { return lines_; }
  void append(const SimulationLog& other);
  std::string str() const;

 private:
  std::vector<std::string> lines_;
};

// Gamma = beta / (kappa rho c_v).
double grueneisen(const OpticalProperties& props);

// p0 = Gamma eta mu_a F.
double initial_pressure(const OpticalProperties& props, double fluence);

// cos(2 pi f_c t) exp(-t^2 / (2 sigma^2)), sigma set by the -6 dB bandwidth.
double transducer_impulse(double t, const TransducerModel& model);

// Seed for the noise stream of one A-scan; a pure function of its inputs.
std::uint64_t noise_seed(std::uint64_t rng_seed, std::uint32_t sample_id, std::uint32_t row,
                         std::uint32_t col);

// Noiseless-plus-noise A-scan at one lateral position (row-major index into
// depth_profile). Layers arriving after the record ends are dropped and
// reported in `log` when given.
AScan simulate_ascan(const TissuePhantom& phantom, std::size_t lateral_index,
                     const TransducerModel& model, const AcquisitionConfig& config,
                     std::uint32_t sample_id = 0, SimulationLog* log = nullptr);

// Per-class absorber statistics. mu_a is drawn uniformly in [mu_a_min,
// mu_a_max] and multiplied by a per-sample gain.
struct ClassProfile {
  double mu_a_min = 0.0;
  double mu_a_max = 0.0;
  int layers_min = 1;
  int layers_max = 3;
  double depth_min_mm = 0.5;
  double depth_max_mm = 4.0;
};

struct VirtualSample {
  std::uint32_t id = 0;
  TissueClass label = TissueClass::benign;
  bool ood = false;
};

// Declarative description of a population of virtual tissue samples.
struct PopulationSpec {
  int benign_samples = 4;
  int malignant_samples = 4;
  int ood_benign_samples = 2;
  int ood_malignant_samples = 2;
  ClassProfile benign{5.0, 10.0, 1, 3, 0.5, 2.5};
  ClassProfile malignant{0.4, 1.6, 1, 3, 0.5, 2.5};
  OpticalProperties base_props{};
  double eta = 0.9;
  double surface_fluence = 0.02;
  double fluence_decay = 0.5;
  double speed_of_sound = 1.54;
  // Per-sample multiplicative spread of mu_a: gain ~ U[1 - spread, 1 + spread].
  double sample_gain_spread = 0.15;
  // Distribution shift applied to OOD samples.
  double ood_noise_scale = 1.6;
  double ood_gain = 0.8;

  void validate() const;
  std::vector<VirtualSample> samples() const;
};

struct SimulatedPopulation {
  LabeledDataset signals;               // raw A-scans, in-distribution and OOD
  std::vector<VirtualSample> samples;   // sample id -> class / OOD flag
  SimulationLog log;
};

// Draws a phantom for one virtual sample. Deterministic in (config.rng_seed, sample).
TissuePhantom make_phantom(const PopulationSpec& spec, const VirtualSample& sample,
                           const AcquisitionConfig& config);

SimulatedPopulation simulate_dataset(const PopulationSpec& spec, const AcquisitionConfig& config,
                                     const TransducerModel& model = {}, unsigned threads = 1);

// Reassembles the raster of one sample from a raw-signal dataset.
ScanGrid sample_grid(const LabeledDataset& signals, std::uint32_t sample_id,
                     const AcquisitionConfig& config);

}  // namespace pam::phantom
