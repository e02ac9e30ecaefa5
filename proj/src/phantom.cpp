#include "pam/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pam/error.hpp"
#include "pam/parallel.hpp"

namespace pam::phantom {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void require(bool ok, const char* what) {
  if (!ok) throw InvalidInput(what);
}

constexpr std::uint32_t kPhantomStream = 0xFFFFFFFFu;

}  // namespace

void OpticalProperties::validate() const {
  require(mu_a >= 0.0, "mu_a must be non-negative");
  require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
  require(beta > 0.0, "beta must be positive");
  require(kappa > 0.0, "kappa must be positive");
  require(rho > 0.0, "rho must be positive");
  require(c_v > 0.0, "c_v must be positive");
}

void TissuePhantom::validate() const {
  require(surface_fluence > 0.0, "surface_fluence must be positive");
  require(fluence_decay >= 0.0, "fluence_decay must be non-negative");
  require(speed_of_sound > 0.0, "speed_of_sound must be positive");
  for (const auto& stack : depth_profile) {
    for (std::size_t k = 0; k < stack.size(); ++k) {
      stack[k].props.validate();
      require(stack[k].depth_mm >= 0.0, "absorber depth must be non-negative");
      if (k > 0) require(stack[k].depth_mm > stack[k - 1].depth_mm, "depths must increase");
    }
  }
}

void TransducerModel::validate() const {
  require(center_freq > 0.0, "center_freq must be positive");
  require(fractional_bandwidth > 0.0 && fractional_bandwidth < 2.0,
          "fractional_bandwidth must lie in (0, 2)");
}

double TransducerModel::envelope_sigma() const {
  // A Gaussian envelope of width sigma has a Gaussian spectrum with
  // sigma_f = 1 / (2 pi sigma); its -6 dB (half amplitude) full width is
  // 2 sigma_f sqrt(2 ln 2).
  const double full_width = fractional_bandwidth * center_freq;
  const double sigma_f = full_width / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  return 1.0 / (2.0 * std::numbers::pi * sigma_f);
}

void AcquisitionConfig::validate() const {
  require(sample_rate > 0.0, "sample_rate must be positive");
  require(n_samples >= 2, "n_samples must be at least 2");
  require(rows >= 1 && cols >= 1, "rows and cols must be positive");
  require(row_step > 0.0 && col_step > 0.0, "scan steps must be positive");
  require(noise_sigma >= 0.0, "noise_sigma must be non-negative");
}

void SimulationLog::append(const SimulationLog& other) {
  lines_.insert(lines_.end(), other.lines_.begin(), other.lines_.end());
}

std::string SimulationLog::str() const {
  std::string out;
  for (const auto& line : lines_) {
    out += line;
    out += '\n';
  }
  return out;
}

double grueneisen(const OpticalProperties& props) {
  require(props.kappa > 0.0, "kappa must be positive");
  require(props.rho > 0.0, "rho must be positive");
  require(props.c_v > 0.0, "c_v must be positive");
  return props.beta / (props.kappa * props.rho * props.c_v);
}

double initial_pressure(const OpticalProperties& props, double fluence) {
  require(fluence >= 0.0, "fluence must be non-negative");
  return grueneisen(props) * props.eta * props.mu_a * fluence;
}

double transducer_impulse(double t, const TransducerModel& model) {
  const double sigma = model.envelope_sigma();
  return std::cos(2.0 * std::numbers::pi * model.center_freq * t) *
         std::exp(-(t * t) / (2.0 * sigma * sigma));
}

std::uint64_t noise_seed(std::uint64_t rng_seed, std::uint32_t sample_id, std::uint32_t row,
                         std::uint32_t col) {
  std::uint64_t h = splitmix64(rng_seed);
  h = splitmix64(h ^ sample_id);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(row) << 32 | col));
  return h;
}

AScan simulate_ascan(const TissuePhantom& phantom, std::size_t lateral_index,
                     const TransducerModel& model, const AcquisitionConfig& config,
                     std::uint32_t sample_id, SimulationLog* log) {
  model.validate();
  config.validate();
  const auto row = static_cast<std::uint32_t>(lateral_index / config.cols);
  const auto col = static_cast<std::uint32_t>(lateral_index % config.cols);
  std::vector<double> samples(config.n_samples, 0.0);
  const double dt = 1.0 / config.sample_rate;
  const double record_end = static_cast<double>(config.n_samples - 1) * dt;
  const double support = 10.0 * model.envelope_sigma();

  if (lateral_index < phantom.depth_profile.size()) {
    for (const auto& layer : phantom.depth_profile[lateral_index]) {
      // speed_of_sound is in mm/us; one-way flight from absorber to detector.
      const double arrival = layer.depth_mm / phantom.speed_of_sound * 1e-6;
      if (arrival > record_end) {
        if (log) {
          std::ostringstream msg;
          msg << "sample " << sample_id << " (" << row << "," << col << "): layer at "
              << layer.depth_mm << " mm arrives at " << arrival * 1e6
              << " us, beyond the record; dropped";
          log->note(msg.str());
        }
        continue;
      }
      const double fluence =
          phantom.surface_fluence * std::exp(-phantom.fluence_decay * layer.depth_mm);
      const double amplitude = initial_pressure(layer.props, fluence);
      if (amplitude == 0.0) continue;
      const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil((arrival - support) / dt)));
      const auto last = std::min(config.n_samples - 1,
                                 static_cast<std::size_t>(std::floor((arrival + support) / dt)));
      for (std::size_t n = first; n <= last; ++n)
        samples[n] += amplitude * transducer_impulse(static_cast<double>(n) * dt - arrival, model);
    }
  }

  if (config.noise_sigma > 0.0) {
    std::mt19937_64 rng(noise_seed(config.rng_seed, sample_id, row, col));
    std::normal_distribution<double> noise(0.0, config.noise_sigma);
    for (auto& v : samples) v += noise(rng);
  }
  return AScan(std::move(samples), config.sample_rate);
}

void PopulationSpec::validate() const {
  if (benign_samples < 1 || malignant_samples < 1)
    throw ConfigError("population needs at least one in-distribution sample per class");
  if (benign_samples + ood_benign_samples < 2 || malignant_samples + ood_malignant_samples < 2)
    throw ConfigError("population needs at least two virtual samples per class");
  if (ood_benign_samples < 0 || ood_malignant_samples < 0)
    throw ConfigError("OOD sample counts must be non-negative");
  for (const auto* p : {&benign, &malignant}) {
    if (!(p->mu_a_min >= 0.0 && p->mu_a_max >= p->mu_a_min))
      throw ConfigError("class mu_a range must satisfy 0 <= min <= max");
    if (p->layers_min < 0 || p->layers_max < p->layers_min)
      throw ConfigError("class layer range invalid");
    if (!(p->depth_min_mm >= 0.0 && p->depth_max_mm > p->depth_min_mm))
      throw ConfigError("class depth range invalid");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
  if (!(surface_fluence > 0.0 && fluence_decay >= 0.0 && speed_of_sound > 0.0))
    throw ConfigError("fluence and sound-speed parameters out of range");
  if (!(sample_gain_spread >= 0.0 && sample_gain_spread < 1.0))
    throw ConfigError("sample_gain_spread must lie in [0, 1)");
  if (!(ood_noise_scale >= 0.0 && ood_gain > 0.0)) throw ConfigError("OOD shift out of range");
}

std::vector<VirtualSample> PopulationSpec::samples() const {
  // Ids are assigned in a fixed order: ID benign, ID malignant, OOD benign, OOD malignant.
  std::vector<VirtualSample> out;
  std::uint32_t next = 0;
  auto push = [&](int count, TissueClass label, bool ood) {
    for (int k = 0; k < count; ++k) out.push_back({next++, label, ood});
  };
  push(benign_samples, TissueClass::benign, false);
  push(malignant_samples, TissueClass::malignant, false);
  push(ood_benign_samples, TissueClass::benign, true);
  push(ood_malignant_samples, TissueClass::malignant, true);
  return out;
}

TissuePhantom make_phantom(const PopulationSpec& spec, const VirtualSample& sample,
                           const AcquisitionConfig& config) {
  std::mt19937_64 rng(noise_seed(config.rng_seed, sample.id, kPhantomStream, kPhantomStream));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& profile = sample.label == TissueClass::benign ? spec.benign : spec.malignant;

  double gain = 1.0 + spec.sample_gain_spread * (2.0 * unit(rng) - 1.0);
  if (sample.ood) gain *= spec.ood_gain;

  TissuePhantom phantom;
  phantom.surface_fluence = spec.surface_fluence;
  phantom.fluence_decay = spec.fluence_decay;
  phantom.speed_of_sound = spec.speed_of_sound;
  phantom.class_label = sample.label;
  phantom.depth_profile.resize(config.rows * config.cols);
  for (auto& stack : phantom.depth_profile) {
    const int layers =
        profile.layers_min +
        static_cast<int>(unit(rng) * (profile.layers_max - profile.layers_min + 1));
    std::vector<double> depths;
    for (int k = 0; k < std::min(layers, profile.layers_max); ++k)
      depths.push_back(profile.depth_min_mm + unit(rng) * (profile.depth_max_mm - profile.depth_min_mm));
    std::sort(depths.begin(), depths.end());
    depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
    for (double z : depths) {
      OpticalProperties props = spec.base_props;
      props.eta = spec.eta;
      props.mu_a = gain * (profile.mu_a_min + unit(rng) * (profile.mu_a_max - profile.mu_a_min));
      stack.push_back({z, props});
    }
  }
  phantom.validate();
  return phantom;
}

SimulatedPopulation simulate_dataset(const PopulationSpec& spec, const AcquisitionConfig& config,
                                     const TransducerModel& model, unsigned threads) {
  spec.validate();
  config.validate();
  model.validate();

  SimulatedPopulation out;
  out.samples = spec.samples();
  const std::size_t per_sample = config.rows * config.cols;
  out.signals = LabeledDataset(config.n_samples, config.sample_rate);
  out.signals.reserve(per_sample * out.samples.size());

  for (const auto& sample : out.samples) {
    const auto phantom = make_phantom(spec, sample, config);
    AcquisitionConfig acq = config;
    if (sample.ood) acq.noise_sigma *= spec.ood_noise_scale;

    std::vector<std::vector<double>> rows(per_sample);
    std::vector<SimulationLog> logs(per_sample);
    parallel_for(per_sample, threads, [&](std::size_t k) {
      const auto scan = simulate_ascan(phantom, k, model, acq, sample.id, &logs[k]);
      rows[k].assign(scan.samples().begin(), scan.samples().end());
    });
    for (std::size_t k = 0; k < per_sample; ++k) {
      out.signals.add(rows[k], static_cast<int>(sample.label),
                      {sample.id, static_cast<std::uint32_t>(k / config.cols),
                       static_cast<std::uint32_t>(k % config.cols)});
      out.log.append(logs[k]);
    }
  }
  return out;
}

ScanGrid sample_grid(const LabeledDataset& signals, std::uint32_t sample_id,
                     const AcquisitionConfig& config) {
  if (!(signals.sample_rate() > 0.0)) throw StructuralError("dataset does not hold raw signals");
  std::vector<std::size_t> slot(config.rows * config.cols, signals.size());
  for (std::size_t k = 0; k < signals.size(); ++k) {
    const auto& src = signals.source(k);
    if (src.sample_id != sample_id) continue;
    if (src.row >= config.rows || src.col >= config.cols)
      throw StructuralError("record position outside the configured raster");
    slot[src.row * config.cols + src.col] = k;
  }
  std::vector<AScan> scans;
  scans.reserve(slot.size());
  for (std::size_t k = 0; k < slot.size(); ++k) {
    if (slot[k] == signals.size())
      throw StructuralError("sample " + std::to_string(sample_id) + " is missing raster position " +
                            std::to_string(k));
    const auto row = signals.row(slot[k]);
    scans.emplace_back(std::vector<double>(row.begin(), row.end()), signals.sample_rate());
  }
  return ScanGrid(config.rows, config.cols, config.row_step, config.col_step, std::move(scans));
}

}  // namespace pam::phantom
