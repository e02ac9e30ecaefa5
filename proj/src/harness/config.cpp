#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string>

#include "pam/harness.hpp"

namespace pam::harness {
namespace {

using nlohmann::json;

// Rejects keys outside `allowed` so typos in config files fail loudly.
void check_keys(const json& obj, std::string_view where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
void take(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

json class_to_json(const phantom::ClassProfile& c) {
  return {{"mu_a_min", c.mu_a_min},     {"mu_a_max", c.mu_a_max},
          {"layers_min", c.layers_min}, {"layers_max", c.layers_max},
          {"depth_min_mm", c.depth_min_mm}, {"depth_max_mm", c.depth_max_mm}};
}

phantom::ClassProfile class_from_json(const json& j, phantom::ClassProfile c) {
  check_keys(j, "class profile",
             {"mu_a_min", "mu_a_max", "layers_min", "layers_max", "depth_min_mm", "depth_max_mm"});
  take(j, "mu_a_min", c.mu_a_min);
  take(j, "mu_a_max", c.mu_a_max);
  take(j, "layers_min", c.layers_min);
  take(j, "layers_max", c.layers_max);
  take(j, "depth_min_mm", c.depth_min_mm);
  take(j, "depth_max_mm", c.depth_max_mm);
  return c;
}

}  // namespace

std::vector<std::uint32_t> ExperimentConfig::ood_sample_ids() const {
  std::vector<std::uint32_t> out;
  for (const auto& s : population.samples())
    if (s.ood) out.push_back(s.id);
  return out;
}

std::vector<std::uint32_t> ExperimentConfig::in_distribution_sample_ids() const {
  std::vector<std::uint32_t> out;
  for (const auto& s : population.samples())
    if (!s.ood) out.push_back(s.id);
  return out;
}

void ExperimentConfig::validate() const {
  population.validate();
  try {
    acquisition.validate();
    transducer.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0))
    throw ConfigError("split_fraction must lie in (0, 1)");
  if (image_bit_depth != 8 && image_bit_depth != 16)
    throw ConfigError("image_bit_depth must be 8 or 16");
  if (classifiers.empty()) throw ConfigError("no classifiers configured");
  const int ood_total = population.ood_benign_samples + population.ood_malignant_samples;
  if (ood_total > 0 &&
      (population.ood_benign_samples == 0 || population.ood_malignant_samples == 0))
    throw ConfigError("an OOD set needs samples of both classes");
  const auto ood = ood_sample_ids();
  const auto id = in_distribution_sample_ids();
  for (auto s : ood)
    if (std::find(id.begin(), id.end(), s) != id.end())
      throw ConfigError("sample " + std::to_string(s) + " is both in-distribution and OOD");
  std::set<std::string> names;
  for (const auto& c : classifiers)
    if (!names.insert(std::string(clf::kind_name(c.kind))).second)
      throw ConfigError("classifier '" + std::string(clf::kind_name(c.kind)) + "' listed twice");
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.acquisition.rows = 25;
  c.acquisition.cols = 25;
  c.acquisition.noise_sigma = 4e-4;
  c.population.ood_benign_samples = 2;
  c.population.ood_malignant_samples = 1;
  for (auto kind : clf::kAllKinds) c.classifiers.push_back({kind, {}});
  return c;
}

json to_json(const ExperimentConfig& c) {
  const auto& p = c.population;
  const auto& a = c.acquisition;
  const auto& t = c.transducer;
  json classifiers = json::array();
  for (const auto& e : c.classifiers)
    classifiers.push_back({{"kind", clf::kind_name(e.kind)}, {"params", clf::to_json(e.config)}});
  return {
      {"schema_version", kConfigSchemaVersion},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"split_fraction", c.split_fraction},
      {"image_bit_depth", c.image_bit_depth},
      {"write_datasets", c.write_datasets},
      {"acquisition",
       {{"sample_rate", a.sample_rate},
        {"n_samples", a.n_samples},
        {"rows", a.rows},
        {"cols", a.cols},
        {"row_step_um", a.row_step},
        {"col_step_um", a.col_step},
        {"noise_sigma", a.noise_sigma}}},
      {"transducer",
       {{"center_freq_hz", t.center_freq},
        {"fractional_bandwidth", t.fractional_bandwidth},
        {"focal_length_mm", t.focal_length}}},
      {"population",
       {{"benign_samples", p.benign_samples},
        {"malignant_samples", p.malignant_samples},
        {"ood_benign_samples", p.ood_benign_samples},
        {"ood_malignant_samples", p.ood_malignant_samples},
        {"benign", class_to_json(p.benign)},
        {"malignant", class_to_json(p.malignant)},
        {"eta", p.eta},
        {"beta", p.base_props.beta},
        {"kappa", p.base_props.kappa},
        {"rho", p.base_props.rho},
        {"c_v", p.base_props.c_v},
        {"surface_fluence", p.surface_fluence},
        {"fluence_decay", p.fluence_decay},
        {"speed_of_sound", p.speed_of_sound},
        {"sample_gain_spread", p.sample_gain_spread},
        {"ood_noise_scale", p.ood_noise_scale},
        {"ood_gain", p.ood_gain}}},
      {"classifiers", classifiers},
  };
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, "config",
             {"schema_version", "seed", "output_dir", "split_fraction", "image_bit_depth",
              "write_datasets", "acquisition", "transducer", "population", "classifiers"});
  int version = kConfigSchemaVersion;
  take(j, "schema_version", version);
  if (version != kConfigSchemaVersion)
    throw ConfigError("unsupported config schema_version " + std::to_string(version));

  ExperimentConfig c = default_config();
  take(j, "seed", c.seed);
  take(j, "output_dir", c.output_dir);
  take(j, "split_fraction", c.split_fraction);
  take(j, "image_bit_depth", c.image_bit_depth);
  take(j, "write_datasets", c.write_datasets);

  if (auto it = j.find("acquisition"); it != j.end()) {
    const auto& a = *it;
    check_keys(a, "acquisition",
               {"sample_rate", "n_samples", "rows", "cols", "row_step_um", "col_step_um",
                "noise_sigma"});
    take(a, "sample_rate", c.acquisition.sample_rate);
    take(a, "n_samples", c.acquisition.n_samples);
    take(a, "rows", c.acquisition.rows);
    take(a, "cols", c.acquisition.cols);
    take(a, "row_step_um", c.acquisition.row_step);
    take(a, "col_step_um", c.acquisition.col_step);
    take(a, "noise_sigma", c.acquisition.noise_sigma);
  }
  if (auto it = j.find("transducer"); it != j.end()) {
    const auto& t = *it;
    check_keys(t, "transducer", {"center_freq_hz", "fractional_bandwidth", "focal_length_mm"});
    take(t, "center_freq_hz", c.transducer.center_freq);
    take(t, "fractional_bandwidth", c.transducer.fractional_bandwidth);
    take(t, "focal_length_mm", c.transducer.focal_length);
  }
  if (auto it = j.find("population"); it != j.end()) {
    const auto& p = *it;
    check_keys(p, "population",
               {"benign_samples", "malignant_samples", "ood_benign_samples",
                "ood_malignant_samples", "benign", "malignant", "eta", "beta", "kappa", "rho",
                "c_v", "surface_fluence", "fluence_decay", "speed_of_sound",
                "sample_gain_spread", "ood_noise_scale", "ood_gain"});
    auto& pop = c.population;
    take(p, "benign_samples", pop.benign_samples);
    take(p, "malignant_samples", pop.malignant_samples);
    take(p, "ood_benign_samples", pop.ood_benign_samples);
    take(p, "ood_malignant_samples", pop.ood_malignant_samples);
    if (p.contains("benign")) pop.benign = class_from_json(p["benign"], pop.benign);
    if (p.contains("malignant")) pop.malignant = class_from_json(p["malignant"], pop.malignant);
    take(p, "eta", pop.eta);
    take(p, "beta", pop.base_props.beta);
    take(p, "kappa", pop.base_props.kappa);
    take(p, "rho", pop.base_props.rho);
    take(p, "c_v", pop.base_props.c_v);
    take(p, "surface_fluence", pop.surface_fluence);
    take(p, "fluence_decay", pop.fluence_decay);
    take(p, "speed_of_sound", pop.speed_of_sound);
    take(p, "sample_gain_spread", pop.sample_gain_spread);
    take(p, "ood_noise_scale", pop.ood_noise_scale);
    take(p, "ood_gain", pop.ood_gain);
  }
  if (auto it = j.find("classifiers"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("classifiers must be an array");
    c.classifiers.clear();
    for (const auto& e : *it) {
      ClassifierEntry entry;
      if (e.is_string()) {
        entry.kind = clf::parse_kind(e.get<std::string>());
      } else {
        check_keys(e, "classifier entry", {"kind", "params"});
        entry.kind = clf::parse_kind(e.at("kind").get<std::string>());
        if (e.contains("params")) entry.config = clf::train_config_from_json(e["params"]);
      }
      c.classifiers.push_back(entry);
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    const auto doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    // A run manifest carries the exact config it was produced from.
    if (doc.is_object() && doc.value("format", "") == "pam-run" && doc.contains("config"))
      return config_from_json(doc.at("config"));
    return config_from_json(doc);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace pam::harness
