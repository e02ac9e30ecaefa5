#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "pam/harness.hpp"

namespace pam::harness {
namespace {

constexpr char kSignalMagic[4] = {'P', 'A', 'M', 'D'};
constexpr char kFeatureMagic[4] = {'P', 'A', 'M', 'F'};

template <typename T>
void put_le(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  const U bits = std::bit_cast<U>(value);
  char buf[sizeof(U)];
  for (std::size_t k = 0; k < sizeof(U); ++k) buf[k] = static_cast<char>((bits >> (8 * k)) & 0xFF);
  out.write(buf, sizeof buf);
}

template <typename T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  unsigned char buf[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof buf))
    throw StructuralError("dataset file truncated");
  U bits = 0;
  for (std::size_t k = 0; k < sizeof(U); ++k) bits |= static_cast<U>(buf[k]) << (8 * k);
  return std::bit_cast<T>(bits);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t global, SeedStream stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(global) ^ static_cast<std::uint64_t>(stream)) ^ index);
}

void write_dataset(std::ostream& out, const LabeledDataset& data) {
  const bool raw = data.sample_rate() > 0.0;
  out.write(raw ? kSignalMagic : kFeatureMagic, 4);
  put_le<std::uint32_t>(out, kDatasetVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.dim()));
  put_le<double>(out, data.sample_rate());
  put_le<std::uint64_t>(out, data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto& s = data.source(k);
    put_le<std::uint32_t>(out, s.sample_id);
    put_le<std::uint32_t>(out, s.row);
    put_le<std::uint32_t>(out, s.col);
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(data.label(k)));
    for (double v : data.row(k)) put_le<double>(out, v);
  }
  if (!out) throw Error("failed writing dataset");
}

void write_dataset(const std::string& path, const LabeledDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_dataset(out, data);
}

LabeledDataset read_dataset(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw StructuralError("dataset file truncated");
  const bool raw = std::memcmp(magic, kSignalMagic, 4) == 0;
  if (!raw && std::memcmp(magic, kFeatureMagic, 4) != 0)
    throw StructuralError("not a dataset file (bad magic)");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kDatasetVersion)
    throw StructuralError("unsupported dataset version " + std::to_string(version));
  const auto dim = get_le<std::uint32_t>(in);
  const auto sample_rate = get_le<double>(in);
  const auto count = get_le<std::uint64_t>(in);
  if (dim == 0) throw StructuralError("dataset declares zero-length records");
  if (raw != (sample_rate > 0.0))
    throw StructuralError("sample_rate inconsistent with dataset kind");
  LabeledDataset data(dim, sample_rate);
  std::vector<double> values(dim);
  for (std::uint64_t k = 0; k < count; ++k) {
    SourceId s;
    s.sample_id = get_le<std::uint32_t>(in);
    s.row = get_le<std::uint32_t>(in);
    s.col = get_le<std::uint32_t>(in);
    const auto label = get_le<std::uint8_t>(in);
    for (auto& v : values) v = get_le<double>(in);
    data.add(values, label, s);
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw StructuralError("dataset file has trailing bytes beyond declared count");
  return data;
}

LabeledDataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_dataset(in);
}

Split split(const LabeledDataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidInput("split fraction must lie in (0, 1)");
  const std::size_t m = data.size();
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m)));
  if (n_train == 0 || n_train >= m)
    throw InvalidInput("split of " + std::to_string(m) + " rows leaves an empty part");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  auto both = [&](const std::vector<std::size_t>& idx) {
    bool pos = false, neg = false;
    for (auto k : idx) (data.label(k) ? pos : neg) = true;
    return pos && neg;
  };
  if (!both(s.train)) s.warnings.push_back("training split holds a single class");
  if (!both(s.test)) s.warnings.push_back("test split holds a single class");
  return s;
}

Partition partition(const LabeledDataset& features, const ExperimentConfig& config) {
  const auto ood_ids = config.ood_sample_ids();
  auto is_ood = [&](std::uint32_t id) {
    return std::find(ood_ids.begin(), ood_ids.end(), id) != ood_ids.end();
  };
  std::vector<std::size_t> in_dist, ood;
  for (std::size_t k = 0; k < features.size(); ++k)
    (is_ood(features.source(k).sample_id) ? ood : in_dist).push_back(k);
  const auto id_data = features.subset(in_dist);
  const auto s = split(id_data, config.split_fraction, derive_seed(config.seed, SeedStream::split));
  Partition p{id_data.subset(s.train), id_data.subset(s.test), features.subset(ood), s.warnings};
  audit_ood(p.train, ood_ids);
  return p;
}

void audit_ood(const LabeledDataset& train, const std::vector<std::uint32_t>& ood_ids) {
  for (const auto& s : train.sources())
    if (std::find(ood_ids.begin(), ood_ids.end(), s.sample_id) != ood_ids.end())
      throw Error("OOD sample " + std::to_string(s.sample_id) + " leaked into training data");
}

void write_scores(std::ostream& out, const ScoreTable& t) {
  out << "sample_id,row,col,label,score\n";
  char buf[64];
  for (std::size_t k = 0; k < t.scores.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", t.scores[k]);
    out << t.sources[k].sample_id << ',' << t.sources[k].row << ',' << t.sources[k].col << ','
        << static_cast<int>(t.labels[k]) << ',' << buf << '\n';
  }
}

ScoreTable read_scores(std::istream& in) {
  ScoreTable t;
  std::string line;
  if (!std::getline(in, line) || line != "sample_id,row,col,label,score")
    throw StructuralError("score file has an unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field[5];
    for (int k = 0; k < 5; ++k)
      if (!std::getline(row, field[k], ',')) throw StructuralError("short score row: " + line);
    try {
      t.sources.push_back({static_cast<std::uint32_t>(std::stoul(field[0])),
                           static_cast<std::uint32_t>(std::stoul(field[1])),
                           static_cast<std::uint32_t>(std::stoul(field[2]))});
      t.labels.push_back(static_cast<std::uint8_t>(std::stoi(field[3])));
      t.scores.push_back(std::stod(field[4]));
    } catch (const std::exception&) {
      throw StructuralError("malformed score row: " + line);
    }
  }
  return t;
}

}  // namespace pam::harness
