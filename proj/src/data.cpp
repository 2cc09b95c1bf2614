#include "qamro/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qamro {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void line_error(std::size_t lineno, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(lineno) + ": " + what);
}

RatedSample parse_sample(const json& j, std::size_t lineno, double scale_min,
                         double scale_max) {
  if (!j.is_object()) line_error(lineno, "expected a JSON object");
  for (const char* field : {"clip_id", "system_id", "features", "scores"})
    if (!j.contains(field))
      line_error(lineno, std::string("missing field '") + field + "'");

  RatedSample s;
  if (!j["clip_id"].is_string()) line_error(lineno, "clip_id must be a string");
  if (!j["system_id"].is_string())
    line_error(lineno, "system_id must be a string");
  s.clip_id = j["clip_id"].get<std::string>();
  s.system_id = j["system_id"].get<std::string>();

  const auto& feats = j["features"];
  if (!feats.is_array() || feats.empty())
    line_error(lineno, "features must be a non-empty array");
  s.features.resize(static_cast<Index>(feats.size()));
  for (std::size_t i = 0; i < feats.size(); ++i) {
    if (!feats[i].is_number())
      line_error(lineno, "features[" + std::to_string(i) + "] is not a number");
    s.features[static_cast<Index>(i)] = feats[i].get<double>();
  }

  const auto& scores = j["scores"];
  if (!scores.is_object() || scores.empty())
    line_error(lineno, "scores must be a non-empty object");
  for (const auto& [dim, value] : scores.items()) {
    if (!value.is_number())
      line_error(lineno, "score '" + dim + "' is not a number");
    const double v = value.get<double>();
    if (!(v >= scale_min && v <= scale_max)) {
      std::ostringstream msg;
      msg << "score '" << dim << "' = " << v << " outside [" << scale_min
          << ", " << scale_max << "]";
      line_error(lineno, msg.str());
    }
    s.scores[dim] = v;
  }
  return s;
}

std::string pad_id(const char* prefix, int value, int count) {
  std::size_t width = 1;
  for (int v = count - 1; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(value);
  if (digits.size() < width)
    digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

std::vector<std::string> dimension_names(const std::vector<RatedSample>& samples) {
  if (samples.empty()) throw std::domain_error("empty dataset");
  std::vector<std::string> dims;
  dims.reserve(samples.front().scores.size());
  for (const auto& [dim, value] : samples.front().scores) dims.push_back(dim);
  return dims;
}

std::vector<RatedSample> load_dataset(const std::filesystem::path& path,
                                      double scale_min, double scale_max) {
  if (!(scale_min < scale_max))
    throw std::invalid_argument("scale_min must be smaller than scale_max");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path.string());

  std::vector<RatedSample> samples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      line_error(lineno, std::string("invalid JSON: ") + e.what());
    }
    RatedSample s = parse_sample(j, lineno, scale_min, scale_max);
    if (!samples.empty()) {
      if (s.features.size() != samples.front().features.size())
        line_error(lineno, "feature length differs from the first sample");
      if (s.scores.size() != samples.front().scores.size() ||
          !std::equal(s.scores.begin(), s.scores.end(),
                      samples.front().scores.begin(),
                      [](const auto& a, const auto& b) { return a.first == b.first; }))
        line_error(lineno, "score dimensions differ from the first sample");
    }
    samples.push_back(std::move(s));
  }
  if (samples.empty())
    throw std::domain_error("empty dataset: " + path.string());
  return samples;
}

void save_dataset(std::ostream& os, const std::vector<RatedSample>& samples) {
  for (const auto& s : samples) {
    ordered_json j;
    j["clip_id"] = s.clip_id;
    j["system_id"] = s.system_id;
    j["features"] = std::vector<double>(s.features.data(),
                                        s.features.data() + s.features.size());
    ordered_json scores;
    for (const auto& [dim, value] : s.scores) scores[dim] = value;
    j["scores"] = std::move(scores);
    os << j.dump() << '\n';
  }
}

void save_dataset(const std::filesystem::path& path,
                  const std::vector<RatedSample>& samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path.string());
  save_dataset(out, samples);
}

std::pair<std::vector<RatedSample>, std::vector<RatedSample>> split_dataset(
    const std::vector<RatedSample>& samples, double val_fraction,
    std::uint64_t seed, bool by_system) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw std::invalid_argument("val_fraction must lie in (0, 1)");
  if (samples.empty()) throw std::domain_error("empty dataset");

  std::mt19937_64 rng(seed);
  std::vector<char> in_val(samples.size(), 0);

  if (by_system) {
    std::set<std::string> id_set;
    for (const auto& s : samples) id_set.insert(s.system_id);
    if (id_set.size() < 2)
      throw std::domain_error("by-system split needs at least two systems");
    std::vector<std::string> ids(id_set.begin(), id_set.end());
    std::shuffle(ids.begin(), ids.end(), rng);
    const long want = std::lround(val_fraction * static_cast<double>(ids.size()));
    const std::size_t k = static_cast<std::size_t>(
        std::clamp<long>(want, 1, static_cast<long>(ids.size()) - 1));
    const std::set<std::string> val_ids(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (val_ids.count(samples[i].system_id)) in_val[i] = 1;
  } else {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < samples.size(); ++i)
      groups[samples[i].system_id].push_back(i);
    for (auto& [id, idx] : groups) {
      std::shuffle(idx.begin(), idx.end(), rng);
      const long want = std::lround(val_fraction * static_cast<double>(idx.size()));
      const std::size_t k = static_cast<std::size_t>(
          std::clamp<long>(want, 0, static_cast<long>(idx.size())));
      for (std::size_t i = 0; i < k; ++i) in_val[idx[i]] = 1;
    }
  }

  std::vector<RatedSample> train, val;
  for (std::size_t i = 0; i < samples.size(); ++i)
    (in_val[i] ? val : train).push_back(samples[i]);
  if (train.empty() || val.empty())
    throw std::domain_error("split leaves one side empty");
  return {std::move(train), std::move(val)};
}

void SynthSpec::validate() const {
  if (n_systems < 1) throw std::invalid_argument("n_systems must be >= 1");
  if (clips_per_system < 1)
    throw std::invalid_argument("clips_per_system must be >= 1");
  if (feature_dim < 1) throw std::invalid_argument("feature_dim must be >= 1");
  if (dimension_names.empty())
    throw std::invalid_argument("at least one dimension name required");
  std::set<std::string> uniq(dimension_names.begin(), dimension_names.end());
  if (uniq.size() != dimension_names.size())
    throw std::invalid_argument("duplicate dimension names");
  if (!(system_quality_spread >= 0.0))
    throw std::invalid_argument("system_quality_spread must be >= 0");
  if (!(clip_noise_sd >= 0.0))
    throw std::invalid_argument("clip_noise_sd must be >= 0");
  if (!(signal_to_noise >= 0.0 && signal_to_noise <= 1.0))
    throw std::invalid_argument("signal_to_noise must lie in [0, 1]");
  if (!(scale_min < scale_max))
    throw std::invalid_argument("scale_min must be smaller than scale_max");
  if (system_quality_spread > scale_max - scale_min)
    throw std::invalid_argument("system_quality_spread exceeds the scale");
}

std::vector<double> latent_levels(const SynthSpec& spec) {
  spec.validate();
  const double mid = 0.5 * (spec.scale_min + spec.scale_max);
  std::vector<double> levels(static_cast<std::size_t>(spec.n_systems));
  if (spec.n_systems == 1) {  // a lone system sits at the scale midpoint
    levels[0] = mid;
    return levels;
  }
  const double lo = mid - 0.5 * spec.system_quality_spread;
  const double step =
      spec.system_quality_spread / static_cast<double>(spec.n_systems - 1);
  for (int s = 0; s < spec.n_systems; ++s)
    levels[static_cast<std::size_t>(s)] = lo + step * s;
  return levels;
}

std::vector<RatedSample> generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const std::vector<double> levels = latent_levels(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);

  const int n_dims = static_cast<int>(spec.dimension_names.size());
  Matrix coupling(spec.feature_dim, n_dims);
  for (Index r = 0; r < coupling.rows(); ++r)
    for (Index c = 0; c < coupling.cols(); ++c) coupling(r, c) = unit_normal(rng);

  const double mid = 0.5 * (spec.scale_min + spec.scale_max);
  const double half_range = 0.5 * (spec.scale_max - spec.scale_min);
  const double signal_mix = std::sqrt(spec.signal_to_noise);
  const double noise_mix = std::sqrt(1.0 - spec.signal_to_noise);

  std::vector<RatedSample> out;
  out.reserve(static_cast<std::size_t>(spec.n_systems) *
              static_cast<std::size_t>(spec.clips_per_system));
  for (int s = 0; s < spec.n_systems; ++s) {
    const std::string system_id = pad_id("sys", s, spec.n_systems);
    for (int c = 0; c < spec.clips_per_system; ++c) {
      RatedSample sample;
      sample.system_id = system_id;
      sample.clip_id = system_id + "_" + pad_id("clip", c, spec.clips_per_system);

      Vector z(n_dims);
      for (int d = 0; d < n_dims; ++d) {
        const double noise =
            spec.clip_noise_sd > 0.0 ? spec.clip_noise_sd * unit_normal(rng) : 0.0;
        const double y = std::clamp(levels[static_cast<std::size_t>(s)] + noise,
                                    spec.scale_min, spec.scale_max);
        sample.scores[spec.dimension_names[static_cast<std::size_t>(d)]] = y;
        z[d] = (y - mid) / half_range;
      }

      Vector distract(spec.feature_dim);
      for (Index i = 0; i < distract.size(); ++i) distract[i] = unit_normal(rng);
      sample.features = signal_mix * (coupling * z) + noise_mix * distract;
      out.push_back(std::move(sample));
    }
  }
  return out;
}

DatasetTensors to_tensors(const std::vector<RatedSample>& samples) {
  if (samples.empty()) throw std::domain_error("empty dataset");
  DatasetTensors t;
  t.dims = dimension_names(samples);
  const Index n = static_cast<Index>(samples.size());
  const Index d = samples.front().features.size();
  const Index h = static_cast<Index>(t.dims.size());
  t.features.resize(n, d);
  t.targets.resize(n, h);
  t.system_ids.reserve(samples.size());
  t.clip_ids.reserve(samples.size());
  for (Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    if (s.features.size() != d)
      throw std::invalid_argument("inconsistent feature length in dataset");
    if (s.scores.size() != static_cast<std::size_t>(h))
      throw std::invalid_argument("inconsistent score dimensions in dataset");
    t.features.row(i) = s.features.transpose();
    Index k = 0;
    for (const auto& [dim, value] : s.scores) {
      if (dim != t.dims[static_cast<std::size_t>(k)])
        throw std::invalid_argument("inconsistent score dimensions in dataset");
      t.targets(i, k) = value;
      ++k;
    }
    t.system_ids.push_back(s.system_id);
    t.clip_ids.push_back(s.clip_id);
  }
  return t;
}

}  // namespace qamro
