#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qamro/types.hpp"

namespace qamro {

/// One rated clip. Scores are keyed by dimension name; every sample of a
/// dataset carries the same dimension set and the same feature width.
struct RatedSample {
  std::string clip_id;
  std::string system_id;
  Vector features;
  std::map<std::string, double> scores;
};

/// Sorted dimension names shared by all samples.
std::vector<std::string> dimension_names(const std::vector<RatedSample>& samples);

/// Reads a JSONL file, one object per line with fields clip_id, system_id,
/// features, scores. Malformed lines raise std::runtime_error naming the
/// line number; out-of-scale scores raise the same with score and bounds.
std::vector<RatedSample> load_dataset(const std::filesystem::path& path,
                                      double scale_min = 1.0,
                                      double scale_max = 5.0);

void save_dataset(std::ostream& os, const std::vector<RatedSample>& samples);
void save_dataset(const std::filesystem::path& path,
                  const std::vector<RatedSample>& samples);

/// Deterministic split. by_system holds out whole systems (at least one,
/// never all); otherwise clips are sampled stratified within each system.
std::pair<std::vector<RatedSample>, std::vector<RatedSample>> split_dataset(
    const std::vector<RatedSample>& samples, double val_fraction,
    std::uint64_t seed, bool by_system);

struct SynthSpec {
  int n_systems = 8;
  int clips_per_system = 25;
  int feature_dim = 16;
  std::vector<std::string> dimension_names = {"MI", "TA"};
  double system_quality_spread = 3.0;  ///< score units between worst and best system mean
  double clip_noise_sd = 0.5;
  double signal_to_noise = 0.6;  ///< share of feature variance tied to the true score
  double scale_min = 1.0;
  double scale_max = 5.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Latent per-system quality levels: evenly spaced, centered on the scale
/// midpoint, spanning system_quality_spread score units.
std::vector<double> latent_levels(const SynthSpec& spec);

/// Seeded generator. Clip scores are the system level plus Gaussian noise,
/// clipped to the scale; features mix a random linear projection of the
/// true scores with distractor noise at the requested signal share.
std::vector<RatedSample> generate_synthetic(const SynthSpec& spec);

/// Dense view of a dataset for training: one feature row and one target
/// row per clip, target columns in sorted dimension order.
struct DatasetTensors {
  Matrix features;  // n x feature_dim
  Matrix targets;   // n x n_dims
  std::vector<std::string> dims;
  std::vector<std::string> system_ids;
  std::vector<std::string> clip_ids;
};

DatasetTensors to_tensors(const std::vector<RatedSample>& samples);

}  // namespace qamro
