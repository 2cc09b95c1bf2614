#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "qamro/data.hpp"
#include "qamro/metrics.hpp"
#include "qamro/regressor.hpp"
#include "qamro/trainer.hpp"

namespace qamro {

/// Everything one training run needs on top of the raw samples.
struct RunConfig {
  TrainConfig train;
  double val_fraction = 0.1;
  bool by_system_split = false;
  std::vector<int> hidden_dims = {128, 64};
};

struct RunOutcome {
  Regressor model;
  TrainLog log;
  MetricsReport metrics;  ///< system-level, on the validation split
};

/// Derives independent sub-seeds for split / init / shuffling from one
/// run seed (splitmix-style).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Split, init, train, then evaluate on the validation split with
/// predictions clamped to the rating scale.
RunOutcome train_and_evaluate(const std::vector<RatedSample>& samples,
                              const RunConfig& config, std::uint64_t seed);

/// Metrics of a trained model on a whole dataset, predictions clamped.
MetricsReport evaluate_model(const Regressor& model,
                             const std::vector<RatedSample>& samples,
                             const LossConfig& loss, bool clip_level = false);

enum class AblationVariant { kQamro, kNoWeighting, kFixedMargin, kRegressionOnly };

inline constexpr std::array<AblationVariant, 4> kAllVariants = {
    AblationVariant::kQamro, AblationVariant::kNoWeighting,
    AblationVariant::kFixedMargin, AblationVariant::kRegressionOnly};

std::string variant_name(AblationVariant v);

/// The four loss settings of the ablation, everything else untouched.
TrainConfig apply_variant(TrainConfig base, AblationVariant v);

struct AblationRow {
  std::string variant;
  std::uint64_t seed;
  std::string dimension;
  std::string metric;
  double value;
};

std::vector<AblationRow> run_ablation(const std::vector<RatedSample>& samples,
                                      const RunConfig& base,
                                      const std::vector<std::uint64_t>& seeds);

struct SweepRow {
  double beta;
  std::uint64_t seed;
  std::string dimension;
  std::string metric;
  double value;
};

std::vector<SweepRow> run_beta_sweep(const std::vector<RatedSample>& samples,
                                     const RunConfig& base,
                                     const std::vector<double>& betas,
                                     const std::vector<std::uint64_t>& seeds);

/// Rows come out in canonical order already; the writers keep it.
void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_train_log_csv(std::ostream& os, const TrainLog& log,
                         const std::vector<std::string>& dims);

}  // namespace qamro
