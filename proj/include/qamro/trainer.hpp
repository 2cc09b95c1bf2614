#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "qamro/data.hpp"
#include "qamro/regressor.hpp"
#include "qamro/types.hpp"

namespace qamro {

enum class RankingObjective {
  kAdaptive,     ///< quality-weighted hinge with adaptive margin
  kFixedMargin,  ///< plain hinge with the constant margin
  kNone,         ///< regression only
};

struct TrainConfig {
  int batch_size = 256;
  double learning_rate = 0.0005;
  int patience = 20;      ///< epochs without validation improvement before stopping
  int max_epochs = 500;
  double momentum = 0.0;  ///< 0 keeps plain SGD
  RankingObjective objective = RankingObjective::kAdaptive;
  LossConfig loss;
  std::uint64_t seed = 0;  ///< drives batch shuffling only

  void validate() const;
};

struct EpochRecord {
  double train_total = 0.0;
  double train_huber = 0.0;
  std::vector<double> train_rank;  ///< raw ranking component per head
  double val_total = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;    ///< 1-based; 0 when no epoch ran
  int stopped_epoch = 0;
  double best_val = std::numeric_limits<double>::quiet_NaN();
};

/// SGD with early stopping on the total combined validation loss. The
/// model is left at the best-validation epoch. Bit-reproducible for a
/// fixed seed: fixed shuffle order, fixed batch order, no threading.
TrainLog train(Regressor& reg, const DatasetTensors& train_set,
               const DatasetTensors& val_set, const TrainConfig& config);

/// Mean combined loss across heads on a full dataset, no updates.
double evaluate_loss(const Regressor& reg, const DatasetTensors& data,
                     const TrainConfig& config);

}  // namespace qamro
