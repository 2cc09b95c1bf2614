#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qamro/types.hpp"

namespace qamro {

enum class LossKind { kMarginRanking, kQamro, kHuber, kCombined };

/// Accepts "mr", "qamro", "huber", "combined".
LossKind parse_loss_kind(const std::string& name);
std::string loss_kind_name(LossKind kind);

struct GradCheckOptions {
  int trials = 1000;
  std::uint64_t seed = 0;
  double fd_step = 1e-5;
  double tolerance = 1e-5;
  /// Minimum distance of every hinge argument (and Huber crossover) from
  /// its kink; candidates closer than this are resampled.
  double kink_distance = 1e-3;
};

struct GradCheckFailure {
  int trial = 0;
  Index coordinate = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  LossKind kind = LossKind::kQamro;
  int trials = 0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::vector<GradCheckFailure> failures;

  bool passed() const { return failures.empty(); }
};

/// Compares the analytic gradient of a loss against central finite
/// differences of its value on random batches and random configs, with
/// every sampled point kept away from the kinks. The numeric side goes
/// through the value computation only.
GradCheckReport check_loss_gradient(LossKind kind, const GradCheckOptions& opts);

}  // namespace qamro
