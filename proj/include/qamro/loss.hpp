#pragma once

#include "qamro/pairing.hpp"
#include "qamro/types.hpp"

namespace qamro {

/// Per-pair weight in [1, beta]; grows with the better of the two
/// normalized ground-truth scores.
double quality_weight(double y_norm_i, double y_norm_j, double beta);

/// Pairwise hinge with a constant margin, averaged over the pair set.
/// Gradient is the exact subgradient with the hinge inactive at equality.
LossOutput margin_ranking_loss(const Eigen::Ref<const Vector>& y_true,
                               const Eigen::Ref<const Vector>& y_pred,
                               const PairSet& pairs, double margin);

/// Quality-weighted hinge with the adaptive margin alpha * |y_i - y_j|.
LossOutput qamro_loss(const Eigen::Ref<const Vector>& y_true,
                      const Eigen::Ref<const Vector>& y_pred,
                      const PairSet& pairs, const LossConfig& config);

/// Mean Huber loss over per-sample residuals y_pred - y_true.
LossOutput huber_loss(const Eigen::Ref<const Vector>& y_true,
                      const Eigen::Ref<const Vector>& y_pred, double delta);

/// huber + lambda_rank * qamro. With lambda_rank == 0 the ranking term is
/// skipped entirely and the result equals the Huber loss bit for bit.
CombinedLossOutput combined_loss(const Eigen::Ref<const Vector>& y_true,
                                 const Eigen::Ref<const Vector>& y_pred,
                                 const PairSet& pairs,
                                 const LossConfig& config);

}  // namespace qamro
