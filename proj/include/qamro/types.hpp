#pragma once

#include <Eigen/Dense>

namespace qamro {

using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Ground-truth scores closer than this are treated as tied and excluded
/// from ranking pairs.
inline constexpr double kTieTolerance = 1e-9;

/// Hyperparameters shared by the ranking and regression losses.
struct LossConfig {
  double alpha = 0.2;         ///< scales the adaptive margin alpha * |y_i - y_j|
  double beta = 7.0;          ///< quality preference; 1 disables the weighting
  double fixed_margin = 0.5;  ///< margin of the plain ranking loss
  double huber_delta = 1.0;   ///< quadratic/linear crossover of the Huber loss
  double lambda_rank = 1.0;   ///< weight of the ranking term in the combined loss
  double scale_min = 1.0;     ///< lower rating-scale bound
  double scale_max = 5.0;     ///< upper rating-scale bound

  void validate() const;  // throws std::invalid_argument on a bad value
};

struct LossOutput {
  double value = 0.0;
  Vector grad;             ///< d value / d y_pred
  bool degenerate = false; ///< pair set was empty, ranking term vacuous
};

struct CombinedLossOutput {
  double value = 0.0;
  Vector grad;
  double huber_value = 0.0;
  double ranking_value = 0.0;  ///< unweighted ranking component
  bool degenerate = false;
};

}  // namespace qamro
