#include "qamro/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qamro {

void LossConfig::validate() const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (!(beta >= 1.0)) throw std::invalid_argument("beta must be >= 1");
  if (!(fixed_margin >= 0.0))
    throw std::invalid_argument("fixed_margin must be >= 0");
  if (!(huber_delta > 0.0))
    throw std::invalid_argument("huber_delta must be > 0");
  if (!(lambda_rank >= 0.0))
    throw std::invalid_argument("lambda_rank must be >= 0");
  if (!(scale_min < scale_max))
    throw std::invalid_argument("scale_min must be smaller than scale_max");
}

namespace {

void check_same_size(const Eigen::Ref<const Vector>& y_true,
                     const Eigen::Ref<const Vector>& y_pred) {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("y_true and y_pred must have equal length");
}

void check_pair_indices(const PairSet& pairs, Index n) {
  for (const auto& [i, j] : pairs.indices) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw std::invalid_argument("pair index out of range");
  }
}

}  // namespace

double quality_weight(double y_norm_i, double y_norm_j, double beta) {
  if (!(y_norm_i >= 0.0 && y_norm_i <= 1.0) ||
      !(y_norm_j >= 0.0 && y_norm_j <= 1.0))
    throw std::domain_error("normalized scores must lie in [0, 1]");
  if (!(beta >= 1.0)) throw std::domain_error("beta must be >= 1");
  return 1.0 + (beta - 1.0) * std::max(y_norm_i, y_norm_j);
}

LossOutput margin_ranking_loss(const Eigen::Ref<const Vector>& y_true,
                               const Eigen::Ref<const Vector>& y_pred,
                               const PairSet& pairs, double margin) {
  check_same_size(y_true, y_pred);
  if (!(margin >= 0.0)) throw std::invalid_argument("margin must be >= 0");
  check_pair_indices(pairs, y_pred.size());

  LossOutput out;
  out.grad = Vector::Zero(y_pred.size());
  if (pairs.empty()) {
    out.degenerate = true;
    return out;
  }

  double total = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs.indices[k];
    const double s = pairs.signs[static_cast<Index>(k)];
    const double arg = -s * (y_pred[i] - y_pred[j]) + margin;
    if (arg > 0.0) {
      total += arg;
      out.grad[i] -= s;
      out.grad[j] += s;
    }
  }
  const double inv = 1.0 / static_cast<double>(pairs.size());
  out.value = total * inv;
  out.grad *= inv;
  return out;
}

LossOutput qamro_loss(const Eigen::Ref<const Vector>& y_true,
                      const Eigen::Ref<const Vector>& y_pred,
                      const PairSet& pairs, const LossConfig& config) {
  config.validate();
  check_same_size(y_true, y_pred);
  check_pair_indices(pairs, y_pred.size());
  const Vector y_norm = normalize_scores(y_true, config.scale_min, config.scale_max);

  LossOutput out;
  out.grad = Vector::Zero(y_pred.size());
  if (pairs.empty()) {
    out.degenerate = true;
    return out;
  }

  double total = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs.indices[k];
    const double s = pairs.signs[static_cast<Index>(k)];
    const double margin = config.alpha * pairs.gaps[static_cast<Index>(k)];
    const double arg = -s * (y_pred[i] - y_pred[j]) + margin;
    if (arg > 0.0) {
      const double q = quality_weight(y_norm[i], y_norm[j], config.beta);
      total += q * arg;
      out.grad[i] -= q * s;
      out.grad[j] += q * s;
    }
  }
  const double inv = 1.0 / static_cast<double>(pairs.size());
  out.value = total * inv;
  out.grad *= inv;
  return out;
}

LossOutput huber_loss(const Eigen::Ref<const Vector>& y_true,
                      const Eigen::Ref<const Vector>& y_pred, double delta) {
  check_same_size(y_true, y_pred);
  const Index n = y_pred.size();
  if (n == 0) throw std::domain_error("huber_loss on an empty batch");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");

  LossOutput out;
  out.grad.resize(n);
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double r = y_pred[i] - y_true[i];
    const double a = std::abs(r);
    if (a <= delta) {
      total += 0.5 * r * r;
      out.grad[i] = r;
    } else {
      total += delta * (a - 0.5 * delta);
      out.grad[i] = r > 0.0 ? delta : -delta;
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.value = total * inv;
  out.grad *= inv;
  return out;
}

CombinedLossOutput combined_loss(const Eigen::Ref<const Vector>& y_true,
                                 const Eigen::Ref<const Vector>& y_pred,
                                 const PairSet& pairs,
                                 const LossConfig& config) {
  config.validate();
  LossOutput hub = huber_loss(y_true, y_pred, config.huber_delta);

  CombinedLossOutput out;
  out.huber_value = hub.value;
  if (config.lambda_rank == 0.0) {
    out.value = hub.value;
    out.grad = std::move(hub.grad);
    out.degenerate = pairs.empty();
    return out;
  }

  const LossOutput rank = qamro_loss(y_true, y_pred, pairs, config);
  out.ranking_value = rank.value;
  out.value = hub.value + config.lambda_rank * rank.value;
  out.grad = hub.grad + config.lambda_rank * rank.grad;
  out.degenerate = rank.degenerate;
  return out;
}

}  // namespace qamro
