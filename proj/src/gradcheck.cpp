#include "qamro/gradcheck.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include "qamro/loss.hpp"
#include "qamro/pairing.hpp"

namespace qamro {

LossKind parse_loss_kind(const std::string& name) {
  if (name == "mr") return LossKind::kMarginRanking;
  if (name == "qamro") return LossKind::kQamro;
  if (name == "huber") return LossKind::kHuber;
  if (name == "combined") return LossKind::kCombined;
  throw std::invalid_argument("unknown loss '" + name +
                              "' (expected mr, qamro, huber, combined)");
}

std::string loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::kMarginRanking: return "mr";
    case LossKind::kQamro: return "qamro";
    case LossKind::kHuber: return "huber";
    case LossKind::kCombined: return "combined";
  }
  return "?";
}

namespace {

/// Distance of the closest hinge argument / Huber crossover from its kink.
double kink_distance_of(LossKind kind, const Vector& y_true,
                        const Vector& y_pred, const PairSet& pairs,
                        const LossConfig& cfg) {
  double dist = std::numeric_limits<double>::infinity();
  const bool ranking = kind != LossKind::kHuber;
  const bool regression =
      kind == LossKind::kHuber || kind == LossKind::kCombined;
  if (ranking) {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [i, j] = pairs.indices[k];
      const double s = pairs.signs[static_cast<Index>(k)];
      const double margin = kind == LossKind::kMarginRanking
                                ? cfg.fixed_margin
                                : cfg.alpha * pairs.gaps[static_cast<Index>(k)];
      const double arg = -s * (y_pred[i] - y_pred[j]) + margin;
      dist = std::min(dist, std::abs(arg));
    }
  }
  if (regression) {
    for (Index i = 0; i < y_pred.size(); ++i) {
      const double r = std::abs(y_pred[i] - y_true[i]);
      dist = std::min(dist, std::abs(r - cfg.huber_delta));
    }
  }
  return dist;
}

}  // namespace

GradCheckReport check_loss_gradient(LossKind kind, const GradCheckOptions& opts) {
  if (opts.trials < 0) throw std::invalid_argument("trials must be >= 0");
  if (!(opts.fd_step > 0.0)) throw std::invalid_argument("fd_step must be > 0");
  if (!(opts.tolerance > 0.0))
    throw std::invalid_argument("tolerance must be > 0");

  GradCheckReport report;
  report.kind = kind;
  report.trials = opts.trials;
  report.tolerance = opts.tolerance;
  if (opts.trials == 0) return report;  // vacuous pass, caller warns

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> batch_size(4, 10);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  for (int trial = 0; trial < opts.trials; ++trial) {
    const Index n = batch_size(rng);
    LossConfig cfg;
    cfg.alpha = 0.05 + 0.45 * u01(rng);
    cfg.beta = 1.0 + 8.0 * u01(rng);
    cfg.fixed_margin = 0.1 + 0.9 * u01(rng);
    cfg.huber_delta = 0.5 + 1.5 * u01(rng);
    cfg.lambda_rank = 0.25 + 1.75 * u01(rng);

    Vector y_true(n);
    for (Index i = 0; i < n; ++i)
      y_true[i] = cfg.scale_min + (cfg.scale_max - cfg.scale_min) * u01(rng);
    const PairSet pairs = build_pair_set(y_true);

    Vector y_pred(n);
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      for (Index i = 0; i < n; ++i) y_pred[i] = 6.0 * u01(rng);
      placed = kink_distance_of(kind, y_true, y_pred, pairs, cfg) >
               opts.kink_distance;
    }
    if (!placed)
      throw std::runtime_error("could not sample a point away from the kinks");

    const auto value_of = [&](const Vector& pred) -> double {
      switch (kind) {
        case LossKind::kMarginRanking:
          return margin_ranking_loss(y_true, pred, pairs, cfg.fixed_margin).value;
        case LossKind::kQamro:
          return qamro_loss(y_true, pred, pairs, cfg).value;
        case LossKind::kHuber:
          return huber_loss(y_true, pred, cfg.huber_delta).value;
        case LossKind::kCombined:
          return combined_loss(y_true, pred, pairs, cfg).value;
      }
      return 0.0;
    };

    Vector analytic;
    switch (kind) {
      case LossKind::kMarginRanking:
        analytic = margin_ranking_loss(y_true, y_pred, pairs, cfg.fixed_margin).grad;
        break;
      case LossKind::kQamro:
        analytic = qamro_loss(y_true, y_pred, pairs, cfg).grad;
        break;
      case LossKind::kHuber:
        analytic = huber_loss(y_true, y_pred, cfg.huber_delta).grad;
        break;
      case LossKind::kCombined:
        analytic = combined_loss(y_true, y_pred, pairs, cfg).grad;
        break;
    }

    Vector probe = y_pred;
    for (Index c = 0; c < n; ++c) {
      const double saved = probe[c];
      probe[c] = saved + opts.fd_step;
      const double f_plus = value_of(probe);
      probe[c] = saved - opts.fd_step;
      const double f_minus = value_of(probe);
      probe[c] = saved;

      const double numeric = (f_plus - f_minus) / (2.0 * opts.fd_step);
      const double rel = std::abs(analytic[c] - numeric) /
                         std::max({1.0, std::abs(analytic[c]), std::abs(numeric)});
      report.max_rel_error = std::max(report.max_rel_error, rel);
      if (rel > opts.tolerance)
        report.failures.push_back({trial, c, analytic[c], numeric, rel});
    }
  }
  return report;
}

}  // namespace qamro
