#include "qamro/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qamro/loss.hpp"
#include "qamro/pairing.hpp"

namespace qamro {

void TrainConfig::validate() const {
  if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("learning_rate must be > 0");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (max_epochs < 0) throw std::invalid_argument("max_epochs must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("momentum must lie in [0, 1)");
  loss.validate();
}

namespace {

struct BatchLoss {
  double total = 0.0;
  double huber = 0.0;
  std::vector<double> rank;  // raw ranking value per head
  Matrix pred_grads;         // n x heads, d total / d prediction
};

/// Mean per-head combined loss on one batch. A head whose batch has no
/// usable pairs simply contributes no ranking term that step.
BatchLoss head_losses(const Matrix& targets, const Matrix& preds,
                      const TrainConfig& cfg) {
  const Index n_heads = targets.cols();
  BatchLoss bl;
  bl.rank.assign(static_cast<std::size_t>(n_heads), 0.0);
  bl.pred_grads.resize(preds.rows(), n_heads);

  const double head_weight = 1.0 / static_cast<double>(n_heads);
  for (Index h = 0; h < n_heads; ++h) {
    const Vector y_true = targets.col(h);
    const Vector y_pred = preds.col(h);
    const PairSet pairs = build_pair_set(y_true);

    double value = 0.0, huber_value = 0.0, rank_value = 0.0;
    Vector grad;
    switch (cfg.objective) {
      case RankingObjective::kAdaptive: {
        const CombinedLossOutput c = combined_loss(y_true, y_pred, pairs, cfg.loss);
        value = c.value;
        grad = c.grad;
        huber_value = c.huber_value;
        rank_value = c.ranking_value;
        break;
      }
      case RankingObjective::kFixedMargin: {
        const LossOutput hub = huber_loss(y_true, y_pred, cfg.loss.huber_delta);
        huber_value = hub.value;
        if (cfg.loss.lambda_rank == 0.0) {
          value = hub.value;
          grad = hub.grad;
        } else {
          const LossOutput mr =
              margin_ranking_loss(y_true, y_pred, pairs, cfg.loss.fixed_margin);
          rank_value = mr.value;
          value = hub.value + cfg.loss.lambda_rank * mr.value;
          grad = hub.grad + cfg.loss.lambda_rank * mr.grad;
        }
        break;
      }
      case RankingObjective::kNone: {
        const LossOutput hub = huber_loss(y_true, y_pred, cfg.loss.huber_delta);
        value = huber_value = hub.value;
        grad = hub.grad;
        break;
      }
    }
    bl.total += value * head_weight;
    bl.huber += huber_value * head_weight;
    bl.rank[static_cast<std::size_t>(h)] = rank_value;
    bl.pred_grads.col(h) = grad * head_weight;
  }
  return bl;
}

std::vector<HeadGrads> zero_like(const Regressor& reg) {
  std::vector<HeadGrads> out;
  out.reserve(reg.heads().size());
  for (const auto& p : reg.heads()) {
    HeadGrads g;
    g.w1 = Matrix::Zero(p.w1.rows(), p.w1.cols());
    g.b1 = Vector::Zero(p.b1.size());
    g.w2 = Matrix::Zero(p.w2.rows(), p.w2.cols());
    g.b2 = Vector::Zero(p.b2.size());
    g.w3 = Vector::Zero(p.w3.size());
    g.b3 = 0.0;
    out.push_back(std::move(g));
  }
  return out;
}

void accumulate_velocity(std::vector<HeadGrads>& velocity,
                         const std::vector<HeadGrads>& grads, double momentum) {
  for (std::size_t h = 0; h < velocity.size(); ++h) {
    velocity[h].w1 = momentum * velocity[h].w1 + grads[h].w1;
    velocity[h].b1 = momentum * velocity[h].b1 + grads[h].b1;
    velocity[h].w2 = momentum * velocity[h].w2 + grads[h].w2;
    velocity[h].b2 = momentum * velocity[h].b2 + grads[h].b2;
    velocity[h].w3 = momentum * velocity[h].w3 + grads[h].w3;
    velocity[h].b3 = momentum * velocity[h].b3 + grads[h].b3;
  }
}

void check_dataset(const Regressor& reg, const DatasetTensors& data,
                   const char* which) {
  if (data.features.rows() == 0)
    throw std::domain_error(std::string("empty ") + which + " set");
  if (data.features.cols() != reg.input_dim())
    throw std::invalid_argument(std::string(which) +
                                " feature width does not match the model");
  if (data.dims != reg.head_names())
    throw std::invalid_argument(std::string(which) +
                                " dimensions do not match the model heads");
}

}  // namespace

double evaluate_loss(const Regressor& reg, const DatasetTensors& data,
                     const TrainConfig& config) {
  check_dataset(reg, data, "evaluation");
  const Matrix preds = reg.forward(data.features);
  return head_losses(data.targets, preds, config).total;
}

TrainLog train(Regressor& reg, const DatasetTensors& train_set,
               const DatasetTensors& val_set, const TrainConfig& config) {
  config.validate();
  check_dataset(reg, train_set, "train");
  check_dataset(reg, val_set, "validation");

  TrainLog log;
  if (config.max_epochs == 0) return log;

  const Index n = train_set.features.rows();
  const Index n_heads = static_cast<Index>(reg.head_names().size());
  std::mt19937_64 rng(config.seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});

  std::vector<HeadParams> best_params = reg.heads();
  std::vector<HeadGrads> velocity;
  if (config.momentum > 0.0) velocity = zero_like(reg);

  double best_val = 0.0;
  int bad_epochs = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);

    double ep_total = 0.0, ep_huber = 0.0, ep_weight = 0.0;
    std::vector<double> ep_rank(static_cast<std::size_t>(n_heads), 0.0);

    for (Index start = 0; start < n; start += config.batch_size) {
      const Index m = std::min<Index>(config.batch_size, n - start);
      Matrix bx(m, train_set.features.cols());
      Matrix bt(m, n_heads);
      for (Index r = 0; r < m; ++r) {
        const Index src = order[static_cast<std::size_t>(start + r)];
        bx.row(r) = train_set.features.row(src);
        bt.row(r) = train_set.targets.row(src);
      }

      std::vector<HeadCache> caches;
      const Matrix preds = reg.forward(bx, caches);
      const BatchLoss bl = head_losses(bt, preds, config);
      const std::vector<HeadGrads> grads = reg.backward(bx, caches, bl.pred_grads);
      if (config.momentum > 0.0) {
        accumulate_velocity(velocity, grads, config.momentum);
        reg.apply_step(velocity, config.learning_rate);
      } else {
        reg.apply_step(grads, config.learning_rate);
      }

      const double w = static_cast<double>(m);
      ep_total += bl.total * w;
      ep_huber += bl.huber * w;
      for (std::size_t h = 0; h < ep_rank.size(); ++h)
        ep_rank[h] += bl.rank[h] * w;
      ep_weight += w;
    }

    EpochRecord rec;
    rec.train_total = ep_total / ep_weight;
    rec.train_huber = ep_huber / ep_weight;
    rec.train_rank.resize(ep_rank.size());
    for (std::size_t h = 0; h < ep_rank.size(); ++h)
      rec.train_rank[h] = ep_rank[h] / ep_weight;
    rec.val_total = evaluate_loss(reg, val_set, config);
    log.epochs.push_back(rec);
    log.stopped_epoch = epoch;

    if (log.best_epoch == 0 || rec.val_total < best_val) {
      best_val = rec.val_total;
      log.best_epoch = epoch;
      best_params = reg.heads();
      bad_epochs = 0;
    } else if (++bad_epochs >= config.patience) {
      break;
    }
  }

  reg.heads() = std::move(best_params);
  log.best_val = best_val;
  return log;
}

}  // namespace qamro
