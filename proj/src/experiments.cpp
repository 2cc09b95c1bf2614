#include "qamro/experiments.hpp"

#include <algorithm>
#include <stdexcept>

#include "qamro/csv.hpp"

namespace qamro {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RunOutcome train_and_evaluate(const std::vector<RatedSample>& samples,
                              const RunConfig& config, std::uint64_t seed) {
  auto [train_samples, val_samples] =
      split_dataset(samples, config.val_fraction, mix_seed(seed, 0),
                    config.by_system_split);
  const DatasetTensors train_t = to_tensors(train_samples);
  const DatasetTensors val_t = to_tensors(val_samples);

  const double midpoint =
      0.5 * (config.train.loss.scale_min + config.train.loss.scale_max);
  RunOutcome out;
  out.model = Regressor(static_cast<int>(train_t.features.cols()), train_t.dims,
                        config.hidden_dims, mix_seed(seed, 1), midpoint);

  TrainConfig train_cfg = config.train;
  train_cfg.seed = mix_seed(seed, 2);
  out.log = train(out.model, train_t, val_t, train_cfg);
  out.metrics = evaluate_model(out.model, val_samples, config.train.loss);
  return out;
}

MetricsReport evaluate_model(const Regressor& model,
                             const std::vector<RatedSample>& samples,
                             const LossConfig& loss, bool clip_level) {
  const DatasetTensors t = to_tensors(samples);
  if (t.dims != model.head_names())
    throw std::invalid_argument("dataset dimensions do not match the model heads");

  Matrix preds = model.forward(t.features);
  // reported predictions live on the rating scale
  preds = preds.cwiseMax(loss.scale_min).cwiseMin(loss.scale_max);

  std::map<std::string, std::vector<ClipRecord>> per_dim;
  for (std::size_t h = 0; h < t.dims.size(); ++h) {
    auto& records = per_dim[t.dims[h]];
    records.reserve(samples.size());
    for (Index i = 0; i < t.targets.rows(); ++i)
      records.push_back({t.system_ids[static_cast<std::size_t>(i)],
                         t.targets(i, static_cast<Index>(h)),
                         preds(i, static_cast<Index>(h))});
  }
  return clip_level ? clip_level_report(per_dim) : system_level_report(per_dim);
}

std::string variant_name(AblationVariant v) {
  switch (v) {
    case AblationVariant::kQamro: return "qamro";
    case AblationVariant::kNoWeighting: return "no_weighting";
    case AblationVariant::kFixedMargin: return "fixed_margin";
    case AblationVariant::kRegressionOnly: return "regression_only";
  }
  return "?";
}

TrainConfig apply_variant(TrainConfig base, AblationVariant v) {
  switch (v) {
    case AblationVariant::kQamro:
      base.objective = RankingObjective::kAdaptive;
      break;
    case AblationVariant::kNoWeighting:
      base.objective = RankingObjective::kAdaptive;
      base.loss.beta = 1.0;
      break;
    case AblationVariant::kFixedMargin:
      base.objective = RankingObjective::kFixedMargin;
      base.loss.beta = 1.0;
      break;
    case AblationVariant::kRegressionOnly:
      base.objective = RankingObjective::kNone;
      base.loss.lambda_rank = 0.0;
      break;
  }
  return base;
}

namespace {

const std::pair<const char*, double DimensionMetrics::*> kMetricFields[] = {
    {"mse", &DimensionMetrics::mse},
    {"lcc", &DimensionMetrics::lcc},
    {"srcc", &DimensionMetrics::srcc},
    {"ktau", &DimensionMetrics::ktau},
};

}  // namespace

std::vector<AblationRow> run_ablation(const std::vector<RatedSample>& samples,
                                      const RunConfig& base,
                                      const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("at least one seed required");
  std::vector<AblationRow> rows;
  for (const AblationVariant v : kAllVariants) {
    RunConfig cfg = base;
    cfg.train = apply_variant(base.train, v);
    for (const std::uint64_t seed : seeds) {
      const RunOutcome outcome = train_and_evaluate(samples, cfg, seed);
      for (const auto& [dim, metrics] : outcome.metrics.per_dimension)
        for (const auto& [name, field] : kMetricFields)
          rows.push_back({variant_name(v), seed, dim, name, metrics.*field});
    }
  }
  return rows;
}

std::vector<SweepRow> run_beta_sweep(const std::vector<RatedSample>& samples,
                                     const RunConfig& base,
                                     const std::vector<double>& betas,
                                     const std::vector<std::uint64_t>& seeds) {
  if (betas.empty()) throw std::invalid_argument("at least one beta required");
  if (seeds.empty()) throw std::invalid_argument("at least one seed required");
  for (const double b : betas)
    if (!(b >= 1.0)) throw std::invalid_argument("beta values must be >= 1");

  std::vector<SweepRow> rows;
  for (const double beta : betas) {
    RunConfig cfg = base;
    cfg.train.objective = RankingObjective::kAdaptive;
    cfg.train.loss.beta = beta;
    for (const std::uint64_t seed : seeds) {
      const RunOutcome outcome = train_and_evaluate(samples, cfg, seed);
      for (const auto& [dim, metrics] : outcome.metrics.per_dimension)
        for (const auto& [name, field] : kMetricFields)
          rows.push_back({beta, seed, dim, name, metrics.*field});
    }
  }
  return rows;
}

void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows) {
  os << "variant,seed,dimension,metric,value\n";
  for (const auto& r : rows)
    os << r.variant << ',' << r.seed << ',' << csv_field(r.dimension) << ','
       << r.metric << ',' << format_double(r.value) << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "beta,seed,dimension,metric,value\n";
  for (const auto& r : rows)
    os << format_double(r.beta) << ',' << r.seed << ',' << csv_field(r.dimension)
       << ',' << r.metric << ',' << format_double(r.value) << '\n';
}

void write_train_log_csv(std::ostream& os, const TrainLog& log,
                         const std::vector<std::string>& dims) {
  os << "epoch,train_total,train_huber";
  for (const auto& d : dims) os << ",train_rank_" << csv_field(d);
  os << ",val_total\n";
  for (std::size_t e = 0; e < log.epochs.size(); ++e) {
    const EpochRecord& rec = log.epochs[e];
    os << (e + 1) << ',' << format_double(rec.train_total) << ','
       << format_double(rec.train_huber);
    for (const double r : rec.train_rank) os << ',' << format_double(r);
    os << ',' << format_double(rec.val_total) << '\n';
  }
}

}  // namespace qamro
