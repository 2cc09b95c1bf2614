#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "qamro/types.hpp"

namespace qamro {

double mse(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// Pearson correlation. Throws std::domain_error when either input is
/// constant; the value would be undefined and must not leak out as NaN.
double lcc(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// 1-based ranks; tied values share the average of their rank positions.
Vector average_ranks(const Eigen::Ref<const Vector>& v);

/// Spearman correlation: Pearson on average ranks.
double srcc(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// Kendall tau-b with tie corrections in both arguments,
/// (C - D) / sqrt((n0 - t_a) (n0 - t_b)).
double ktau(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

struct ClipRecord {
  std::string system_id;
  double y_true = 0.0;
  double y_pred = 0.0;
};

struct SystemAggregate {
  std::string system_id;
  double mean_true = 0.0;
  double mean_pred = 0.0;
  std::size_t clip_count = 0;
};

/// Per-system means, sorted by system id. The result does not depend on the
/// input order of the clips, not even in the last bit.
std::vector<SystemAggregate> aggregate_by_system(const std::vector<ClipRecord>& clips);

struct DimensionMetrics {
  double mse = 0.0;
  double lcc = 0.0;
  double srcc = 0.0;
  double ktau = 0.0;
};

struct MetricsReport {
  std::map<std::string, DimensionMetrics> per_dimension;
  std::size_t n_systems = 0;  ///< number of aggregated units per metric
};

/// Challenge protocol: average predictions and ground truth per system,
/// then correlate the per-system means.
MetricsReport system_level_report(
    const std::map<std::string, std::vector<ClipRecord>>& per_dimension);

/// Same metrics straight on the clips, for debugging.
MetricsReport clip_level_report(
    const std::map<std::string, std::vector<ClipRecord>>& per_dimension);

/// Schema: dimension,metric,value,n_systems with metrics in the fixed
/// order mse, lcc, srcc, ktau and dimensions sorted.
void write_metrics_csv(std::ostream& os, const MetricsReport& report);

}  // namespace qamro
