#pragma once

#include <utility>
#include <vector>

#include "qamro/types.hpp"

namespace qamro {

/// Ordering sign used by the ranking losses: +1 for x > 0, otherwise -1.
/// Tied pairs never reach this on ground truth, they are dropped earlier.
inline double ordering_sign(double x) { return x > 0.0 ? 1.0 : -1.0; }

/// All index pairs of a mini-batch whose ground-truth scores differ,
/// with the ordering sign and the absolute score gap cached per pair.
struct PairSet {
  std::vector<std::pair<Index, Index>> indices;  ///< stored with i < j
  Vector signs;  ///< sign(y_i - y_j), one of +1 / -1
  Vector gaps;   ///< |y_i - y_j|

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

PairSet build_pair_set(const Eigen::Ref<const Vector>& y_true,
                       double tie_tolerance = kTieTolerance);

/// Min-max normalization against fixed scale bounds; result lies in [0, 1].
/// Throws std::domain_error naming the first out-of-range index.
Vector normalize_scores(const Eigen::Ref<const Vector>& y, double scale_min,
                        double scale_max);

}  // namespace qamro
