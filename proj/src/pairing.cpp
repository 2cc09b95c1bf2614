#include "qamro/pairing.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qamro {

PairSet build_pair_set(const Eigen::Ref<const Vector>& y_true,
                       double tie_tolerance) {
  if (!(tie_tolerance >= 0.0))
    throw std::invalid_argument("tie_tolerance must be >= 0");

  PairSet out;
  const Index n = y_true.size();
  std::vector<double> signs;
  std::vector<double> gaps;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double diff = y_true[i] - y_true[j];
      if (std::abs(diff) <= tie_tolerance) continue;
      out.indices.emplace_back(i, j);
      signs.push_back(ordering_sign(diff));
      gaps.push_back(std::abs(diff));
    }
  }
  out.signs = Eigen::Map<const Vector>(signs.data(), static_cast<Index>(signs.size()));
  out.gaps = Eigen::Map<const Vector>(gaps.data(), static_cast<Index>(gaps.size()));
  return out;
}

Vector normalize_scores(const Eigen::Ref<const Vector>& y, double scale_min,
                        double scale_max) {
  if (!(scale_min < scale_max))
    throw std::invalid_argument("scale_min must be smaller than scale_max");
  const double range = scale_max - scale_min;
  Vector out(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    if (!(y[i] >= scale_min && y[i] <= scale_max))
      throw std::domain_error("score out of scale bounds at index " +
                              std::to_string(i));
    out[i] = (y[i] - scale_min) / range;
  }
  return out;
}

}  // namespace qamro
