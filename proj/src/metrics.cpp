#include "qamro/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qamro/csv.hpp"

namespace qamro {

namespace {

void check_same_size(const Eigen::Ref<const Vector>& a,
                     const Eigen::Ref<const Vector>& b, Index min_len) {
  if (a.size() != b.size())
    throw std::invalid_argument("metric inputs must have equal length");
  if (a.size() < min_len)
    throw std::domain_error("metric undefined for fewer than " +
                            std::to_string(min_len) + " points");
}

/// Strict inversions of v, counted by an iterative merge sort.
long long count_inversions(std::vector<double> v) {
  long long inversions = 0;
  const std::size_t n = v.size();
  std::vector<double> buf(n);
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          inversions += static_cast<long long>(mid - i);
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
      std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
                buf.begin() + static_cast<std::ptrdiff_t>(hi),
                v.begin() + static_cast<std::ptrdiff_t>(lo));
    }
  }
  return inversions;
}

long long tied_pairs(const std::vector<double>& sorted) {
  long long total = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const long long t = static_cast<long long>(j - i + 1);
    total += t * (t - 1) / 2;
    i = j + 1;
  }
  return total;
}

}  // namespace

double mse(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  check_same_size(a, b, 1);
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double lcc(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  check_same_size(a, b, 2);
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  const double va = ac.squaredNorm();
  const double vb = bc.squaredNorm();
  if (va == 0.0 || vb == 0.0)
    throw std::domain_error("correlation undefined for a constant vector");
  return ac.dot(bc) / std::sqrt(va * vb);
}

Vector average_ranks(const Eigen::Ref<const Vector>& v) {
  const Index n = v.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index l, Index r) { return v[l] < v[r]; });

  Vector ranks(n);
  Index i = 0;
  while (i < n) {
    Index j = i;
    while (j + 1 < n && v[order[static_cast<std::size_t>(j + 1)]] ==
                            v[order[static_cast<std::size_t>(i)]])
      ++j;
    // positions i..j (0-based) share the mean of ranks i+1..j+1
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Index k = i; k <= j; ++k)
      ranks[order[static_cast<std::size_t>(k)]] = avg;
    i = j + 1;
  }
  return ranks;
}

double srcc(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  check_same_size(a, b, 2);
  return lcc(average_ranks(a), average_ranks(b));
}

double ktau(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  check_same_size(a, b, 2);
  const std::size_t n = static_cast<std::size_t>(a.size());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    if (a[static_cast<Index>(l)] != a[static_cast<Index>(r)])
      return a[static_cast<Index>(l)] < a[static_cast<Index>(r)];
    return b[static_cast<Index>(l)] < b[static_cast<Index>(r)];
  });

  // pairs tied in a, and tied in both, from consecutive runs
  long long t_a = 0, t_ab = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && a[static_cast<Index>(order[j + 1])] ==
                            a[static_cast<Index>(order[i])])
      ++j;
    const long long run = static_cast<long long>(j - i + 1);
    t_a += run * (run - 1) / 2;
    std::size_t k = i;
    while (k <= j) {
      std::size_t m = k;
      while (m + 1 <= j && b[static_cast<Index>(order[m + 1])] ==
                               b[static_cast<Index>(order[k])])
        ++m;
      const long long jrun = static_cast<long long>(m - k + 1);
      t_ab += jrun * (jrun - 1) / 2;
      k = m + 1;
    }
    i = j + 1;
  }

  std::vector<double> b_sorted_by_a(n);
  for (std::size_t k = 0; k < n; ++k)
    b_sorted_by_a[k] = b[static_cast<Index>(order[k])];
  const long long swaps = count_inversions(b_sorted_by_a);

  std::vector<double> b_sorted(b_sorted_by_a);
  std::sort(b_sorted.begin(), b_sorted.end());
  const long long t_b = tied_pairs(b_sorted);

  const long long n0 =
      static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  const long long den_a = n0 - t_a;
  const long long den_b = n0 - t_b;
  if (den_a == 0 || den_b == 0)
    throw std::domain_error("correlation undefined for a constant vector");

  const long long numerator = n0 - t_a - t_b + t_ab - 2 * swaps;
  return static_cast<double>(numerator) /
         std::sqrt(static_cast<double>(den_a) * static_cast<double>(den_b));
}

std::vector<SystemAggregate> aggregate_by_system(
    const std::vector<ClipRecord>& clips) {
  if (clips.empty())
    throw std::domain_error("aggregate_by_system on an empty clip list");

  std::map<std::string, std::vector<std::pair<double, double>>> groups;
  for (const auto& c : clips)
    groups[c.system_id].emplace_back(c.y_true, c.y_pred);

  std::vector<SystemAggregate> out;
  out.reserve(groups.size());
  for (auto& [id, values] : groups) {
    // canonical summation order makes the means independent of input order
    std::sort(values.begin(), values.end());
    double sum_true = 0.0, sum_pred = 0.0;
    for (const auto& [t, p] : values) {
      sum_true += t;
      sum_pred += p;
    }
    const double count = static_cast<double>(values.size());
    out.push_back({id, sum_true / count, sum_pred / count, values.size()});
  }
  return out;
}

namespace {

DimensionMetrics metrics_of(const Vector& truth, const Vector& pred) {
  DimensionMetrics m;
  m.mse = mse(pred, truth);
  m.lcc = lcc(pred, truth);
  m.srcc = srcc(pred, truth);
  m.ktau = ktau(pred, truth);
  return m;
}

}  // namespace

MetricsReport system_level_report(
    const std::map<std::string, std::vector<ClipRecord>>& per_dimension) {
  if (per_dimension.empty())
    throw std::invalid_argument("no dimensions to report on");

  MetricsReport report;
  bool first = true;
  for (const auto& [dim, clips] : per_dimension) {
    const auto aggregates = aggregate_by_system(clips);
    Vector truth(static_cast<Index>(aggregates.size()));
    Vector pred(static_cast<Index>(aggregates.size()));
    for (std::size_t i = 0; i < aggregates.size(); ++i) {
      truth[static_cast<Index>(i)] = aggregates[i].mean_true;
      pred[static_cast<Index>(i)] = aggregates[i].mean_pred;
    }
    if (first) {
      report.n_systems = aggregates.size();
      first = false;
    } else if (report.n_systems != aggregates.size()) {
      throw std::invalid_argument("dimensions disagree on the system set");
    }
    report.per_dimension[dim] = metrics_of(truth, pred);
  }
  return report;
}

MetricsReport clip_level_report(
    const std::map<std::string, std::vector<ClipRecord>>& per_dimension) {
  if (per_dimension.empty())
    throw std::invalid_argument("no dimensions to report on");

  MetricsReport report;
  bool first = true;
  for (const auto& [dim, clips] : per_dimension) {
    Vector truth(static_cast<Index>(clips.size()));
    Vector pred(static_cast<Index>(clips.size()));
    for (std::size_t i = 0; i < clips.size(); ++i) {
      truth[static_cast<Index>(i)] = clips[i].y_true;
      pred[static_cast<Index>(i)] = clips[i].y_pred;
    }
    if (first) {
      report.n_systems = clips.size();
      first = false;
    } else if (report.n_systems != clips.size()) {
      throw std::invalid_argument("dimensions disagree on the clip set");
    }
    report.per_dimension[dim] = metrics_of(truth, pred);
  }
  return report;
}

void write_metrics_csv(std::ostream& os, const MetricsReport& report) {
  os << "dimension,metric,value,n_systems\n";
  for (const auto& [dim, m] : report.per_dimension) {
    const std::pair<const char*, double> items[] = {
        {"mse", m.mse}, {"lcc", m.lcc}, {"srcc", m.srcc}, {"ktau", m.ktau}};
    for (const auto& [name, value] : items) {
      os << csv_field(dim) << ',' << name << ',' << format_double(value) << ','
         << report.n_systems << '\n';
    }
  }
}

}  // namespace qamro
