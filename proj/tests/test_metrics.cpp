#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "qamro/metrics.hpp"

using qamro::aggregate_by_system;
using qamro::average_ranks;
using qamro::ClipRecord;
using qamro::ktau;
using qamro::lcc;
using qamro::mse;
using qamro::srcc;
using qamro::Vector;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<qamro::Index>(values.size()));
  qamro::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Reference rank: 1 + #smaller + half the other equal entries. Quadratic but
// obviously correct, which is the point.
Vector ranks_by_counting(const Vector& v) {
  const auto n = v.size();
  Vector r(n);
  for (qamro::Index i = 0; i < n; ++i) {
    double less = 0.0, equal = 0.0;
    for (qamro::Index j = 0; j < n; ++j) {
      if (v[j] < v[i]) ++less;
      if (v[j] == v[i]) ++equal;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

// Reference tau-b straight from the definition, O(n^2).
double ktau_by_pairs(const Vector& a, const Vector& b) {
  const auto n = a.size();
  double concordant = 0.0, discordant = 0.0;
  double tied_a = 0.0, tied_b = 0.0;  // pairs tied in a / in b (both counts in each)
  for (qamro::Index i = 0; i < n; ++i) {
    for (qamro::Index j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0) ++tied_a;
      if (db == 0.0) ++tied_b;
      if (da * db > 0.0) ++concordant;
      if (da * db < 0.0) ++discordant;
    }
  }
  const double n0 = static_cast<double>(n) * (n - 1) / 2.0;
  const double denom = std::sqrt((n0 - tied_a) * (n0 - tied_b));
  return (concordant - discordant) / denom;
}

Vector random_vector(std::mt19937_64& rng, int n, bool with_ties) {
  Vector v(n);
  if (with_ties) {
    std::uniform_int_distribution<int> levels(0, 4);
    for (int i = 0; i < n; ++i) v[i] = 1.0 + levels(rng);
  } else {
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
  }
  return v;
}

bool is_constant(const Vector& v) {
  return (v.array() == v[0]).all();
}

}  // namespace

TEST_CASE("mse hand values") {
  CHECK(mse(vec({1.0, 2.0}), vec({1.0, 2.0})) == 0.0);
  CHECK(mse(vec({0.0, 0.0}), vec({1.0, 3.0})) == 5.0);
  CHECK_THROWS_AS(mse(Vector(), Vector()), std::domain_error);
  CHECK_THROWS_AS(mse(vec({1.0}), vec({1.0, 2.0})), std::invalid_argument);
}

TEST_CASE("lcc detects exact linear relationships") {
  const Vector x = vec({1.0, 2.0, 3.0, 4.0});
  CHECK(lcc(x, vec({2.0, 4.0, 6.0, 8.0})) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lcc(x, vec({5.0, 4.0, 3.0, 2.0})) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS_AS(lcc(x, vec({3.0, 3.0, 3.0, 3.0})), std::domain_error);
  CHECK_THROWS_AS(lcc(vec({1.0}), vec({1.0})), std::domain_error);
}

TEST_CASE("average ranks handle ties by averaging") {
  const Vector r = average_ranks(vec({3.0, 1.0, 3.0, 2.0}));
  CHECK(r[0] == 3.5);
  CHECK(r[1] == 1.0);
  CHECK(r[2] == 3.5);
  CHECK(r[3] == 2.0);
}

TEST_CASE("srcc hand value with a tie") {
  // ranks of [1,2,2,3] are [1, 2.5, 2.5, 4]; pearson with [1,2,3,4]
  const double expected = 4.5 / std::sqrt(22.5);
  CHECK(srcc(vec({1.0, 2.0, 3.0, 4.0}), vec({1.0, 2.0, 2.0, 3.0})) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("srcc matches counting-rank oracle on random data") {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 25);
    Vector a = random_vector(rng, n, rep % 2 == 0);
    Vector b = random_vector(rng, n, rep % 3 == 0);
    if (is_constant(a) || is_constant(b)) continue;
    const double expected = lcc(ranks_by_counting(a), ranks_by_counting(b));
    CHECK(srcc(a, b) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("ktau hand values") {
  CHECK(ktau(vec({1.0, 2.0, 3.0}), vec({1.0, 2.0, 3.0})) == 1.0);
  CHECK(ktau(vec({1.0, 2.0, 3.0}), vec({3.0, 2.0, 1.0})) == -1.0);
  CHECK(ktau(vec({1.0, 2.0, 3.0}), vec({1.0, 2.0, 2.0})) ==
        doctest::Approx(2.0 / std::sqrt(6.0)).epsilon(1e-12));
}

TEST_CASE("ktau matches the pairwise oracle on random data with ties") {
  std::mt19937_64 rng(103);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 25);
    Vector a = random_vector(rng, n, true);
    Vector b = random_vector(rng, n, rep % 2 == 0);
    if (is_constant(a) || is_constant(b)) continue;
    CHECK(ktau(a, b) ==
          doctest::Approx(ktau_by_pairs(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("rank correlations are symmetric and transform invariant") {
  std::mt19937_64 rng(107);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 12);
    Vector a = random_vector(rng, n, true);
    Vector b = random_vector(rng, n, false);
    if (is_constant(a) || is_constant(b)) continue;
    CHECK(srcc(a, b) == doctest::Approx(srcc(b, a)).epsilon(1e-12));
    CHECK(ktau(a, b) == doctest::Approx(ktau(b, a)).epsilon(1e-12));
    // strictly increasing transform of either argument changes nothing
    const Vector bt = (b.array() * 3.0 + 1.0).exp();
    CHECK(srcc(a, bt) == doctest::Approx(srcc(a, b)).epsilon(1e-12));
    CHECK(ktau(a, bt) == doctest::Approx(ktau(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("correlations refuse constant input") {
  const Vector c = vec({2.0, 2.0, 2.0});
  const Vector x = vec({1.0, 2.0, 3.0});
  CHECK_THROWS_AS(srcc(c, x), std::domain_error);
  CHECK_THROWS_AS(ktau(x, c), std::domain_error);
}

TEST_CASE("system aggregation averages clips per system") {
  std::vector<ClipRecord> clips = {
      {"sysB", 4.0, 3.8}, {"sysA", 2.0, 2.5}, {"sysB", 4.4, 4.0},
      {"sysA", 2.2, 2.1}, {"sysC", 3.0, 3.0},
  };
  const auto aggs = aggregate_by_system(clips);
  REQUIRE(aggs.size() == 3);
  CHECK(aggs[0].system_id == "sysA");
  CHECK(aggs[0].mean_true == doctest::Approx(2.1).epsilon(1e-15));
  CHECK(aggs[0].mean_pred == doctest::Approx(2.3).epsilon(1e-15));
  CHECK(aggs[0].clip_count == 2);
  CHECK(aggs[1].system_id == "sysB");
  CHECK(aggs[1].mean_true == doctest::Approx(4.2).epsilon(1e-15));
  CHECK(aggs[2].system_id == "sysC");
  CHECK(aggs[2].clip_count == 1);
}

TEST_CASE("system aggregation is bit-exact under input reordering") {
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  std::vector<ClipRecord> clips;
  for (int s = 0; s < 6; ++s)
    for (int c = 0; c < 17; ++c)
      clips.push_back({"sys" + std::to_string(s), u(rng), u(rng)});

  const auto base = aggregate_by_system(clips);
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(clips.begin(), clips.end(), rng);
    const auto shuffled = aggregate_by_system(clips);
    REQUIRE(shuffled.size() == base.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
      CHECK(shuffled[k].system_id == base[k].system_id);
      // not Approx: summation order inside a system must not matter at all
      CHECK(shuffled[k].mean_true == base[k].mean_true);
      CHECK(shuffled[k].mean_pred == base[k].mean_pred);
    }
  }
}

TEST_CASE("aggregation rejects empty input") {
  CHECK_THROWS_AS(aggregate_by_system({}), std::domain_error);
}

TEST_CASE("system level report computes metrics over system means") {
  std::map<std::string, std::vector<ClipRecord>> per_dim;
  per_dim["MI"] = {
      {"s1", 1.0, 1.2}, {"s1", 1.4, 1.4}, {"s2", 3.0, 2.8},
      {"s2", 3.2, 3.0}, {"s3", 4.6, 4.4}, {"s3", 4.8, 4.8},
  };
  const auto report = qamro::system_level_report(per_dim);
  CHECK(report.n_systems == 3);
  REQUIRE(report.per_dimension.count("MI") == 1);
  const auto& m = report.per_dimension.at("MI");
  // three system means in strictly increasing order on both sides
  CHECK(m.srcc == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.ktau == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.mse > 0.0);
}

TEST_CASE("metrics csv has a fixed schema and row order") {
  std::map<std::string, std::vector<ClipRecord>> per_dim;
  per_dim["TA"] = {{"s1", 1.0, 1.1}, {"s2", 3.0, 2.9}, {"s3", 4.0, 4.2}};
  per_dim["MI"] = {{"s1", 1.5, 1.4}, {"s2", 2.5, 2.6}, {"s3", 4.5, 4.4}};
  const auto report = qamro::system_level_report(per_dim);
  std::ostringstream os;
  qamro::write_metrics_csv(os, report);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "dimension,metric,value,n_systems");
  std::vector<std::string> rest;
  while (std::getline(is, line)) rest.push_back(line);
  REQUIRE(rest.size() == 8);
  // dimensions alphabetical, metrics in declaration order within each
  CHECK(rest[0].rfind("MI,mse,", 0) == 0);
  CHECK(rest[1].rfind("MI,lcc,", 0) == 0);
  CHECK(rest[2].rfind("MI,srcc,", 0) == 0);
  CHECK(rest[3].rfind("MI,ktau,", 0) == 0);
  CHECK(rest[4].rfind("TA,mse,", 0) == 0);
  for (const auto& row : rest) CHECK(row.substr(row.size() - 2) == ",3");
}
