#include <doctest.h>

#include <algorithm>
#include <random>

#include "qamro/pairing.hpp"

using qamro::build_pair_set;
using qamro::normalize_scores;
using qamro::PairSet;
using qamro::Vector;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<qamro::Index>(values.size()));
  qamro::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("pair set of a singleton batch is empty") {
  const PairSet p = build_pair_set(vec({3.0}));
  CHECK(p.empty());
  CHECK(build_pair_set(Vector()).empty());
}

TEST_CASE("distinct scores produce all n(n-1)/2 pairs with consistent signs") {
  const Vector y = vec({1.0, 2.0, 3.0});
  const PairSet p = build_pair_set(y);
  REQUIRE(p.size() == 3);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto [i, j] = p.indices[k];
    CHECK(i < j);
    CHECK(p.signs[k] * (y[i] - y[j]) > 0.0);
    CHECK(p.gaps[k] == std::abs(y[i] - y[j]));
  }
}

TEST_CASE("tied scores are excluded") {
  const PairSet p = build_pair_set(vec({2.0, 2.0, 5.0}));
  REQUIRE(p.size() == 2);
  CHECK(p.indices[0] == std::pair<qamro::Index, qamro::Index>(0, 2));
  CHECK(p.indices[1] == std::pair<qamro::Index, qamro::Index>(1, 2));
  CHECK(p.signs[0] == -1.0);
  CHECK(p.gaps[0] == 3.0);
}

TEST_CASE("tie tolerance separates near-equal from distinct") {
  CHECK(build_pair_set(vec({1.0, 1.0 + 5e-10})).empty());
  CHECK(build_pair_set(vec({1.0, 1.0 + 5e-9})).size() == 1);
}

TEST_CASE("pair count matches n(n-1)/2 for random distinct batches") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 14);
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = u(rng);  // ties have measure zero
    CHECK(build_pair_set(y).size() ==
          static_cast<std::size_t>(n * (n - 1) / 2));
  }
}

TEST_CASE("pair set is permutation invariant up to relabeling") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 8);
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = u(rng);

    std::vector<qamro::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Vector yp(n);
    for (int i = 0; i < n; ++i) yp[perm[static_cast<std::size_t>(i)]] = y[i];

    const PairSet a = build_pair_set(y);
    const PairSet b = build_pair_set(yp);
    REQUIRE(a.size() == b.size());

    // each original pair must appear in the permuted set, sign adjusted
    // for the possible index swap
    for (std::size_t k = 0; k < a.size(); ++k) {
      const auto [i, j] = a.indices[k];
      qamro::Index pi = perm[static_cast<std::size_t>(i)];
      qamro::Index pj = perm[static_cast<std::size_t>(j)];
      double expected_sign = a.signs[k];
      if (pi > pj) {
        std::swap(pi, pj);
        expected_sign = -expected_sign;
      }
      const auto it = std::find(b.indices.begin(), b.indices.end(),
                                std::make_pair(pi, pj));
      REQUIRE(it != b.indices.end());
      const auto pos = static_cast<std::size_t>(it - b.indices.begin());
      CHECK(b.signs[pos] == expected_sign);
      CHECK(b.gaps[pos] == a.gaps[k]);
    }
  }
}

TEST_CASE("normalize_scores maps the scale onto the unit interval") {
  const Vector n1 = normalize_scores(vec({1.0, 5.0}), 1.0, 5.0);
  CHECK(n1[0] == 0.0);
  CHECK(n1[1] == 1.0);
  CHECK(normalize_scores(vec({3.0}), 1.0, 5.0)[0] == 0.5);

  const Vector n2 = normalize_scores(vec({4.5, 2.5}), 1.0, 5.0);
  CHECK(n2[0] == 0.875);
  CHECK(n2[1] == 0.375);
}

TEST_CASE("normalize_scores preserves order") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  Vector y(20);
  for (int i = 0; i < 20; ++i) y[i] = u(rng);
  const Vector n = normalize_scores(y, 1.0, 5.0);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j)
      CHECK((y[i] < y[j]) == (n[i] < n[j]));
}

TEST_CASE("normalize_scores rejects out-of-range values naming the index") {
  CHECK_THROWS_WITH_AS(normalize_scores(vec({2.0, 5.5}), 1.0, 5.0),
                       doctest::Contains("index 1"), std::domain_error);
  CHECK_THROWS_AS(normalize_scores(vec({0.5}), 1.0, 5.0), std::domain_error);
  CHECK_THROWS_AS(normalize_scores(vec({2.0}), 5.0, 1.0),
                  std::invalid_argument);
}
