#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "qamro/loss.hpp"
#include "qamro/pairing.hpp"

using qamro::build_pair_set;
using qamro::combined_loss;
using qamro::huber_loss;
using qamro::LossConfig;
using qamro::margin_ranking_loss;
using qamro::PairSet;
using qamro::qamro_loss;
using qamro::quality_weight;
using qamro::Vector;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<qamro::Index>(values.size()));
  qamro::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("quality weight hand values") {
  CHECK(quality_weight(0.875, 0.375, 7.0) == 6.25);
  CHECK(quality_weight(1.0, 0.0, 7.0) == 7.0);
  CHECK(quality_weight(0.0, 1.0, 7.0) == 7.0);
  CHECK(quality_weight(0.0, 0.0, 7.0) == 1.0);
}

TEST_CASE("quality weight stays in [1, beta] and is symmetric") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double a = u01(rng), b = u01(rng);
    const double beta = 1.0 + 8.0 * u01(rng);
    const double q = quality_weight(a, b, beta);
    CHECK(q >= 1.0);
    CHECK(q <= beta);
    CHECK(q == quality_weight(b, a, beta));
  }
  // beta = 1 switches the weighting off entirely
  for (int rep = 0; rep < 50; ++rep)
    CHECK(quality_weight(u01(rng), u01(rng), 1.0) == 1.0);
}

TEST_CASE("quality weight grows with the better score") {
  CHECK(quality_weight(0.9, 0.1, 7.0) > quality_weight(0.5, 0.1, 7.0));
  CHECK(quality_weight(0.2, 0.8, 3.0) == quality_weight(0.8, 0.2, 3.0));
}

TEST_CASE("quality weight rejects out-of-domain inputs") {
  CHECK_THROWS_AS(quality_weight(-0.1, 0.5, 7.0), std::domain_error);
  CHECK_THROWS_AS(quality_weight(0.5, 1.1, 7.0), std::domain_error);
  CHECK_THROWS_AS(quality_weight(0.5, 0.5, 0.5), std::domain_error);
}

TEST_CASE("margin ranking loss hand values") {
  // correctly ordered but not separated: loss equals the margin
  {
    const Vector yt = vec({4.0, 2.0});
    const Vector yp = vec({3.0, 3.0});
    const auto out = margin_ranking_loss(yt, yp, build_pair_set(yt), 0.5);
    CHECK(out.value == 0.5);
    CHECK_FALSE(out.degenerate);
  }
  // partially separated in the right direction
  {
    const Vector yt = vec({2.0, 4.0});
    const Vector yp = vec({3.0, 3.2});
    const auto out = margin_ranking_loss(yt, yp, build_pair_set(yt), 0.5);
    CHECK(out.value == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(out.grad[0] == 1.0);
    CHECK(out.grad[1] == -1.0);
  }
  // separated beyond the margin: inactive
  {
    const Vector yt = vec({2.0, 4.0});
    const Vector yp = vec({1.0, 4.0});
    const auto out = margin_ranking_loss(yt, yp, build_pair_set(yt), 0.5);
    CHECK(out.value == 0.0);
    CHECK(out.grad.isZero(0.0));
  }
}

TEST_CASE("empty pair set flags a degenerate batch instead of throwing") {
  const Vector yt = vec({3.0, 3.0});
  const Vector yp = vec({2.0, 4.0});
  const auto mr = margin_ranking_loss(yt, yp, build_pair_set(yt), 0.5);
  CHECK(mr.value == 0.0);
  CHECK(mr.degenerate);
  CHECK(mr.grad.size() == 2);
  CHECK(mr.grad.isZero(0.0));

  const auto q = qamro_loss(yt, yp, build_pair_set(yt), LossConfig{});
  CHECK(q.value == 0.0);
  CHECK(q.degenerate);
}

TEST_CASE("adaptive margin loss hand value") {
  const Vector yt = vec({4.5, 2.5});
  const Vector yp = vec({4.0, 3.9});
  LossConfig cfg;  // alpha 0.2, beta 7, scale [1, 5]
  const auto out = qamro_loss(yt, yp, build_pair_set(yt), cfg);
  CHECK(out.value == doctest::Approx(1.875).epsilon(1e-12));
  CHECK(out.grad[0] == doctest::Approx(-6.25).epsilon(1e-12));
  CHECK(out.grad[1] == doctest::Approx(6.25).epsilon(1e-12));
}

TEST_CASE("adaptive margin loss is zero exactly when every pair has slack") {
  const Vector yt = vec({4.0, 2.0});
  LossConfig cfg;
  cfg.alpha = 0.25;  // 0.25 * gap 2.0 = 0.5, exact in binary
  const PairSet pairs = build_pair_set(yt);

  // exactly at the required slack: hinge inactive
  const auto at = qamro_loss(yt, vec({3.5, 3.0}), pairs, cfg);
  CHECK(at.value == 0.0);
  CHECK(at.grad.isZero(0.0));

  // a hair less slack: strictly positive
  const auto just_under = qamro_loss(yt, vec({3.5 - 1e-6, 3.0}), pairs, cfg);
  CHECK(just_under.value > 0.0);
}

TEST_CASE("beta = 1 reduces the adaptive loss to plain ranking with m = alpha*gap") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> level(1.0, 5.0);
  std::uniform_real_distribution<double> pred(0.0, 6.0);
  for (int rep = 0; rep < 100; ++rep) {
    // two distinct ground-truth levels so every usable pair shares one gap
    const double a = level(rng);
    double b = level(rng);
    while (std::abs(a - b) <= 1e-3) b = level(rng);

    const int n = 4 + static_cast<int>(rng() % 6);
    Vector yt(n), yp(n);
    for (int i = 0; i < n; ++i) {
      yt[i] = (rng() % 2 == 0) ? a : b;
      yp[i] = pred(rng);
    }
    const PairSet pairs = build_pair_set(yt);
    if (pairs.empty()) continue;

    LossConfig cfg;
    cfg.beta = 1.0;
    // same product as the adaptive margin computes internally
    const double m = cfg.alpha * pairs.gaps[0];
    const auto adaptive = qamro_loss(yt, yp, pairs, cfg);
    const auto plain = margin_ranking_loss(yt, yp, pairs, m);
    CHECK(adaptive.value == plain.value);
    CHECK((adaptive.grad - plain.grad).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("ranking losses are invariant to shifting all predictions") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 5;
    Vector yt(n), yp(n);
    for (int i = 0; i < n; ++i) {
      yt[i] = u(rng);
      yp[i] = u(rng);
    }
    const PairSet pairs = build_pair_set(yt);
    const Vector shifted = yp.array() + 2.75;

    LossConfig cfg;
    const auto q0 = qamro_loss(yt, yp, pairs, cfg);
    const auto q1 = qamro_loss(yt, shifted, pairs, cfg);
    CHECK(q0.value == doctest::Approx(q1.value).epsilon(1e-12));
    CHECK((q0.grad - q1.grad).lpNorm<Eigen::Infinity>() < 1e-12);

    const auto m0 = margin_ranking_loss(yt, yp, pairs, 0.5);
    const auto m1 = margin_ranking_loss(yt, shifted, pairs, 0.5);
    CHECK(m0.value == doctest::Approx(m1.value).epsilon(1e-12));
  }
}

TEST_CASE("losses are equivariant under permuting the batch") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 6;
    Vector yt(n), yp(n);
    for (int i = 0; i < n; ++i) {
      yt[i] = u(rng);
      yp[i] = u(rng);
    }
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Vector ytp(n), ypp(n);
    for (int i = 0; i < n; ++i) {
      ytp[perm[static_cast<std::size_t>(i)]] = yt[i];
      ypp[perm[static_cast<std::size_t>(i)]] = yp[i];
    }

    LossConfig cfg;
    const auto orig = qamro_loss(yt, yp, build_pair_set(yt), cfg);
    const auto perm_out = qamro_loss(ytp, ypp, build_pair_set(ytp), cfg);
    CHECK(orig.value == doctest::Approx(perm_out.value).epsilon(1e-12));
    for (int i = 0; i < n; ++i)
      CHECK(orig.grad[i] ==
            doctest::Approx(perm_out.grad[perm[static_cast<std::size_t>(i)]])
                .epsilon(1e-12));
  }
}

TEST_CASE("adaptive loss rejects ground truth outside the scale") {
  const Vector yt = vec({0.5, 4.0});
  const Vector yp = vec({3.0, 3.0});
  CHECK_THROWS_AS(qamro_loss(yt, yp, build_pair_set(yt), LossConfig{}),
                  std::domain_error);
}

TEST_CASE("huber hand values") {
  CHECK(huber_loss(vec({0.0}), vec({0.5}), 1.0).value == 0.125);
  CHECK(huber_loss(vec({0.0}), vec({2.0}), 1.0).value == 1.5);
  CHECK(huber_loss(vec({1.0, 2.0}), vec({1.0, 2.0}), 1.0).value == 0.0);
  // gradient continuity at the crossover: both branches give r/n there
  const auto at = huber_loss(vec({0.0}), vec({1.0}), 1.0);
  CHECK(at.grad[0] == 1.0);
}

TEST_CASE("huber rejects an empty batch and a bad delta") {
  CHECK_THROWS_AS(huber_loss(Vector(), Vector(), 1.0), std::domain_error);
  CHECK_THROWS_AS(huber_loss(vec({1.0}), vec({1.0}), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(huber_loss(vec({1.0}), vec({1.0, 2.0}), 1.0),
                  std::invalid_argument);
}

TEST_CASE("combined loss with lambda 0 equals huber bit for bit") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 6);
    Vector yt(n), yp(n);
    for (int i = 0; i < n; ++i) {
      yt[i] = u(rng);
      yp[i] = u(rng);
    }
    LossConfig cfg;
    cfg.lambda_rank = 0.0;
    const auto comb = combined_loss(yt, yp, build_pair_set(yt), cfg);
    const auto hub = huber_loss(yt, yp, cfg.huber_delta);
    CHECK(comb.value == hub.value);
    CHECK((comb.grad - hub.grad).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(comb.ranking_value == 0.0);
  }
}

TEST_CASE("combined loss is the weighted sum of its components") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 4;
    Vector yt(n), yp(n);
    for (int i = 0; i < n; ++i) {
      yt[i] = u(rng);
      yp[i] = u(rng);
    }
    LossConfig cfg;
    cfg.lambda_rank = 0.25 + 2.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const PairSet pairs = build_pair_set(yt);
    const auto comb = combined_loss(yt, yp, pairs, cfg);
    const auto hub = huber_loss(yt, yp, cfg.huber_delta);
    const auto rank = qamro_loss(yt, yp, pairs, cfg);
    CHECK(comb.value ==
          doctest::Approx(hub.value + cfg.lambda_rank * rank.value)
              .epsilon(1e-15));
    CHECK(comb.huber_value == hub.value);
    CHECK(comb.ranking_value == rank.value);
  }
}

TEST_CASE("combined loss on a batch with hand-computed components") {
  // residuals are -0.95 and +0.95; delta solves delta^2 - 1.9 delta + 0.25 = 0
  // so the huber side comes out at 0.125 while the ranking side is the
  // 6.25 * 0.3 = 1.875 configuration; together exactly 2.
  const double delta = 0.5 * (1.9 - std::sqrt(1.9 * 1.9 - 4.0 * 0.25));
  const Vector yt = vec({4.5, 2.5});
  const Vector yp = vec({3.55, 3.45});
  LossConfig cfg;
  cfg.huber_delta = delta;
  const auto out = combined_loss(yt, yp, build_pair_set(yt), cfg);
  CHECK(out.huber_value == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(out.ranking_value == doctest::Approx(1.875).epsilon(1e-12));
  CHECK(out.value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("loss config validation") {
  LossConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.beta = 0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = LossConfig{};
  cfg.alpha = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = LossConfig{};
  cfg.huber_delta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = LossConfig{};
  cfg.scale_min = 5.0;
  cfg.scale_max = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
