#include <doctest.h>

#include <Eigen/Core>
#include <cmath>

#include "aloft/errors.hpp"
#include "aloft/rng.hpp"
#include "aloft/variance.hpp"
#include "aloft/weights.hpp"
#include "test_helpers.hpp"

using namespace aloft;
using aloft_test::random_design;
using aloft_test::random_weight;

TEST_CASE("local estimator with a full-sample neighborhood") {
  Eigen::MatrixXd X(2, 1);
  X << 0.0, 1.0;
  Eigen::VectorXd Y(2);
  Y << 0.0, 2.0;
  Eigen::VectorXd s2 = local_variance(X, Y, 2.0);
  CHECK(s2(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s2(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("constant response floors the local estimator") {
  const Eigen::MatrixXd X = random_design(15, 1, 401);
  const Eigen::VectorXd Y = Eigen::VectorXd::Constant(15, 4.0);
  Eigen::VectorXd s2 = local_variance(X, Y, 0.5);
  for (int i = 0; i < 15; ++i) CHECK(s2(i) == 1e-10);
}

TEST_CASE("singleton neighborhoods also floor") {
  Eigen::MatrixXd X(3, 1);
  X << 0.0, 0.5, 1.0;
  Eigen::VectorXd Y(3);
  Y << 1.0, -1.0, 1.0;
  Eigen::VectorXd s2 = local_variance(X, Y, 0.3);
  const double var = (Y.array() - Y.mean()).square().mean();
  const double floor = 1e-10 * (1.0 + var);
  for (int i = 0; i < 3; ++i) CHECK(s2(i) == floor);
}

TEST_CASE("local neighborhoods use the sup norm") {
  // points at L_inf distance 0.4 but L_2 distance 0.57: a sup-norm ball of
  // radius 0.45 joins them
  Eigen::MatrixXd X(2, 2);
  X << 0.0, 0.0, 0.4, 0.4;
  Eigen::VectorXd Y(2);
  Y << 0.0, 2.0;
  Eigen::VectorXd joined = local_variance(X, Y, 0.45);
  CHECK(joined(0) == doctest::Approx(1.0).epsilon(1e-14));
  Eigen::VectorXd split = local_variance(X, Y, 0.35);
  CHECK(split(0) < 1e-8);
}

TEST_CASE("rice estimator on a three-point zigzag") {
  Eigen::MatrixXd X(3, 1);
  X << 0.1, 0.5, 0.9;
  Eigen::VectorXd Y(3);
  Y << 1.0, -1.0, 1.0;
  CHECK(rice_variance(X, Y) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("rice ordering follows X, not the row order") {
  Eigen::MatrixXd X(3, 1);
  X << 0.9, 0.1, 0.5;
  Eigen::VectorXd Y(3);
  Y << 1.0, 1.0, -1.0;  // ordered by X: 1, -1, 1
  CHECK(rice_variance(X, Y) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("rice rejects multivariate designs") {
  const Eigen::MatrixXd X = random_design(20, 2, 403);
  const Eigen::VectorXd Y = Eigen::VectorXd::Zero(20);
  CHECK_THROWS_AS(rice_variance(X, Y), UsageError);
}

TEST_CASE("rice is consistent on smooth signal plus unit noise") {
  // the estimator's sd at n = 1000 is about sqrt(3/n) = 0.055, so the 0.1
  // window is a 1.8 sigma event per run; the mean over runs pins the bias
  int hits = 0;
  double mean = 0.0;
  for (int run = 0; run < 20; ++run) {
    Rng rng(500 + run);
    const int n = 1000;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd Y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = rng.uniform();
      Y(i) = std::sin(3.0 * X(i, 0)) + rng.normal();
    }
    const double estimate = rice_variance(X, Y);
    mean += estimate / 20.0;
    if (std::abs(estimate - 1.0) <= 0.1) ++hits;
  }
  CHECK(hits >= 15);
  CHECK(std::abs(mean - 1.0) <= 0.04);
}

TEST_CASE("estimate_variance dispatches and validates") {
  const Eigen::MatrixXd X = random_design(30, 1, 405);
  const Eigen::VectorXd Y = aloft_test::random_vector(30, 407);

  VarianceSpec known;
  known.method = VarianceMethod::known;
  known.known_value = 2.5;
  Eigen::VectorXd s2 = estimate_variance(X, Y, known);
  for (int i = 0; i < 30; ++i) CHECK(s2(i) == 2.5);

  known.known_value = -1.0;
  CHECK_THROWS_AS(estimate_variance(X, Y, known), UsageError);

  VarianceSpec rice;
  rice.method = VarianceMethod::rice;
  s2 = estimate_variance(X, Y, rice);
  CHECK(s2.minCoeff() == s2.maxCoeff());
  CHECK(s2(0) == doctest::Approx(rice_variance(X, Y)).epsilon(1e-14));
}

TEST_CASE("variance spec parsing") {
  CHECK(parse_variance("rice").method == VarianceMethod::rice);
  VarianceSpec local = parse_variance("local:0.2");
  CHECK(local.method == VarianceMethod::local);
  CHECK(local.neighborhood == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(parse_variance("local").neighborhood == doctest::Approx(0.125));
  VarianceSpec known = parse_variance("known:1.5");
  CHECK(known.method == VarianceMethod::known);
  CHECK(known.known_value == doctest::Approx(1.5).epsilon(1e-14));
  CHECK_THROWS_AS(parse_variance("jackknife"), UsageError);
  CHECK_THROWS_AS(parse_variance("local:0"), UsageError);
  CHECK_THROWS_AS(parse_variance("known:-2"), UsageError);
  CHECK_THROWS_AS(parse_variance("local:abc"), UsageError);
}

TEST_CASE("standardization functionals on closed forms") {
  WeightMatrix zero;
  zero.entries = Eigen::MatrixXd::Zero(3, 3);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  CHECK(vhat_single(zero, ones) == 0.0);
  CHECK(vhat_diff(zero, zero, ones) == 0.0);

  WeightMatrix pair;
  pair.entries = Eigen::MatrixXd::Zero(2, 2);
  pair.entries(0, 1) = pair.entries(1, 0) = 0.5;
  const Eigen::VectorXd s2 = Eigen::VectorXd::Ones(2);
  CHECK(vhat_single(pair, s2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(vhat_diff(pair, pair, s2) == 0.0);
}

TEST_CASE("difference functional is exactly zero on identical matrices") {
  WeightMatrix W = random_weight(20, 409);
  const Eigen::VectorXd s2 = aloft_test::random_vector(20, 411, 0.5, 2.0);
  CHECK(vhat_diff(W, W, s2) == 0.0);
}

TEST_CASE("triangle-type bound for the difference functional") {
  for (std::uint64_t seed : {421u, 431u, 433u}) {
    WeightMatrix A = random_weight(15, seed);
    WeightMatrix B = random_weight(15, seed + 1000);
    const Eigen::VectorXd s2 = aloft_test::random_vector(15, seed + 2000, 0.25, 3.0);
    CHECK(vhat_diff(A, B, s2) <= vhat_single(A, s2) + vhat_single(B, s2) + 1e-12);
  }
}

TEST_CASE("scaling sigma squared by c scales every vhat by c") {
  WeightMatrix A = random_weight(12, 439);
  WeightMatrix B = random_weight(12, 443);
  const Eigen::VectorXd s2 = aloft_test::random_vector(12, 449, 0.5, 1.5);
  const double c = 3.7;
  CHECK(vhat_single(A, c * s2) ==
        doctest::Approx(c * vhat_single(A, s2)).epsilon(1e-12));
  CHECK(vhat_diff(A, B, c * s2) ==
        doctest::Approx(c * vhat_diff(A, B, s2)).epsilon(1e-12));
}

TEST_CASE("moments of the residual quadratic form match the variance formula") {
  const int n = 40;
  WeightMatrix W = random_weight(n, 457);
  const Eigen::VectorXd sigma2 = aloft_test::random_vector(n, 461, 0.25, 4.0);
  const Eigen::VectorXd sigma = sigma2.cwiseSqrt();

  double truth = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      truth += 2.0 * W.entries(i, j) * W.entries(i, j) * sigma2(i) * sigma2(j);

  const int N = 20000;
  Rng rng(463);
  Eigen::VectorXd eps(n);
  double sum = 0.0, sumsq = 0.0;
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < n; ++i) eps(i) = sigma(i) * rng.normal();
    const double q = eps.dot(W.entries * eps);
    sum += q;
    sumsq += q * q;
  }
  const double mean = sum / N;
  const double var = sumsq / N - mean * mean;
  const double se = std::sqrt(var / N);
  CHECK(std::abs(mean) <= 3.0 * se);
  CHECK(std::abs(var - truth) <= 0.05 * truth);

  // the estimated standardization sqrt(2 sum w^2 s2 s2) squares to the same formula
  CHECK(vhat_single(W, sigma2) == doctest::Approx(std::sqrt(truth)).epsilon(1e-12));
}
