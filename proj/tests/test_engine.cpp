#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "aloft/engine.hpp"
#include "aloft/errors.hpp"
#include "aloft/mc.hpp"
#include "aloft/rng.hpp"
#include "test_helpers.hpp"

using namespace aloft;
using aloft_test::random_design;
using aloft_test::random_vector;
using aloft_test::random_weight;

namespace {

TestConfig dyadic_config(std::uint64_t seed, int B = 49) {
  TestConfig cfg;
  cfg.grid = build_grid(0.25, 2.0, 5, true);
  cfg.family.family = SmootherFamily::piecewise;
  cfg.boot.B = B;
  cfg.boot.seed = seed;
  cfg.fit.seed = seed + 1;
  return cfg;
}

// white-noise sample on [0,1] of size n
std::pair<Eigen::MatrixXd, Eigen::VectorXd> noise_sample(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = rng.uniform();
    Y(i) = rng.normal();
  }
  return {X, Y};
}

}  // namespace

TEST_CASE("statistic vanishes on zero residuals") {
  const auto W = random_weight(10, 601);
  CHECK(statistic_Th(W, Eigen::VectorXd::Zero(10)) == 0.0);
}

TEST_CASE("two-point statistic arithmetic") {
  WeightMatrix W;
  W.entries = Eigen::MatrixXd::Zero(2, 2);
  W.entries(0, 1) = W.entries(1, 0) = 0.5;
  Eigen::VectorXd U(2);
  U << 1.0, 1.0;
  CHECK(statistic_Th(W, U) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("statistic agrees with the brute-force quadratic form") {
  for (std::uint64_t seed : {603u, 607u, 613u}) {
    const auto W = random_weight(20, seed);
    const Eigen::VectorXd U = random_vector(20, seed + 7);
    double oracle = 0.0;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j)
        if (i != j) oracle += W.entries(i, j) * U(i) * U(j);
    CHECK(statistic_Th(W, U) == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("selection arithmetic from the contract") {
  using Rows = std::vector<std::pair<double, double>>;
  CHECK(select_h(Rows{{0.5, 3.0}, {0.25, 3.0}}, Rows{{0.5, 0.0}, {0.25, 1.0}},
                 2.0) == 0);
  CHECK(select_h(Rows{{0.5, 0.0}, {0.25, 10.0}}, Rows{{0.5, 0.0}, {0.25, 1.0}},
                 2.0) == 1);
  CHECK(select_h(Rows{{0.5, 0.0}, {0.25, 1.9}}, Rows{{0.5, 0.0}, {0.25, 1.0}},
                 2.0) == 0);
}

TEST_CASE("selection validates its inputs") {
  using Rows = std::vector<std::pair<double, double>>;
  CHECK_THROWS_AS(select_h(Rows{}, Rows{}, 1.0), UsageError);
  CHECK_THROWS_AS(select_h(Rows{{0.5, 1.0}}, Rows{{0.5, 0.5}}, 1.0), UsageError);
  CHECK_THROWS_AS(
      select_h(Rows{{0.5, 1.0}, {0.25, 2.0}}, Rows{{0.5, 0.0}}, 1.0), UsageError);
}

TEST_CASE("selection characterization on random inputs") {
  // selected != baseline exactly when some ratio (T_h - T_h0) / vdiff exceeds gamma
  Rng rng(617);
  using Rows = std::vector<std::pair<double, double>>;
  for (int trial = 0; trial < 200; ++trial) {
    const int J = 2 + static_cast<int>(rng.next_u64() % 5);
    Rows stats(J), pens(J);
    for (int j = 0; j < J; ++j) {
      const double h = std::pow(2.0, -j);
      stats[j] = {h, rng.uniform(-2.0, 4.0)};
      pens[j] = {h, j == 0 ? 0.0 : rng.uniform(0.1, 2.0)};
    }
    const double gamma = rng.uniform(0.5, 3.0);
    const int sel = select_h(stats, pens, gamma);
    bool beats = false;
    for (int j = 1; j < J; ++j)
      if ((stats[j].second - stats[0].second) / pens[j].second > gamma) beats = true;
    CHECK((sel != 0) == beats);
  }
}

TEST_CASE("gamma_n follows the grid size") {
  TestConfig cfg = dyadic_config(1);
  CHECK(cfg.gamma_n() == doctest::Approx(std::sqrt(2.0 * std::log(5.0))).epsilon(1e-12));
  cfg.c = 1.5;
  CHECK(cfg.gamma_n() ==
        doctest::Approx(1.5 * std::sqrt(2.0 * std::log(5.0))).epsilon(1e-12));
  cfg.grid = build_grid(0.5, 2.0, 1, true);
  CHECK_THROWS_AS(cfg.gamma_n(), UsageError);
}

TEST_CASE("normal quantile at the usual levels") {
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-9));
  CHECK(normal_quantile(0.98) == doctest::Approx(2.0537489106318225).epsilon(1e-9));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(normal_quantile(0.05) ==
        doctest::Approx(-1.6448536269514722).epsilon(1e-9));
  CHECK_THROWS_AS(normal_quantile(0.0), UsageError);
  CHECK_THROWS_AS(normal_quantile(1.0), UsageError);
}

TEST_CASE("zero-noise null never rejects") {
  const Eigen::MatrixXd X = random_design(60, 1, 619);
  const Eigen::VectorXd Y = (1.0 + 2.0 * X.col(0).array()).matrix();
  ParametricModel m = model_registry("linear", 1);
  TestConfig cfg = dyadic_config(3);
  cfg.grid = build_grid(0.25, 2.0, 3, true);
  TestOutcome out = run_test(X, Y, m, cfg);
  CHECK_FALSE(out.reject);
  for (const auto& row : out.per_h) CHECK(std::abs(row.That) <= 1e-12);
}

TEST_CASE("asymptotic threshold is the normal quantile") {
  auto [X, Y] = noise_sample(80, 631);
  ParametricModel m = model_registry("zero", 1);
  TestConfig cfg = dyadic_config(5);
  cfg.grid = build_grid(0.25, 2.0, 3, true);
  cfg.mode = ThresholdMode::asymptotic;
  TestOutcome out = run_test(X, Y, m, cfg);
  CHECK(out.threshold == doctest::Approx(1.6449).epsilon(1e-4));
  CHECK(out.bootstrap_stats.empty());
  CHECK(out.reject == (out.statistic >= out.threshold));
}

TEST_CASE("outcome is internally consistent") {
  auto [X, Y] = noise_sample(150, 641);
  ParametricModel m = model_registry("zero", 1);
  TestConfig cfg = dyadic_config(7);
  TestOutcome out = run_test(X, Y, m, cfg);

  REQUIRE(out.per_h.size() == 6);
  CHECK(out.h_selected == cfg.grid.values[out.selected_index]);
  CHECK(out.per_h[0].vdiff == 0.0);
  CHECK(out.gamma_n == doctest::Approx(cfg.gamma_n()).epsilon(1e-12));
  // statistic * vhat_h0 recovers the selected raw statistic
  CHECK(out.statistic * out.vhat_h0 ==
        doctest::Approx(out.per_h[out.selected_index].That).epsilon(1e-8));
  // stored objectives are the penalized criterion
  for (const auto& row : out.per_h)
    CHECK(row.objective == row.That - out.gamma_n * row.vdiff);
  CHECK(static_cast<int>(out.bootstrap_stats.size()) == cfg.boot.B);
}

TEST_CASE("penalized selection invariants hold on noisy data") {
  ParametricModel m = model_registry("zero", 1);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto [X, Y] = noise_sample(90, 700 + seed);
    TestConfig cfg = dyadic_config(seed);
    cfg.grid = build_grid(0.25, 2.0, 3, true);
    cfg.mode = ThresholdMode::asymptotic;
    TestOutcome out = run_test(X, Y, m, cfg);
    const auto& rows = out.per_h;
    // power bound: objective at the selection dominates the baseline
    CHECK(rows[out.selected_index].objective >= rows[0].objective);
    CHECK(rows[out.selected_index].That >=
          rows[0].That + out.gamma_n * rows[out.selected_index].vdiff);
    // selection characterization
    bool beats = false;
    for (std::size_t j = 1; j < rows.size(); ++j)
      if (rows[j].objective > rows[0].objective) beats = true;
    CHECK((out.selected_index != 0) == beats);
  }
}

TEST_CASE("larger penalty never widens the beating set") {
  ParametricModel m = model_registry("zero", 1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto [X, Y] = noise_sample(150, 800 + seed);
    TestConfig lo = dyadic_config(seed);
    lo.mode = ThresholdMode::asymptotic;
    TestConfig hi = lo;
    hi.c = 2.0;
    TestOutcome a = run_test(X, Y, m, lo);
    TestOutcome b = run_test(X, Y, m, hi);
    for (std::size_t j = 1; j < a.per_h.size(); ++j) {
      const bool beats_hi = b.per_h[j].objective > b.per_h[0].objective;
      const bool beats_lo = a.per_h[j].objective > a.per_h[0].objective;
      if (beats_hi) CHECK(beats_lo);
    }
    if (b.selected_index != 0) CHECK(a.selected_index != 0);
  }
}

TEST_CASE("single-element grid collapses max to the fixed test") {
  auto [X, Y] = noise_sample(64, 821);
  ParametricModel m = model_registry("zero", 1);
  TestConfig cfg = dyadic_config(11);
  cfg.grid.h0 = 0.25;
  cfg.grid.ratio = 2.0;
  cfg.grid.refinements = 0;
  cfg.grid.values = {0.25};
  TestOutcome mx = run_max_test(X, Y, m, cfg);
  TestOutcome fx = run_fixed_h_test(X, Y, m, cfg, 0.25);
  CHECK(mx.statistic == fx.statistic);
  CHECK(mx.threshold == fx.threshold);
  CHECK(mx.reject == fx.reject);
}

TEST_CASE("max statistic is the largest studentized ratio") {
  auto [X, Y] = noise_sample(150, 823);
  ParametricModel m = model_registry("zero", 1);
  TestConfig cfg = dyadic_config(13);
  TestOutcome out = run_max_test(X, Y, m, cfg);
  double best = -1e300;
  for (const auto& row : out.per_h) best = std::max(best, row.That / row.vsingle);
  CHECK(out.statistic == doctest::Approx(best).epsilon(1e-12));
  CHECK(out.per_h[out.selected_index].That / out.per_h[out.selected_index].vsingle ==
        doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("max test requires bootstrap thresholds") {
  auto [X, Y] = noise_sample(60, 827);
  ParametricModel m = model_registry("zero", 1);
  TestConfig cfg = dyadic_config(17);
  cfg.mode = ThresholdMode::asymptotic;
  CHECK_THROWS_AS(run_max_test(X, Y, m, cfg), UsageError);
}

TEST_CASE("fixed bandwidth must sit on the grid") {
  auto [X, Y] = noise_sample(150, 829);
  ParametricModel m = model_registry("zero", 1);
  TestConfig cfg = dyadic_config(19);
  CHECK_THROWS_AS(run_fixed_h_test(X, Y, m, cfg, 0.3), UsageError);
  TestOutcome out = run_fixed_h_test(X, Y, m, cfg, 0.0078125);
  CHECK(out.h_selected == 0.0078125);
  CHECK(out.statistic ==
        doctest::Approx(out.per_h[5].That / out.per_h[5].vsingle).epsilon(1e-12));
}

TEST_CASE("self-normalized test selects like the penalized one") {
  auto [X, Y] = noise_sample(150, 839);
  ParametricModel m = model_registry("zero", 1);
  TestConfig cfg = dyadic_config(23);
  TestOutcome ours = run_test(X, Y, m, cfg);
  TestOutcome self = run_selected_self_normalized(X, Y, m, cfg);
  CHECK(self.selected_index == ours.selected_index);
  if (ours.selected_index == 0) {
    CHECK(self.statistic == ours.statistic);
  } else {
    CHECK(self.statistic ==
          doctest::Approx(ours.per_h[ours.selected_index].That /
                          ours.per_h[ours.selected_index].vsingle)
              .epsilon(1e-12));
  }
}

TEST_CASE("run_variants matches every dedicated runner bit for bit") {
  auto [X, Y] = noise_sample(150, 841);
  ParametricModel m = model_registry("zero", 1);
  TestConfig cfg = dyadic_config(29);

  std::vector<VariantSpec> vs(4);
  vs[0] = {TestKind::penalized, 1.0, 0.0};
  vs[1] = {TestKind::self_normalized, 1.0, 0.0};
  vs[2] = {TestKind::max_studentized, 1.0, 0.0};
  vs[3] = {TestKind::fixed_h, 1.0, 0.25};
  const auto bundle = run_variants(X, Y, m, cfg, vs);
  REQUIRE(bundle.size() == 4);

  const TestOutcome alone[] = {
      run_test(X, Y, m, cfg), run_selected_self_normalized(X, Y, m, cfg),
      run_max_test(X, Y, m, cfg), run_fixed_h_test(X, Y, m, cfg, 0.25)};
  for (int v = 0; v < 4; ++v) {
    CHECK(bundle[v].statistic == alone[v].statistic);
    CHECK(bundle[v].threshold == alone[v].threshold);
    CHECK(bundle[v].selected_index == alone[v].selected_index);
    CHECK(bundle[v].reject == alone[v].reject);
    REQUIRE(bundle[v].bootstrap_stats.size() == alone[v].bootstrap_stats.size());
    for (std::size_t b = 0; b < bundle[v].bootstrap_stats.size(); ++b)
      CHECK(bundle[v].bootstrap_stats[b] == alone[v].bootstrap_stats[b]);
  }
}

TEST_CASE("rejection at other levels reuses the draws monotonically") {
  auto [X, Y] = noise_sample(150, 853);
  ParametricModel m = model_registry("zero", 1);
  TestConfig cfg = dyadic_config(31, 99);
  TestOutcome out = run_test(X, Y, m, cfg);
  if (reject_at(out, 0.02)) CHECK(reject_at(out, 0.05));
  if (!reject_at(out, 0.05)) CHECK_FALSE(reject_at(out, 0.02));
  CHECK(reject_at(out, 1.0));
}

TEST_CASE("narrow samples warn about the finest bandwidths") {
  auto [X, Y] = noise_sample(14, 857);
  ParametricModel m = model_registry("zero", 1);
  TestConfig cfg = dyadic_config(37);
  cfg.grid = build_grid(0.5, 2.0, 2, true);
  cfg.mode = ThresholdMode::asymptotic;
  TestOutcome out = run_test(X, Y, m, cfg);
  REQUIRE_FALSE(out.warnings.empty());
  CHECK(out.warnings[0].find("n/2") != std::string::npos);
}

TEST_CASE("too small a sample for the basis is an error") {
  auto [X, Y] = noise_sample(6, 859);
  ParametricModel m = model_registry("zero", 1);
  TestConfig cfg = dyadic_config(41);
  cfg.grid = build_grid(0.5, 2.0, 3, true);
  CHECK_THROWS_AS(run_test(X, Y, m, cfg), UsageError);
}

TEST_CASE("few bootstrap draws for the level triggers a warning") {
  auto [X, Y] = noise_sample(64, 863);
  ParametricModel m = model_registry("zero", 1);
  TestConfig cfg = dyadic_config(43, 9);
  cfg.grid = build_grid(0.25, 2.0, 3, true);
  cfg.alpha = 0.05;
  TestOutcome out = run_test(X, Y, m, cfg);
  bool found = false;
  for (const auto& w : out.warnings)
    if (w.find("draws") != std::string::npos || w.find("B =") != std::string::npos)
      found = true;
  CHECK(found);
}
