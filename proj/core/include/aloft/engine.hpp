#ifndef ALOFT_ENGINE_HPP
#define ALOFT_ENGINE_HPP

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "aloft/bootstrap.hpp"
#include "aloft/grid.hpp"
#include "aloft/model.hpp"
#include "aloft/variance.hpp"
#include "aloft/weights.hpp"

namespace aloft {

enum class ThresholdMode { asymptotic, bootstrap };

struct TestConfig {
  SmootherGrid grid;
  FamilySpec family;
  double c = 1.0;       // penalty multiplier
  double alpha = 0.05;  // nominal level, in (0,1)
  VarianceSpec variance;
  ThresholdMode mode = ThresholdMode::bootstrap;
  BootstrapConfig boot;
  FitOptions fit;
  int jobs = 1;  // worker threads for the bootstrap loop

  // gamma_n = c * sqrt(2 ln Jn) with Jn = number of refinements. Requires
  // Jn >= 2 so the log is positive.
  double gamma_n() const;
};

enum class TestKind { penalized, self_normalized, max_studentized, fixed_h };

const char* test_kind_name(TestKind kind);

// One test statistic definition evaluated on the shared per-bandwidth rows.
struct VariantSpec {
  TestKind kind = TestKind::penalized;
  double c = 1.0;      // penalized / self_normalized selection penalty
  double fixed_h = 0;  // fixed_h only; must be a grid value
};

struct PerHRow {
  double h = 0;
  double That = 0;       // U'WU
  double vdiff = 0;      // vhat_{h,h0}; exactly 0 at h0
  double vsingle = 0;    // vhat_h
  double objective = 0;  // That - gamma_n * vdiff (gamma 0 for unpenalized kinds)
};

struct TestOutcome {
  TestKind kind = TestKind::penalized;
  std::vector<PerHRow> per_h;  // grid order, coarsest first
  int selected_index = 0;
  double h_selected = 0;
  double statistic = 0;
  double threshold = 0;
  bool reject = false;
  double vhat_h0 = 0;
  double gamma_n = 0;  // 0 for unpenalized kinds
  Eigen::VectorXd theta_hat;
  std::vector<double> bootstrap_stats;  // empty in asymptotic mode
  std::vector<std::string> warnings;
};

// Quantile of the standard normal at probability p in (0,1).
double normal_quantile(double p);

// U'WU, i.e. sum over i != j of w_ij U_i U_j (the diagonal is zero by the
// weight-matrix invariant).
double statistic_Th(const WeightMatrix& W, const Eigen::VectorXd& U);

// Index of the penalized argmax of That - gamma_n * penalty over aligned
// (h, That) and (h, vhat_{h,h0}) lists. Ties resolve to the earliest entry,
// which is the largest bandwidth in grid order. The penalty of the first
// entry must be exactly zero.
int select_h(const std::vector<std::pair<double, double>>& stats,
             const std::vector<std::pair<double, double>>& penalties,
             double gamma_n);

// The data-driven test: select the bandwidth by the penalized rule, then
// compare That_selected / vhat_h0 to the configured threshold.
TestOutcome run_test(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                     const ParametricModel& model, const TestConfig& cfg);

// Comparator: max over the grid of That / vhat_h. Bootstrap mode only.
TestOutcome run_max_test(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                         const ParametricModel& model, const TestConfig& cfg);

// Comparator: That / vhat_h at one fixed grid bandwidth.
TestOutcome run_fixed_h_test(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                             const ParametricModel& model, const TestConfig& cfg,
                             double h);

// Comparator: same selected bandwidth as run_test, standardized by its own
// vhat instead of the baseline's.
TestOutcome run_selected_self_normalized(const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& Y,
                                         const ParametricModel& model,
                                         const TestConfig& cfg);

// Evaluate several variants on one dataset. In bootstrap mode all variants
// share the same synthetic samples; each per-variant outcome is identical to
// the one the dedicated run_* operation would produce.
std::vector<TestOutcome> run_variants(const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& Y,
                                      const ParametricModel& model,
                                      const TestConfig& cfg,
                                      const std::vector<VariantSpec>& variants);

// Rejection decision of an existing outcome at another level, reusing its
// bootstrap draws (bootstrap mode) or the normal quantile (asymptotic mode).
bool reject_at(const TestOutcome& outcome, double alpha);

}  // namespace aloft

#endif
