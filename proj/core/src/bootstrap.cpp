#include "aloft/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "aloft/errors.hpp"
#include "aloft/rng.hpp"

namespace aloft {

namespace {
constexpr std::uint64_t kOmegaStream = 0x6f6d656761ULL;
constexpr double kSqrt5 = 2.23606797749978969641;
}  // namespace

const char* multiplier_name(MultiplierLaw law) {
  switch (law) {
    case MultiplierLaw::two_point_golden: return "two-point";
    case MultiplierLaw::rademacher: return "rademacher";
    case MultiplierLaw::gaussian: return "gaussian";
  }
  return "?";
}

MultiplierLaw parse_multiplier(const std::string& name) {
  if (name == "two-point" || name == "two-point-golden")
    return MultiplierLaw::two_point_golden;
  if (name == "rademacher") return MultiplierLaw::rademacher;
  if (name == "gaussian") return MultiplierLaw::gaussian;
  throw UsageError("unknown multiplier law '" + name +
                   "' (known: two-point, rademacher, gaussian)");
}

Eigen::VectorXd draw_multipliers(int n, const BootstrapConfig& cfg,
                                 std::uint64_t stream) {
  if (n < 1) throw UsageError("draw_multipliers: n must be >= 1");
  Rng rng(cfg.seed, {kOmegaStream, stream});
  Eigen::VectorXd w(n);
  switch (cfg.multiplier) {
    case MultiplierLaw::two_point_golden: {
      const double lo = 0.5 * (1.0 - kSqrt5);
      const double hi = 0.5 * (1.0 + kSqrt5);
      const double p_lo = (5.0 + kSqrt5) / 10.0;
      for (int i = 0; i < n; ++i) w(i) = rng.uniform() < p_lo ? lo : hi;
      return w;
    }
    case MultiplierLaw::rademacher:
      for (int i = 0; i < n; ++i) w(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
      return w;
    case MultiplierLaw::gaussian:
      for (int i = 0; i < n; ++i) w(i) = rng.normal();
      return w;
  }
  throw UsageError("unknown multiplier law");
}

Eigen::VectorXd bootstrap_sample(const ParametricModel& model,
                                 const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& theta_hat,
                                 const Eigen::VectorXd& sigma2,
                                 const Eigen::VectorXd& omega) {
  if (X.rows() != sigma2.size() || X.rows() != omega.size())
    throw UsageError("bootstrap_sample: sizes disagree");
  if (sigma2.size() && sigma2.minCoeff() < 0.0)
    throw UsageError("bootstrap_sample: negative variance estimate");
  return predict(model, X, theta_hat) + sigma2.cwiseSqrt().cwiseProduct(omega);
}

double empirical_critical_value(std::vector<double> stats, double alpha) {
  if (stats.empty()) throw UsageError("empirical_critical_value: no draws");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw UsageError("empirical_critical_value: alpha must lie in (0,1]");
  const int B = static_cast<int>(stats.size());
  // rank ceil((B+1)(1-alpha)); the 1e-9 slack absorbs representation error of
  // products like 200 * 0.95, which must stay at rank 190, not 191
  const double r = (B + 1) * (1.0 - alpha);
  const int rank = std::min(static_cast<int>(std::ceil(r - 1e-9)), B);
  // rank 0 happens only at the degenerate level alpha = 1: every statistic rejects
  if (rank < 1) return -std::numeric_limits<double>::infinity();
  std::nth_element(stats.begin(), stats.begin() + (rank - 1), stats.end());
  return stats[static_cast<std::size_t>(rank - 1)];
}

}  // namespace aloft
