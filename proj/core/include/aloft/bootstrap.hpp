#ifndef ALOFT_BOOTSTRAP_HPP
#define ALOFT_BOOTSTRAP_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "aloft/model.hpp"

namespace aloft {

// Multiplier law for the conditional-moments bootstrap. All laws have mean 0
// and variance 1; the default two-point law also has third moment 1.
enum class MultiplierLaw { two_point_golden, rademacher, gaussian };

const char* multiplier_name(MultiplierLaw law);
MultiplierLaw parse_multiplier(const std::string& name);

struct BootstrapConfig {
  int B = 199;
  MultiplierLaw multiplier = MultiplierLaw::two_point_golden;
  std::uint64_t seed = 0;
};

// n i.i.d. multipliers. Output is a pure function of (cfg.seed, cfg.multiplier,
// stream) and the count n; draws for distinct streams are independent.
Eigen::VectorXd draw_multipliers(int n, const BootstrapConfig& cfg,
                                 std::uint64_t stream);

// Y*_i = mu(X_i; theta_hat) + sqrt(sigma2_i) * omega_i.
Eigen::VectorXd bootstrap_sample(const ParametricModel& model,
                                 const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& theta_hat,
                                 const Eigen::VectorXd& sigma2,
                                 const Eigen::VectorXd& omega);

struct TestConfig;   // engine.hpp
struct VariantSpec;  // engine.hpp

// Empirical critical value: re-runs the full pipeline (refit, re-estimate the
// variance, rebuild all statistics, re-select the bandwidth) on each of boot.B
// synthetic samples and returns the order statistic of rank
// ceil((B+1)(1-alpha)) clipped above to B. A rank below 1 is possible only at
// alpha = 1 and yields -infinity.
double bootstrap_critical_value(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                                const ParametricModel& model, const TestConfig& cfg,
                                const VariantSpec& variant,
                                const BootstrapConfig& boot);

// Rank-ceil((B+1)(1-alpha)) order statistic of the given draws.
double empirical_critical_value(std::vector<double> stats, double alpha);

}  // namespace aloft

#endif
