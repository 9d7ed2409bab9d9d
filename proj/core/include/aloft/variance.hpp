#ifndef ALOFT_VARIANCE_HPP
#define ALOFT_VARIANCE_HPP

#include <Eigen/Core>
#include <string>

#include "aloft/weights.hpp"

namespace aloft {

// How the conditional variance sigma^2(x) is obtained.
enum class VarianceMethod { known, rice, local };

struct VarianceSpec {
  VarianceMethod method = VarianceMethod::rice;
  double known_value = 1.0;   // method == known
  double neighborhood = 0.125;  // method == local: sup-norm half-width b
  std::string describe() const;
};

// "rice" | "local:<b>" | "known:<v>"; "local" alone uses the default width.
VarianceSpec parse_variance(const std::string& text);

// Pointwise conditional variance estimates sigma_hat^2(X_i), floored away from
// zero so downstream ratios stay finite.
Eigen::VectorXd estimate_variance(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                                  const VarianceSpec& spec);

// Local averaging estimator: at X_i, average squared deviations of Y over the
// sup-norm ball {j : ||X_j - X_i||_inf <= b}, which always contains i itself.
Eigen::VectorXd local_variance(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                               double b);

// Difference-based estimator for scalar designs: order the sample by X and
// average successive squared differences of Y. Returns a single value.
double rice_variance(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y);

// sqrt(2 * sum_{i != j} w_ij^2 s2(i) s2(j)) for a single weight matrix.
double vhat_single(const WeightMatrix& W, const Eigen::VectorXd& sigma2);

// Same functional applied to the entrywise difference of two weight matrices.
// Identical matrices give exactly zero.
double vhat_diff(const WeightMatrix& Wa, const WeightMatrix& Wb,
                 const Eigen::VectorXd& sigma2);

}  // namespace aloft

#endif
