#ifndef ALOFT_MODEL_HPP
#define ALOFT_MODEL_HPP

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace aloft {

// Null parametric family mu(x; theta) over a compact box Theta. d = 0 encodes
// the degenerate white-noise null mu == 0.
struct ParametricModel {
  std::string name;
  int dim = 0;  // d
  std::function<double(const Eigen::VectorXd& x, const Eigen::VectorXd& theta)> mu;
  std::vector<std::pair<double, double>> theta_box;  // finite, lower < upper
  // optional: d/dtheta mu(x; theta) written into grad
  std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
                     Eigen::VectorXd& grad)>
      gradient;
  // optional: marks mu(x; theta) = theta . linear_design(x)
  std::function<Eigen::VectorXd(const Eigen::VectorXd& x)> linear_design;

  bool is_linear() const { return static_cast<bool>(linear_design); }
};

struct FitOptions {
  int restarts = 10;
  int max_iter = 200;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  bool record_trace = false;
};

struct FitResult {
  Eigen::VectorXd theta;
  Eigen::VectorXd residuals;  // Y_i - mu(X_i; theta)
  double sse = 0.0;
  bool converged = false;
  int restarts_used = 0;
  int effective_rank = -1;  // linear fits only
  std::vector<double> objective_trace;  // best start, when record_trace is set
};

Eigen::VectorXd predict(const ParametricModel& model, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& theta);

// Multistart box-constrained damped Gauss-Newton for (3.1)-style problems.
// Start points are drawn uniformly in theta_box from a deterministic stream,
// so restart k is the same point whatever the total restart count.
FitResult fit_nls(const ParametricModel& model, const Eigen::MatrixXd& X,
                  const Eigen::VectorXd& Y, const FitOptions& options = {});

// Closed-form least squares for models with linear_design. Throws
// DegeneracyError on rank-deficient designs, reporting the effective rank.
FitResult fit_ols(const ParametricModel& model, const Eigen::MatrixXd& X,
                  const Eigen::VectorXd& Y);

// OLS when available and well posed, otherwise NLS.
FitResult fit_model(const ParametricModel& model, const Eigen::MatrixXd& X,
                    const Eigen::VectorXd& Y, const FitOptions& options = {});

// Built-in models addressable from the CLI: "zero", "linear", "affine-p",
// "sum-of-linears". p is the design dimension the model is instantiated for.
ParametricModel model_registry(const std::string& name, int p);

}  // namespace aloft

#endif
