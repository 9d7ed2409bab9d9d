#ifndef ALOFT_WEIGHTS_HPP
#define ALOFT_WEIGHTS_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "aloft/grid.hpp"

namespace aloft {

enum class SmootherFamily { polynomial, piecewise, kernel, additive };

enum class KernelKind { gaussian, triangular, laplace, cauchy };

// Product kernel K(x) = prod_l k(x_l). Each factor is nonnegative, symmetric,
// bounded and integrates to one.
struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

// Symmetric n x n smoother weight matrix with zero diagonal. For projection
// families the matrix is P_h with its diagonal moved into proj_diag; for the
// kernel family proj_diag is empty.
struct WeightMatrix {
  double h = 0.0;
  SmootherFamily family = SmootherFamily::piecewise;
  Eigen::MatrixXd entries;
  Eigen::VectorXd proj_diag;
  int rank = -1;       // effective projector rank (projection families)
  int basis_dim = -1;  // requested basis column count before truncation
  bool degenerate = false;
  std::vector<int> degenerate_points;  // indices with vanishing density

  int n() const { return static_cast<int>(entries.rows()); }
};

// Design X is n x p with coordinates in [0,1]. Callers with data on another
// box rescale first (see dataset.hpp).
WeightMatrix weights_polynomial(const Eigen::MatrixXd& X, double h);
WeightMatrix weights_piecewise(const Eigen::MatrixXd& X, double h, int qbar);
WeightMatrix weights_kernel(const Eigen::MatrixXd& X, double h, const KernelSpec& kernel);
WeightMatrix weights_additive(const Eigen::MatrixXd& X, double h);

double spectral_radius(const WeightMatrix& W);
double frobenius_sq(const WeightMatrix& W);

struct FamilySpec {
  SmootherFamily family = SmootherFamily::piecewise;
  int qbar = 0;  // piecewise polynomial order
  KernelSpec kernel;
};

// One WeightMatrix per grid value, coarsest first.
std::vector<WeightMatrix> build_weight_set(const Eigen::MatrixXd& X,
                                           const SmootherGrid& grid,
                                           const FamilySpec& family);

std::string family_name(SmootherFamily f);
std::string kernel_name(KernelKind k);

// "poly" | "piecewise:<qbar>" | "kernel:<kind>" | "additive"; "piecewise"
// alone means the regressogram (qbar = 0), "kernel" alone the Gaussian kernel.
FamilySpec parse_family(const std::string& text);
std::string family_spec_name(const FamilySpec& spec);

}  // namespace aloft

#endif
