#include "aloft/weights.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "aloft/errors.hpp"

namespace aloft {

namespace {

constexpr double kDensityFloor = 1e-12;

// floor(1/h) with a tolerance so that bandwidths stored as 0.1, 1/3, ... hit
// the intended integer despite binary rounding.
int degree_from_bandwidth(double h) {
  if (!(h > 0.0)) throw UsageError("weights: bandwidth must be positive");
  return static_cast<int>(std::floor(1.0 / h + 1e-9));
}

// All exponent tuples q in {0..max_deg}^p, coordinate-wise.
std::vector<std::vector<int>> exponent_grid(int p, int max_deg) {
  std::vector<std::vector<int>> out;
  std::vector<int> q(p, 0);
  for (;;) {
    out.push_back(q);
    int l = 0;
    while (l < p && ++q[l] > max_deg) q[l++] = 0;
    if (l == p) break;
  }
  return out;
}

double monomial(const Eigen::MatrixXd& X, int i, const std::vector<int>& q) {
  double v = 1.0;
  for (int l = 0; l < static_cast<int>(q.size()); ++l)
    for (int r = 0; r < q[l]; ++r) v *= X(i, l);
  return v;
}

// Orthogonal projector onto col(Psi) with singular values below
// max_sv * n * eps treated as zero. Returns the effective rank.
int projector(const Eigen::MatrixXd& Psi, Eigen::MatrixXd& P) {
  const auto n = Psi.rows();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Psi, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    const double cutoff =
        sv(0) * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  }
  if (rank == 0) {
    P = Eigen::MatrixXd::Zero(n, n);
    return 0;
  }
  const auto U = svd.matrixU().leftCols(rank);
  P.noalias() = U * U.transpose();
  return rank;
}

// Entry-wise exact symmetry: (a+b)/2 commutes, so mirroring the mean of the
// two triangles gives bitwise equal off-diagonal pairs.
void symmetrize(Eigen::MatrixXd& M) {
  const auto n = M.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double w = 0.5 * (M(i, j) + M(j, i));
      M(i, j) = w;
      M(j, i) = w;
    }
}

WeightMatrix from_projector(Eigen::MatrixXd P, double h, SmootherFamily family,
                            int rank, int basis_dim) {
  symmetrize(P);
  WeightMatrix W;
  W.h = h;
  W.family = family;
  W.rank = rank;
  W.basis_dim = basis_dim;
  W.proj_diag = P.diagonal();
  P.diagonal().setZero();
  W.entries = std::move(P);
  return W;
}

WeightMatrix projection_weights(const Eigen::MatrixXd& X, double h,
                                SmootherFamily family,
                                const std::vector<std::vector<int>>& exponents) {
  const auto n = X.rows();
  const auto m = static_cast<Eigen::Index>(exponents.size());
  if (n < m) {
    std::ostringstream os;
    os << family_name(family) << " weights: n = " << n << " is smaller than the "
       << m << "-column basis at h = " << h;
    throw UsageError(os.str());
  }
  Eigen::MatrixXd Psi(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) Psi(i, j) = monomial(X, i, exponents[j]);
  Eigen::MatrixXd P;
  int rank = projector(Psi, P);
  return from_projector(std::move(P), h, family, rank, static_cast<int>(m));
}

double kernel_factor(KernelKind kind, double t) {
  switch (kind) {
    case KernelKind::gaussian:
      return 0.3989422804014326779 * std::exp(-0.5 * t * t);
    case KernelKind::triangular:
      return std::abs(t) < 1.0 ? 1.0 - std::abs(t) : 0.0;
    case KernelKind::laplace:
      return 0.5 * std::exp(-std::abs(t));
    case KernelKind::cauchy:
      return 1.0 / (3.141592653589793238 * (1.0 + t * t));
  }
  return 0.0;
}

}  // namespace

double KernelSpec::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double v = 1.0;
  for (Eigen::Index l = 0; l < x.size(); ++l) v *= kernel_factor(kind, x(l));
  return v;
}

WeightMatrix weights_polynomial(const Eigen::MatrixXd& X, double h) {
  const int p = static_cast<int>(X.cols());
  return projection_weights(X, h, SmootherFamily::polynomial,
                            exponent_grid(p, degree_from_bandwidth(h)));
}

WeightMatrix weights_additive(const Eigen::MatrixXd& X, double h) {
  const int p = static_cast<int>(X.cols());
  const int D = degree_from_bandwidth(h);
  // shared constant column, then x_l^k for k = 1..D per coordinate
  std::vector<std::vector<int>> exponents;
  exponents.emplace_back(p, 0);
  for (int l = 0; l < p; ++l)
    for (int k = 1; k <= D; ++k) {
      std::vector<int> q(p, 0);
      q[l] = k;
      exponents.push_back(std::move(q));
    }
  return projection_weights(X, h, SmootherFamily::additive, exponents);
}

WeightMatrix weights_piecewise(const Eigen::MatrixXd& X, double h, int qbar) {
  if (!near_integer(1.0 / h)) {
    std::ostringstream os;
    os << "piecewise weights: 1/h must be an integer, got h = " << h;
    throw UsageError(os.str());
  }
  if (qbar < 0) throw UsageError("piecewise weights: qbar must be >= 0");
  const auto n = X.rows();
  const int p = static_cast<int>(X.cols());
  const long long nbins = static_cast<long long>(std::round(1.0 / h));

  // group points by bin; bins are [k h, (k+1) h) with the upper edge folded
  // into the last bin
  std::unordered_map<long long, std::vector<int>> bins;
  for (Eigen::Index i = 0; i < n; ++i) {
    long long key = 0;
    for (int l = 0; l < p; ++l) {
      long long k = static_cast<long long>(std::floor(X(i, l) / h));
      if (k < 0) k = 0;
      if (k >= nbins) k = nbins - 1;
      key = key * nbins + k;
    }
    bins[key].push_back(static_cast<int>(i));
  }

  const auto exponents = exponent_grid(p, qbar);
  const auto local_dim = static_cast<Eigen::Index>(exponents.size());

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  int rank = 0;
  for (const auto& [key, idx] : bins) {
    const auto nk = static_cast<Eigen::Index>(idx.size());
    if (qbar == 0) {
      const double w = 1.0 / static_cast<double>(nk);
      for (int a : idx)
        for (int b : idx) P(a, b) = w;
      rank += 1;
      continue;
    }
    // underfull bins get a rank-truncated local projector
    Eigen::MatrixXd Psi(nk, local_dim);
    for (Eigen::Index j = 0; j < local_dim; ++j)
      for (Eigen::Index r = 0; r < nk; ++r) Psi(r, j) = monomial(X, idx[r], exponents[j]);
    Eigen::MatrixXd Pk;
    rank += projector(Psi, Pk);
    for (Eigen::Index r = 0; r < nk; ++r)
      for (Eigen::Index c = 0; c < nk; ++c) P(idx[r], idx[c]) = Pk(r, c);
  }

  const long long total_bins = static_cast<long long>(std::pow((double)nbins, p) + 0.5);
  return from_projector(std::move(P), h, SmootherFamily::piecewise, rank,
                        static_cast<int>(total_bins * local_dim));
}

WeightMatrix weights_kernel(const Eigen::MatrixXd& X, double h, const KernelSpec& kernel) {
  const auto n = X.rows();
  const int p = static_cast<int>(X.cols());
  if (n < 2) throw UsageError("kernel weights: need n >= 2");
  if (!(h > 0.0)) throw UsageError("kernel weights: bandwidth must be positive");

  const double scale = 1.0 / (static_cast<double>(n - 1) * std::pow(h, p));

  Eigen::MatrixXd K(n, n);
  Eigen::VectorXd u(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      u = (X.row(i) - X.row(j)).transpose() / h;
      const double v = kernel(u);
      K(i, j) = v;
      K(j, i) = v;
    }
  }

  // leave-one-out density estimates
  Eigen::VectorXd fhat = K.rowwise().sum() * scale;

  WeightMatrix W;
  W.h = h;
  W.family = SmootherFamily::kernel;
  for (Eigen::Index i = 0; i < n; ++i)
    if (fhat(i) <= kDensityFloor) W.degenerate_points.push_back(static_cast<int>(i));
  if (!W.degenerate_points.empty()) {
    W.degenerate = true;
    W.entries = Eigen::MatrixXd::Zero(n, n);
    return W;
  }

  Eigen::VectorXd inv_sqrt_f = fhat.cwiseSqrt().cwiseInverse();
  W.entries = scale * inv_sqrt_f.asDiagonal() * K * inv_sqrt_f.asDiagonal();
  W.entries.diagonal().setZero();
  symmetrize(W.entries);
  return W;
}

double spectral_radius(const WeightMatrix& W) {
  if (W.n() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W.entries,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double frobenius_sq(const WeightMatrix& W) { return W.entries.squaredNorm(); }

std::vector<WeightMatrix> build_weight_set(const Eigen::MatrixXd& X,
                                           const SmootherGrid& grid,
                                           const FamilySpec& family) {
  std::vector<WeightMatrix> out;
  out.reserve(grid.size());
  for (double h : grid.values) {
    switch (family.family) {
      case SmootherFamily::polynomial:
        out.push_back(weights_polynomial(X, h));
        break;
      case SmootherFamily::piecewise:
        out.push_back(weights_piecewise(X, h, family.qbar));
        break;
      case SmootherFamily::kernel:
        out.push_back(weights_kernel(X, h, family.kernel));
        break;
      case SmootherFamily::additive:
        out.push_back(weights_additive(X, h));
        break;
    }
  }
  return out;
}

std::string family_name(SmootherFamily f) {
  switch (f) {
    case SmootherFamily::polynomial: return "polynomial";
    case SmootherFamily::piecewise: return "piecewise";
    case SmootherFamily::kernel: return "kernel";
    case SmootherFamily::additive: return "additive";
  }
  return "?";
}

std::string kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::triangular: return "triangular";
    case KernelKind::laplace: return "laplace";
    case KernelKind::cauchy: return "cauchy";
  }
  return "?";
}

FamilySpec parse_family(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);

  FamilySpec spec;
  if (head == "poly" || head == "polynomial") {
    if (!arg.empty()) throw UsageError("family '" + head + "' takes no parameter");
    spec.family = SmootherFamily::polynomial;
    return spec;
  }
  if (head == "additive") {
    if (!arg.empty()) throw UsageError("family 'additive' takes no parameter");
    spec.family = SmootherFamily::additive;
    return spec;
  }
  if (head == "piecewise") {
    spec.family = SmootherFamily::piecewise;
    if (!arg.empty()) {
      std::size_t used = 0;
      int q = -1;
      try {
        q = std::stoi(arg, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != arg.size() || q < 0)
        throw UsageError("piecewise order must be an integer >= 0, got '" + arg + "'");
      spec.qbar = q;
    }
    return spec;
  }
  if (head == "kernel") {
    spec.family = SmootherFamily::kernel;
    const std::string kind = arg.empty() ? "gaussian" : arg;
    if (kind == "gaussian") spec.kernel.kind = KernelKind::gaussian;
    else if (kind == "triangular") spec.kernel.kind = KernelKind::triangular;
    else if (kind == "laplace") spec.kernel.kind = KernelKind::laplace;
    else if (kind == "cauchy") spec.kernel.kind = KernelKind::cauchy;
    else
      throw UsageError("unknown kernel '" + kind +
                       "' (known: gaussian, triangular, laplace, cauchy)");
    return spec;
  }
  throw UsageError("unknown family '" + text +
                   "' (known: poly, piecewise:<qbar>, kernel:<kind>, additive)");
}

std::string family_spec_name(const FamilySpec& spec) {
  switch (spec.family) {
    case SmootherFamily::polynomial: return "poly";
    case SmootherFamily::additive: return "additive";
    case SmootherFamily::piecewise:
      return "piecewise:" + std::to_string(spec.qbar);
    case SmootherFamily::kernel: return "kernel:" + kernel_name(spec.kernel.kind);
  }
  return "?";
}

}  // namespace aloft
