#include "aloft/variance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "aloft/errors.hpp"

namespace aloft {

namespace {

// Floor keeping every variance estimate strictly positive; scaled by the
// response dispersion so it is negligible at any data scale.
double sigma_floor(const Eigen::VectorXd& Y) {
  const double mean = Y.mean();
  const double var = (Y.array() - mean).square().mean();
  return 1e-10 * (1.0 + var);
}

}  // namespace

std::string VarianceSpec::describe() const {
  std::ostringstream os;
  switch (method) {
    case VarianceMethod::known: os << "known:" << known_value; break;
    case VarianceMethod::rice: os << "rice"; break;
    case VarianceMethod::local: os << "local:" << neighborhood; break;
  }
  return os.str();
}

VarianceSpec parse_variance(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);

  auto numeric_arg = [&](const char* what) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (arg.empty() || used != arg.size() || !(v > 0.0))
      throw UsageError(std::string(what) + " must be a positive number, got '" +
                       arg + "'");
    return v;
  };

  VarianceSpec spec;
  if (head == "rice") {
    if (!arg.empty()) throw UsageError("variance 'rice' takes no parameter");
    spec.method = VarianceMethod::rice;
    return spec;
  }
  if (head == "local") {
    spec.method = VarianceMethod::local;
    if (!arg.empty()) spec.neighborhood = numeric_arg("local variance width");
    return spec;
  }
  if (head == "known") {
    spec.method = VarianceMethod::known;
    spec.known_value = numeric_arg("known variance");
    return spec;
  }
  throw UsageError("unknown variance method '" + text +
                   "' (known: rice, local:<b>, known:<v>)");
}

Eigen::VectorXd local_variance(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                               double b) {
  if (!(b > 0.0)) throw UsageError("local variance neighborhood must be positive");
  if (X.rows() != Y.size()) throw UsageError("local_variance: X and Y sizes disagree");
  const auto n = X.rows();
  const double floor = sigma_floor(Y);

  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if ((X.row(j) - X.row(i)).cwiseAbs().maxCoeff() <= b) {
        sum += Y(j);
        ++count;
      }
    }
    const double mu = sum / count;  // count >= 1: the ball contains i itself
    double ssd = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if ((X.row(j) - X.row(i)).cwiseAbs().maxCoeff() <= b) {
        const double d = Y(j) - mu;
        ssd += d * d;
      }
    }
    out(i) = std::max(ssd / count, floor);
  }
  return out;
}

double rice_variance(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y) {
  if (X.cols() != 1)
    throw UsageError("difference-based variance requires a scalar design");
  if (X.rows() != Y.size()) throw UsageError("rice_variance: X and Y sizes disagree");
  const auto n = X.rows();
  if (n < 2) throw UsageError("rice_variance: need at least two observations");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (X(a, 0) != X(b, 0)) return X(a, 0) < X(b, 0);
    return a < b;  // deterministic under ties
  });

  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double d = Y(order[static_cast<std::size_t>(i + 1)]) -
                     Y(order[static_cast<std::size_t>(i)]);
    sum += d * d;
  }
  return sum / (2.0 * static_cast<double>(n - 1));
}

Eigen::VectorXd estimate_variance(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                                  const VarianceSpec& spec) {
  const auto n = X.rows();
  switch (spec.method) {
    case VarianceMethod::known:
      if (!(spec.known_value > 0.0))
        throw UsageError("known variance must be positive");
      return Eigen::VectorXd::Constant(n, spec.known_value);
    case VarianceMethod::rice: {
      const double v = std::max(rice_variance(X, Y), sigma_floor(Y));
      return Eigen::VectorXd::Constant(n, v);
    }
    case VarianceMethod::local:
      return local_variance(X, Y, spec.neighborhood);
  }
  throw UsageError("unknown variance method");
}

double vhat_single(const WeightMatrix& W, const Eigen::VectorXd& sigma2) {
  const auto n = W.entries.rows();
  if (sigma2.size() != n) throw UsageError("vhat_single: sigma2 size mismatch");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = W.entries(i, j);
      acc += w * w * sigma2(i) * sigma2(j);
    }
  return std::sqrt(2.0 * acc);
}

double vhat_diff(const WeightMatrix& Wa, const WeightMatrix& Wb,
                 const Eigen::VectorXd& sigma2) {
  const auto n = Wa.entries.rows();
  if (Wb.entries.rows() != n) throw UsageError("vhat_diff: matrix sizes disagree");
  if (sigma2.size() != n) throw UsageError("vhat_diff: sigma2 size mismatch");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = Wa.entries(i, j) - Wb.entries(i, j);
      acc += w * w * sigma2(i) * sigma2(j);
    }
  return std::sqrt(2.0 * acc);
}

}  // namespace aloft
