#include "aloft/model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>

#include "aloft/errors.hpp"
#include "aloft/rng.hpp"

namespace aloft {

namespace {

std::string theta_to_string(const Eigen::VectorXd& theta) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (j) os << ", ";
    os << theta(j);
  }
  os << ")";
  return os.str();
}

Eigen::VectorXd clip_to_box(Eigen::VectorXd theta,
                            const std::vector<std::pair<double, double>>& box) {
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    theta(j) = std::min(std::max(theta(j), box[j].first), box[j].second);
  }
  return theta;
}

double sse_at(const ParametricModel& model, const Eigen::MatrixXd& X,
              const Eigen::VectorXd& Y, const Eigen::VectorXd& theta,
              Eigen::VectorXd& resid) {
  const auto n = X.rows();
  resid.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = model.mu(X.row(i).transpose(), theta);
    if (!std::isfinite(m)) {
      throw DegeneracyError("model '" + model.name +
                            "' returned a non-finite value at theta = " +
                            theta_to_string(theta));
    }
    resid(i) = Y(i) - m;
  }
  return resid.squaredNorm();
}

// Jacobian of mu w.r.t. theta. Forward differences with step
// cbrt(eps) * (1 + |theta_j|) when no analytic gradient is given.
void jacobian(const ParametricModel& model, const Eigen::MatrixXd& X,
              const Eigen::VectorXd& theta, const Eigen::VectorXd& resid,
              const Eigen::VectorXd& Y, Eigen::MatrixXd& J) {
  const auto n = X.rows();
  const int d = model.dim;
  J.resize(n, d);
  if (model.gradient) {
    Eigen::VectorXd g(d);
    for (Eigen::Index i = 0; i < n; ++i) {
      model.gradient(X.row(i).transpose(), theta, g);
      J.row(i) = g.transpose();
    }
    return;
  }
  static const double base_step = std::cbrt(std::numeric_limits<double>::epsilon());
  Eigen::VectorXd th = theta;
  for (int j = 0; j < d; ++j) {
    const double step = base_step * (1.0 + std::abs(theta(j)));
    th(j) = theta(j) + step;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = model.mu(X.row(i).transpose(), th);
      // mu(theta + step) - mu(theta), with mu(theta) = Y - resid
      J(i, j) = (m - (Y(i) - resid(i))) / step;
    }
    th(j) = theta(j);
  }
}

struct LocalFit {
  Eigen::VectorXd theta;
  Eigen::VectorXd resid;
  double sse = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> trace;
};

LocalFit gauss_newton(const ParametricModel& model, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& Y, Eigen::VectorXd theta,
                      const FitOptions& opt) {
  LocalFit fit;
  fit.theta = clip_to_box(std::move(theta), model.theta_box);
  fit.sse = sse_at(model, X, Y, fit.theta, fit.resid);
  if (opt.record_trace) fit.trace.push_back(fit.sse);

  Eigen::MatrixXd J;
  double lambda = 1e-3;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    jacobian(model, X, fit.theta, fit.resid, Y, J);
    Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::VectorXd Jte = J.transpose() * fit.resid;

    bool accepted = false;
    Eigen::VectorXd cand_resid;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal().array() += lambda;
      Eigen::VectorXd delta = A.ldlt().solve(Jte);
      Eigen::VectorXd cand = clip_to_box(fit.theta + delta, model.theta_box);
      const double cand_sse = sse_at(model, X, Y, cand, cand_resid);
      if (cand_sse < fit.sse) {
        const double drop = fit.sse - cand_sse;
        fit.theta = std::move(cand);
        fit.resid = std::move(cand_resid);
        fit.sse = cand_sse;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (opt.record_trace) fit.trace.push_back(fit.sse);
        if (drop <= opt.tol * (1.0 + fit.sse) &&
            delta.norm() <= opt.tol * (1.0 + fit.theta.norm())) {
          fit.converged = true;
          return fit;
        }
        break;
      }
      lambda *= 4.0;
      if (lambda > 1e12) break;
    }
    if (!accepted) {
      fit.converged = true;  // no descent direction left at this scale
      return fit;
    }
  }
  return fit;
}

bool lexicographically_smaller(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (a(j) < b(j)) return true;
    if (a(j) > b(j)) return false;
  }
  return false;
}

}  // namespace

Eigen::VectorXd predict(const ParametricModel& model, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& theta) {
  const auto n = X.rows();
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = model.mu(X.row(i).transpose(), theta);
  return out;
}

FitResult fit_nls(const ParametricModel& model, const Eigen::MatrixXd& X,
                  const Eigen::VectorXd& Y, const FitOptions& options) {
  const int d = model.dim;
  if (X.rows() != Y.size()) throw UsageError("fit_nls: X and Y sizes disagree");
  if (X.rows() < d) throw UsageError("fit_nls: need n >= d");

  FitResult out;
  if (d == 0) {
    out.theta = Eigen::VectorXd(0);
    out.residuals = Y - predict(model, X, out.theta);
    out.sse = out.residuals.squaredNorm();
    out.converged = true;
    return out;
  }
  if (static_cast<int>(model.theta_box.size()) != d)
    throw UsageError("fit_nls: theta_box size does not match model dim");
  for (const auto& [lo, hi] : model.theta_box)
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
      throw UsageError("fit_nls: theta_box bounds must be finite with lower < upper");

  LocalFit best;
  const int restarts = std::max(options.restarts, 1);
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd start(d);
    if (r == 0) {
      for (int j = 0; j < d; ++j)
        start(j) = 0.5 * (model.theta_box[j].first + model.theta_box[j].second);
    } else {
      Rng rng(options.seed, {0x5741u, static_cast<std::uint64_t>(r)});
      for (int j = 0; j < d; ++j)
        start(j) = rng.uniform(model.theta_box[j].first, model.theta_box[j].second);
    }
    LocalFit fit = gauss_newton(model, X, Y, std::move(start), options);
    if (fit.sse < best.sse ||
        (fit.sse == best.sse && best.theta.size() &&
         lexicographically_smaller(fit.theta, best.theta))) {
      best = std::move(fit);
    }
  }

  out.theta = best.theta;
  out.residuals = best.resid;
  out.sse = best.sse;
  out.converged = best.converged;
  out.restarts_used = restarts;
  out.objective_trace = std::move(best.trace);
  return out;
}

FitResult fit_ols(const ParametricModel& model, const Eigen::MatrixXd& X,
                  const Eigen::VectorXd& Y) {
  if (!model.is_linear())
    throw UsageError("fit_ols: model '" + model.name + "' has no linear design");
  if (X.rows() != Y.size()) throw UsageError("fit_ols: X and Y sizes disagree");
  const auto n = X.rows();
  const int d = model.dim;

  FitResult out;
  Eigen::MatrixXd D(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    D.row(i) = model.linear_design(X.row(i).transpose()).transpose();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
  qr.setThreshold(static_cast<double>(n) * std::numeric_limits<double>::epsilon());
  const int rank = static_cast<int>(qr.rank());
  if (rank < d) {
    std::ostringstream os;
    os << "fit_ols: rank-deficient design for model '" << model.name
       << "', effective rank " << rank << " < " << d;
    throw DegeneracyError(os.str());
  }

  out.theta = qr.solve(Y);
  bool inside = true;
  for (int j = 0; j < d; ++j)
    inside = inside && out.theta(j) >= model.theta_box[j].first &&
             out.theta(j) <= model.theta_box[j].second;
  if (!inside) {
    // unconstrained optimum escapes the box; the boxed optimum is interiorly
    // unreachable by closed form, so fall back to the constrained solver
    return fit_nls(model, X, Y);
  }
  out.residuals = Y - D * out.theta;
  out.sse = out.residuals.squaredNorm();
  out.converged = true;
  out.effective_rank = rank;
  return out;
}

FitResult fit_model(const ParametricModel& model, const Eigen::MatrixXd& X,
                    const Eigen::VectorXd& Y, const FitOptions& options) {
  if (model.dim == 0 || !model.is_linear()) return fit_nls(model, X, Y, options);
  try {
    return fit_ols(model, X, Y);
  } catch (const DegeneracyError&) {
    return fit_nls(model, X, Y, options);
  }
}

ParametricModel model_registry(const std::string& name, int p) {
  ParametricModel m;
  m.name = name;
  const std::pair<double, double> box{-1000.0, 1000.0};

  if (name == "zero") {
    m.dim = 0;
    m.mu = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; };
    return m;
  }
  if (name == "linear") {
    if (p != 1) throw UsageError("model 'linear' expects a 1-dimensional design");
    m.dim = 2;
    m.theta_box = {box, box};
    m.mu = [](const Eigen::VectorXd& x, const Eigen::VectorXd& th) {
      return th(0) + th(1) * x(0);
    };
    m.gradient = [](const Eigen::VectorXd& x, const Eigen::VectorXd&,
                    Eigen::VectorXd& g) {
      g(0) = 1.0;
      g(1) = x(0);
    };
    m.linear_design = [](const Eigen::VectorXd& x) {
      Eigen::VectorXd v(2);
      v << 1.0, x(0);
      return v;
    };
    return m;
  }
  if (name == "affine-p") {
    m.dim = p + 1;
    m.theta_box.assign(p + 1, box);
    m.mu = [](const Eigen::VectorXd& x, const Eigen::VectorXd& th) {
      return th(0) + th.tail(x.size()).dot(x);
    };
    m.gradient = [](const Eigen::VectorXd& x, const Eigen::VectorXd&,
                    Eigen::VectorXd& g) {
      g(0) = 1.0;
      g.tail(x.size()) = x;
    };
    m.linear_design = [](const Eigen::VectorXd& x) {
      Eigen::VectorXd v(x.size() + 1);
      v(0) = 1.0;
      v.tail(x.size()) = x;
      return v;
    };
    return m;
  }
  if (name == "sum-of-linears") {
    // per-coordinate intercept + slope; with p > 1 the intercepts are not
    // separately identified and the multistart NLS path handles it
    m.dim = 2 * p;
    m.theta_box.assign(2 * p, box);
    m.mu = [](const Eigen::VectorXd& x, const Eigen::VectorXd& th) {
      double v = 0.0;
      for (Eigen::Index l = 0; l < x.size(); ++l) v += th(2 * l) + th(2 * l + 1) * x(l);
      return v;
    };
    m.gradient = [](const Eigen::VectorXd& x, const Eigen::VectorXd&,
                    Eigen::VectorXd& g) {
      for (Eigen::Index l = 0; l < x.size(); ++l) {
        g(2 * l) = 1.0;
        g(2 * l + 1) = x(l);
      }
    };
    m.linear_design = [](const Eigen::VectorXd& x) {
      Eigen::VectorXd v(2 * x.size());
      for (Eigen::Index l = 0; l < x.size(); ++l) {
        v(2 * l) = 1.0;
        v(2 * l + 1) = x(l);
      }
      return v;
    };
    return m;
  }
  throw UsageError("unknown model '" + name +
                   "' (known: zero, linear, affine-p, sum-of-linears)");
}

}  // namespace aloft
