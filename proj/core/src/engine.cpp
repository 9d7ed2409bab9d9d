#include "aloft/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "aloft/errors.hpp"
#include "aloft/rng.hpp"

namespace aloft {

namespace {

// Stream tags separating multiplier draws from refit starting points.
constexpr std::uint64_t kFitStream = 0x666974736565ULL;

double gamma_for(double c, const SmootherGrid& grid) {
  if (!(c > 0.0)) throw UsageError("penalty multiplier c must be positive");
  const int Jn = grid.values.empty() ? grid.refinements
                                     : static_cast<int>(grid.values.size()) - 1;
  if (Jn < 2)
    throw UsageError(
        "penalized selection needs at least two grid refinements (Jn >= 2)");
  return c * std::sqrt(2.0 * std::log(static_cast<double>(Jn)));
}

// s'(W o W)s without materializing the Hadamard square.
double hadamard_quadform(const Eigen::MatrixXd& W, const Eigen::VectorXd& s) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < W.cols(); ++j)
    acc += s(j) * (W.col(j).array().square() * s.array()).sum();
  return acc;
}

double hadamard_quadform_diff(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::VectorXd& s) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    acc += s(j) *
           ((A.col(j) - B.col(j)).array().square() * s.array()).sum();
  return acc;
}

struct EvalContext {
  std::vector<WeightMatrix> W;  // grid order, coarsest first
  std::vector<double> F_single; // ||W_h||_F^2
  std::vector<double> F_diff;   // ||W_h - W_h0||_F^2; exactly 0 at h0
  std::vector<std::string> warnings;
};

EvalContext build_context(const Eigen::MatrixXd& X, const TestConfig& cfg) {
  const auto n = X.rows();
  if (n < 2) throw UsageError("test engine: need at least two observations");
  if (cfg.grid.values.empty()) throw UsageError("test engine: empty bandwidth grid");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw UsageError("test engine: alpha must lie in (0,1)");

  EvalContext ctx;
  ctx.W = build_weight_set(X, cfg.grid, cfg.family);
  for (const auto& W : ctx.W) {
    if (W.degenerate) {
      std::ostringstream os;
      os << "weight matrix at h = " << W.h << " is degenerate ("
         << W.degenerate_points.size() << " points with vanishing density)";
      throw DegeneracyError(os.str());
    }
    if (W.basis_dim >= 0) {
      if (W.basis_dim >= n) {
        std::ostringstream os;
        os << "basis dimension " << W.basis_dim << " at h = " << W.h
           << " requires more than n = " << n << " observations";
        throw UsageError(os.str());
      }
      if (2 * W.basis_dim > n) {
        std::ostringstream os;
        os << "basis dimension " << W.basis_dim << " at h = " << W.h
           << " exceeds n/2; statistics at this bandwidth may be unstable";
        ctx.warnings.push_back(os.str());
      }
    }
  }
  ctx.F_single.resize(ctx.W.size());
  ctx.F_diff.resize(ctx.W.size());
  for (std::size_t j = 0; j < ctx.W.size(); ++j) {
    ctx.F_single[j] = frobenius_sq(ctx.W[j]);
    ctx.F_diff[j] =
        j == 0 ? 0.0 : (ctx.W[j].entries - ctx.W[0].entries).squaredNorm();
  }
  return ctx;
}

struct Evaluation {
  std::vector<double> That, vdiff, vsingle;  // per grid value
  double vhat_h0 = 0;
  Eigen::VectorXd theta;
  Eigen::VectorXd sigma2;
};

Evaluation evaluate(const EvalContext& ctx, const Eigen::MatrixXd& X,
                    const Eigen::VectorXd& Y, const ParametricModel& model,
                    const TestConfig& cfg, std::uint64_t fit_seed) {
  FitOptions fo = cfg.fit;
  fo.seed = fit_seed;
  FitResult fr = fit_model(model, X, Y, fo);

  Evaluation ev;
  ev.theta = std::move(fr.theta);
  ev.sigma2 = estimate_variance(X, Y, cfg.variance);

  const auto J = ctx.W.size();
  ev.That.resize(J);
  ev.vdiff.resize(J);
  ev.vsingle.resize(J);
  const bool const_sigma = ev.sigma2.minCoeff() == ev.sigma2.maxCoeff();
  const double s2 = ev.sigma2(0);
  for (std::size_t j = 0; j < J; ++j) {
    const Eigen::MatrixXd& W = ctx.W[j].entries;
    ev.That[j] = fr.residuals.dot(W * fr.residuals);
    if (const_sigma) {
      ev.vsingle[j] = s2 * std::sqrt(2.0 * ctx.F_single[j]);
      ev.vdiff[j] = s2 * std::sqrt(2.0 * ctx.F_diff[j]);
    } else {
      ev.vsingle[j] = std::sqrt(2.0 * hadamard_quadform(W, ev.sigma2));
      ev.vdiff[j] = j == 0 ? 0.0
                           : std::sqrt(2.0 * hadamard_quadform_diff(
                                                 W, ctx.W[0].entries, ev.sigma2));
    }
  }
  ev.vhat_h0 = ev.vsingle[0];
  return ev;
}

double safe_ratio(double num, double den, const char* what) {
  if (den > 0.0) return num / den;
  if (num == 0.0) return 0.0;
  std::ostringstream os;
  os << what << " is zero with a nonzero statistic";
  throw DegeneracyError(os.str());
}

struct VariantStat {
  double statistic = 0;
  int index = 0;
  double gamma = 0;
};

VariantStat variant_statistic(const Evaluation& ev, const TestConfig& cfg,
                              const VariantSpec& v) {
  const auto J = ev.That.size();
  VariantStat out;
  switch (v.kind) {
    case TestKind::penalized:
    case TestKind::self_normalized: {
      out.gamma = gamma_for(v.c, cfg.grid);
      std::vector<std::pair<double, double>> stats(J), penalties(J);
      for (std::size_t j = 0; j < J; ++j) {
        stats[j] = {cfg.grid.values[j], ev.That[j]};
        penalties[j] = {cfg.grid.values[j], ev.vdiff[j]};
      }
      out.index = select_h(stats, penalties, out.gamma);
      out.statistic =
          v.kind == TestKind::penalized
              ? safe_ratio(ev.That[out.index], ev.vhat_h0, "baseline variance")
              : safe_ratio(ev.That[out.index], ev.vsingle[out.index],
                           "selected-bandwidth variance");
      return out;
    }
    case TestKind::max_studentized: {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < J; ++j) {
        const double r =
            safe_ratio(ev.That[j], ev.vsingle[j], "per-bandwidth variance");
        if (r > best) {
          best = r;
          out.index = static_cast<int>(j);
        }
      }
      out.statistic = best;
      return out;
    }
    case TestKind::fixed_h: {
      int idx = -1;
      for (std::size_t j = 0; j < J; ++j) {
        const double h = cfg.grid.values[j];
        if (std::abs(h - v.fixed_h) <= 1e-9 * std::max(1.0, std::abs(h))) {
          idx = static_cast<int>(j);
          break;
        }
      }
      if (idx < 0) {
        std::ostringstream os;
        os << "fixed bandwidth " << v.fixed_h << " is not on the grid";
        throw UsageError(os.str());
      }
      out.index = idx;
      out.statistic =
          safe_ratio(ev.That[idx], ev.vsingle[idx], "per-bandwidth variance");
      return out;
    }
  }
  throw UsageError("unknown test variant");
}

// Per-variant bootstrap statistics from shared draws. stats[v][b] is variant
// v's statistic on draw b; draw b's multipliers depend only on
// (boot.seed, b, n), never on the variant list.
std::vector<std::vector<double>> bootstrap_statistics(
    const EvalContext& ctx, const Eigen::MatrixXd& X, const ParametricModel& model,
    const TestConfig& cfg, const Evaluation& outer,
    const std::vector<VariantSpec>& variants) {
  const auto n = X.rows();
  const int B = cfg.boot.B;
  if (B < 1) throw UsageError("bootstrap: B must be >= 1");

  const Eigen::VectorXd fitted = predict(model, X, outer.theta);
  const Eigen::VectorXd sigma_hat = outer.sigma2.cwiseSqrt();

  std::vector<std::vector<double>> stats(variants.size(),
                                         std::vector<double>(B, 0.0));
  std::exception_ptr first_error;
  int first_error_draw = -1;
  std::mutex error_mutex;

  auto worker = [&](int begin, int stride) {
    for (int b = begin; b < B; b += stride) {
      try {
        const Eigen::VectorXd omega =
            draw_multipliers(static_cast<int>(n), cfg.boot,
                             static_cast<std::uint64_t>(b));
        const Eigen::VectorXd Ystar = fitted + sigma_hat.cwiseProduct(omega);
        const Evaluation ev =
            evaluate(ctx, X, Ystar, model, cfg,
                     derive_seed(cfg.boot.seed,
                                 {kFitStream, static_cast<std::uint64_t>(b)}));
        for (std::size_t v = 0; v < variants.size(); ++v)
          stats[v][static_cast<std::size_t>(b)] =
              variant_statistic(ev, cfg, variants[v]).statistic;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error_draw < 0 || b < first_error_draw) {
          first_error = std::current_exception();
          first_error_draw = b;
        }
        return;
      }
    }
  };

  const int jobs = std::clamp(cfg.jobs, 1, B);
  if (jobs == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker, t, jobs);
    for (auto& th : pool) th.join();
  }

  if (first_error_draw >= 0) {
    const std::string prefix =
        "bootstrap draw " + std::to_string(first_error_draw) + ": ";
    try {
      std::rethrow_exception(first_error);
    } catch (const UsageError& e) {
      throw UsageError(prefix + e.what());
    } catch (const DataError& e) {
      throw DataError(prefix + e.what());
    } catch (const DegeneracyError& e) {
      throw DegeneracyError(prefix + e.what());
    } catch (const std::exception& e) {
      throw DataError(prefix + e.what());
    }
  }
  return stats;
}

TestOutcome assemble(const EvalContext& ctx, const TestConfig& cfg,
                     const Evaluation& ev, const VariantSpec& v,
                     const VariantStat& vs, double threshold,
                     std::vector<double> boot_stats) {
  TestOutcome out;
  out.kind = v.kind;
  out.per_h.resize(ev.That.size());
  for (std::size_t j = 0; j < ev.That.size(); ++j) {
    out.per_h[j].h = cfg.grid.values[j];
    out.per_h[j].That = ev.That[j];
    out.per_h[j].vdiff = ev.vdiff[j];
    out.per_h[j].vsingle = ev.vsingle[j];
    out.per_h[j].objective = ev.That[j] - vs.gamma * ev.vdiff[j];
  }
  out.selected_index = vs.index;
  out.h_selected = cfg.grid.values[static_cast<std::size_t>(vs.index)];
  out.statistic = vs.statistic;
  out.threshold = threshold;
  out.reject = vs.statistic >= threshold;
  out.vhat_h0 = ev.vhat_h0;
  out.gamma_n = vs.gamma;
  out.theta_hat = ev.theta;
  out.bootstrap_stats = std::move(boot_stats);
  out.warnings = ctx.warnings;
  return out;
}

}  // namespace

double TestConfig::gamma_n() const { return gamma_for(c, grid); }

const char* test_kind_name(TestKind kind) {
  switch (kind) {
    case TestKind::penalized: return "penalized";
    case TestKind::self_normalized: return "self-normalized";
    case TestKind::max_studentized: return "max";
    case TestKind::fixed_h: return "fixed-h";
  }
  return "?";
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw UsageError("normal_quantile: p must lie in (0,1)");
  // Acklam's rational approximation, then two Newton refinements through the
  // exact erfc-based CDF.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    const double cdf = 0.5 * std::erfc(-x * 0.7071067811865475244);
    const double pdf = 0.3989422804014326779 * std::exp(-0.5 * x * x);
    x -= (cdf - p) / pdf;
  }
  return x;
}

double statistic_Th(const WeightMatrix& W, const Eigen::VectorXd& U) {
  if (W.entries.rows() != U.size())
    throw UsageError("statistic_Th: dimensions disagree");
  return U.dot(W.entries * U);
}

int select_h(const std::vector<std::pair<double, double>>& stats,
             const std::vector<std::pair<double, double>>& penalties,
             double gamma_n) {
  if (stats.empty()) throw UsageError("select_h: empty grid");
  if (stats.size() != penalties.size())
    throw UsageError("select_h: stats and penalties are not aligned");
  if (penalties.front().second != 0.0)
    throw UsageError("select_h: penalty at the baseline bandwidth must be 0");
  if (!(gamma_n >= 0.0) || !std::isfinite(gamma_n))
    throw UsageError("select_h: gamma_n must be finite and nonnegative");

  int best = 0;
  double best_obj = stats[0].second;  // penalty is zero at the baseline
  for (std::size_t j = 1; j < stats.size(); ++j) {
    const double obj = stats[j].second - gamma_n * penalties[j].second;
    if (obj > best_obj) {  // ties keep the earlier (larger) bandwidth
      best_obj = obj;
      best = static_cast<int>(j);
    }
  }
  return best;
}

std::vector<TestOutcome> run_variants(const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& Y,
                                      const ParametricModel& model,
                                      const TestConfig& cfg,
                                      const std::vector<VariantSpec>& variants) {
  if (variants.empty()) throw UsageError("run_variants: no variants given");
  if (X.rows() != Y.size()) throw UsageError("run_variants: X and Y sizes disagree");
  for (const auto& v : variants) {
    if (v.kind == TestKind::max_studentized && cfg.mode == ThresholdMode::asymptotic)
      throw UsageError(
          "the maximum test has a nonstandard null limit; use bootstrap mode");
  }

  const EvalContext ctx = build_context(X, cfg);
  const Evaluation outer = evaluate(ctx, X, Y, model, cfg, cfg.fit.seed);

  std::vector<VariantStat> vstats(variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v)
    vstats[v] = variant_statistic(outer, cfg, variants[v]);

  std::vector<TestOutcome> out;
  out.reserve(variants.size());
  if (cfg.mode == ThresholdMode::asymptotic) {
    const double z = normal_quantile(1.0 - cfg.alpha);
    for (std::size_t v = 0; v < variants.size(); ++v)
      out.push_back(assemble(ctx, cfg, outer, variants[v], vstats[v], z, {}));
    return out;
  }

  auto stats = bootstrap_statistics(ctx, X, model, cfg, outer, variants);
  std::string coarse_warning;
  if (cfg.boot.B + 1 < 1.0 / cfg.alpha) {
    std::ostringstream os;
    os << "B = " << cfg.boot.B << " is below 1/alpha - 1 = "
       << (1.0 / cfg.alpha - 1.0) << "; the critical value is coarse";
    coarse_warning = os.str();
  }
  for (std::size_t v = 0; v < variants.size(); ++v) {
    const double cv = empirical_critical_value(stats[v], cfg.alpha);
    out.push_back(assemble(ctx, cfg, outer, variants[v], vstats[v], cv,
                           std::move(stats[v])));
    if (!coarse_warning.empty()) out.back().warnings.push_back(coarse_warning);
  }
  return out;
}

TestOutcome run_test(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                     const ParametricModel& model, const TestConfig& cfg) {
  return run_variants(X, Y, model, cfg,
                      {VariantSpec{TestKind::penalized, cfg.c, 0.0}})[0];
}

TestOutcome run_max_test(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                         const ParametricModel& model, const TestConfig& cfg) {
  return run_variants(X, Y, model, cfg,
                      {VariantSpec{TestKind::max_studentized, cfg.c, 0.0}})[0];
}

TestOutcome run_fixed_h_test(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                             const ParametricModel& model, const TestConfig& cfg,
                             double h) {
  return run_variants(X, Y, model, cfg,
                      {VariantSpec{TestKind::fixed_h, cfg.c, h}})[0];
}

TestOutcome run_selected_self_normalized(const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& Y,
                                         const ParametricModel& model,
                                         const TestConfig& cfg) {
  return run_variants(X, Y, model, cfg,
                      {VariantSpec{TestKind::self_normalized, cfg.c, 0.0}})[0];
}

bool reject_at(const TestOutcome& outcome, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw UsageError("reject_at: alpha must lie in (0,1]");
  if (alpha == 1.0) return true;
  const double thr = outcome.bootstrap_stats.empty()
                         ? normal_quantile(1.0 - alpha)
                         : empirical_critical_value(outcome.bootstrap_stats, alpha);
  return outcome.statistic >= thr;
}

double bootstrap_critical_value(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                                const ParametricModel& model, const TestConfig& cfg,
                                const VariantSpec& variant,
                                const BootstrapConfig& boot) {
  TestConfig local = cfg;
  local.boot = boot;
  const EvalContext ctx = build_context(X, local);
  const Evaluation outer = evaluate(ctx, X, Y, model, local, local.fit.seed);
  auto stats = bootstrap_statistics(ctx, X, model, local, outer, {variant});
  return empirical_critical_value(std::move(stats[0]), local.alpha);
}

}  // namespace aloft
