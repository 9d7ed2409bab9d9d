// Command-line front end: test | simulate | weights.
// Exit codes: 0 success, 2 usage error, 3 data error, 4 degeneracy.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aloft/bootstrap.hpp"
#include "aloft/dataset.hpp"
#include "aloft/engine.hpp"
#include "aloft/errors.hpp"
#include "aloft/mc.hpp"
#include "aloft/model.hpp"
#include "aloft/rng.hpp"
#include "aloft/variance.hpp"
#include "aloft/weights.hpp"

namespace {

using namespace aloft;

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// "asymptotic" or "bootstrap:<B>"; bare "bootstrap" keeps the default B.
void apply_mode(TestConfig& cfg, const std::string& text) {
  if (text == "asymptotic") {
    cfg.mode = ThresholdMode::asymptotic;
    return;
  }
  if (text == "bootstrap") {
    cfg.mode = ThresholdMode::bootstrap;
    return;
  }
  const std::string prefix = "bootstrap:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string arg = text.substr(prefix.size());
    std::size_t used = 0;
    int b = 0;
    try {
      b = std::stoi(arg, &used);
    } catch (const std::exception&) {
      throw UsageError("invalid bootstrap draw count '" + arg + "'");
    }
    if (used != arg.size() || b < 1)
      throw UsageError("invalid bootstrap draw count '" + arg + "'");
    cfg.mode = ThresholdMode::bootstrap;
    cfg.boot.B = b;
    return;
  }
  throw UsageError("unknown mode '" + text + "' (expected asymptotic or bootstrap:<B>)");
}

void print_dataset_info(const Dataset& data, const std::string& path) {
  std::cerr << "dataset " << path << ": n = " << data.n() << ", p = " << data.p()
            << (data.had_header ? ", header row skipped" : "") << "\n";
  for (int k = 0; k < data.p(); ++k) {
    std::cerr << "  x" << (k + 1) << ": [" << sig6(data.ranges[k].first) << ", "
              << sig6(data.ranges[k].second) << "] mapped to [0, 1]\n";
  }
}

struct TestArgs {
  std::string data_path;
  std::string model = "linear";
  std::string family = "piecewise:0";
  double h0 = 0.25;
  double a = 2.0;
  int Jn = 5;
  double c = 1.0;
  double alpha = 0.05;
  std::string mode = "bootstrap:199";
  std::string variance = "rice";
  std::string multiplier = "two-point";
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_path;
};

int cmd_test(const TestArgs& args) {
  Dataset data = parse_dataset_file(args.data_path);
  print_dataset_info(data, args.data_path);

  TestConfig cfg;
  cfg.family = parse_family(args.family);
  const bool integer_bins = cfg.family.family == SmootherFamily::piecewise;
  cfg.grid = build_grid(args.h0, args.a, args.Jn, integer_bins);
  cfg.c = args.c;
  cfg.alpha = args.alpha;
  cfg.variance = parse_variance(args.variance);
  apply_mode(cfg, args.mode);
  cfg.boot.multiplier = parse_multiplier(args.multiplier);
  cfg.boot.seed = args.seed;
  cfg.fit.seed = derive_seed(args.seed, {0x666974});
  cfg.jobs = args.jobs;

  ParametricModel model = model_registry(args.model, data.p());
  TestOutcome outcome = run_test(data.X, data.Y, model, cfg);

  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
  if (outcome.theta_hat.size() > 0) {
    std::cerr << "theta_hat =";
    for (int j = 0; j < outcome.theta_hat.size(); ++j)
      std::cerr << " " << sig6(outcome.theta_hat[j]);
    std::cerr << "\n";
  }
  std::cerr << "vhat_h0 = " << sig6(outcome.vhat_h0)
            << ", gamma_n = " << sig6(outcome.gamma_n) << "\n";

  std::ostringstream verdict;
  verdict << (outcome.reject ? "reject" : "fail to reject")
          << " the null at level " << sig6(cfg.alpha) << " (statistic "
          << sig6(outcome.statistic) << " vs threshold " << sig6(outcome.threshold)
          << ", selected h = " << sig6(outcome.h_selected) << ")";
  std::cout << verdict.str() << "\n";

  std::ostringstream table;
  table << "h,T,vdiff,objective\n";
  for (const auto& row : outcome.per_h) {
    table << g17(row.h) << "," << g17(row.That) << "," << g17(row.vdiff) << ","
          << g17(row.objective) << "\n";
  }
  if (args.out_path.empty()) {
    std::cout << table.str();
  } else {
    std::ofstream out(args.out_path);
    if (!out) throw DataError("cannot open output file '" + args.out_path + "'");
    out << table.str();
    std::cerr << "per-h table written to " << args.out_path << "\n";
  }
  return 0;
}

struct SimulateArgs {
  std::string preset;
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
  bool full_scale = false;
  std::string out_path;
};

int cmd_simulate(const SimulateArgs& args) {
  if (args.preset.empty() == args.config_path.empty())
    throw UsageError("simulate needs exactly one of --preset or --config");

  ExperimentConfig cfg;
  if (!args.preset.empty()) {
    cfg = preset_experiment(args.preset, args.full_scale);
  } else {
    std::ifstream in(args.config_path);
    if (!in) throw DataError("cannot open config file '" + args.config_path + "'");
    cfg = load_experiment_config(in);
    if (args.full_scale)
      throw UsageError("--full-scale applies to presets only");
  }
  if (args.seed_set) cfg.seed = args.seed;
  cfg.jobs = args.jobs;

  std::cerr << "experiment " << cfg.name << ": " << cfg.scenarios.size()
            << " scenario(s), " << cfg.variants.size() << " variant(s), seed "
            << cfg.seed << ", jobs " << cfg.jobs << "\n";

  RejectionTable table = run_experiment(cfg);

  if (table.failures > 0)
    std::cerr << "warning: " << table.failures << " replication(s) failed and were dropped\n";
  std::cerr << "selection checks: " << table.selection_checks << ", invariant violations: "
            << table.invariant_violations << "\n";

  std::cout << render_table(table);
  if (!args.out_path.empty()) {
    emit_table(table, args.out_path);
    std::cerr << "table written to " << args.out_path << "\n";
  }
  return 0;
}

struct WeightsArgs {
  std::string data_path;
  std::string family = "piecewise:0";
  double h = 0.25;
  std::string out_path;
};

int cmd_weights(const WeightsArgs& args) {
  Dataset data = parse_dataset_file(args.data_path);
  print_dataset_info(data, args.data_path);

  SmootherGrid grid;
  grid.h0 = args.h;
  grid.ratio = 2.0;
  grid.refinements = 0;
  grid.values = {args.h};
  FamilySpec family = parse_family(args.family);
  std::vector<WeightMatrix> set = build_weight_set(data.X, grid, family);
  const WeightMatrix& W = set.front();

  std::cerr << "family " << family_spec_name(family) << ", h = " << sig6(args.h)
            << ", basis dimension " << W.basis_dim
            << (W.degenerate ? ", degenerate" : "") << "\n";

  const Eigen::MatrixXd dense = W.entries;
  std::ostringstream csv;
  for (int i = 0; i < dense.rows(); ++i) {
    for (int j = 0; j < dense.cols(); ++j) {
      if (j > 0) csv << ",";
      csv << g17(dense(i, j));
    }
    csv << "\n";
  }
  if (args.out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(args.out_path);
    if (!out) throw DataError("cannot open output file '" + args.out_path + "'");
    out << csv.str();
    std::cerr << "weight matrix written to " << args.out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"data-driven smooth specification test for parametric regression"};
  app.require_subcommand(1);

  TestArgs targs;
  CLI::App* test = app.add_subcommand("test", "run the specification test on a dataset");
  test->add_option("--data", targs.data_path, "CSV dataset, covariates then response")
      ->required();
  test->add_option("--model", targs.model,
                   "null model: zero, linear, affine-p, sum-of-linears");
  test->add_option("--family", targs.family,
                   "smoother family: poly, piecewise:<qbar>, kernel:<kind>, additive");
  test->add_option("--h0", targs.h0, "baseline bandwidth");
  test->add_option("--a", targs.a, "grid refinement factor (> 1)");
  test->add_option("--Jn", targs.Jn, "number of grid refinements");
  test->add_option("--c", targs.c, "penalty constant");
  test->add_option("--alpha", targs.alpha, "nominal level");
  test->add_option("--mode", targs.mode, "threshold mode: asymptotic or bootstrap:<B>");
  test->add_option("--variance", targs.variance,
                   "variance estimator: rice, local:<b>, known:<v>");
  test->add_option("--multiplier", targs.multiplier,
                   "bootstrap multiplier: two-point, rademacher, gaussian");
  test->add_option("--seed", targs.seed, "master seed");
  test->add_option("--jobs", targs.jobs, "worker threads for the bootstrap");
  test->add_option("--out", targs.out_path, "write the per-h table to this file");

  SimulateArgs sargs;
  CLI::App* simulate = app.add_subcommand("simulate", "run a Monte Carlo experiment");
  simulate->add_option("--preset", sargs.preset, "built-in experiment: table1 .. table5");
  simulate->add_option("--config", sargs.config_path, "experiment config file");
  simulate->add_option("--seed", sargs.seed, "master seed override");
  simulate->add_option("--jobs", sargs.jobs, "worker threads across replications");
  simulate->add_flag("--full-scale", sargs.full_scale, "full replication counts");
  simulate->add_option("--out", sargs.out_path, "write the rejection table CSV here");

  WeightsArgs wargs;
  CLI::App* weights = app.add_subcommand("weights", "export a weight matrix as dense CSV");
  weights->add_option("--data", wargs.data_path, "CSV dataset, covariates then response")
      ->required();
  weights->add_option("--family", wargs.family,
                      "smoother family: poly, piecewise:<qbar>, kernel:<kind>, additive");
  weights->add_option("--bandwidth", wargs.h, "bandwidth");
  weights->add_option("--out", wargs.out_path, "write the matrix to this file");

  try {
    app.parse(argc, argv);
    sargs.seed_set = simulate->count("--seed") > 0;
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (test->parsed()) return cmd_test(targs);
    if (simulate->parsed()) return cmd_simulate(sargs);
    if (weights->parsed()) return cmd_weights(wargs);
    throw aloft::UsageError("no subcommand given");
  } catch (const aloft::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const aloft::DegeneracyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const aloft::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
