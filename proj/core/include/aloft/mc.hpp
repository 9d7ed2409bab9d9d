#ifndef ALOFT_MC_HPP
#define ALOFT_MC_HPP

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "aloft/engine.hpp"

namespace aloft {

enum class ErrorFamily {
  gaussian,
  exponential_centered,
  student5_standardized,
  heteroscedastic_gaussian
};

const char* error_family_name(ErrorFamily family);
ErrorFamily parse_error_family(const std::string& name);

// Experiment data-generating process:
//   Y = theta1 + theta2 X + r cos(2 pi t X) + eps,  X ~ U[-1,1].
// Every error family has unit variance (conditionally on X for the
// heteroscedastic one, whose conditional variance is (1 + 3X^2)/3).
struct DgpSpec {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double r = 0.0;  // alternative amplitude; 0 is the null
  int t = 2;       // cosine frequency
  ErrorFamily error_family = ErrorFamily::gaussian;
  int n = 150;
};

// X on the raw [-1,1] scale (n x 1), plus Y. Pure function of
// (spec, seed, replicate).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> generate_dgp(const DgpSpec& spec,
                                                         std::uint64_t seed,
                                                         long replicate);

// Coordinatewise [-1,1] -> [0,1] map applied before the smoothers see the
// design.
Eigen::MatrixXd map_to_unit(const Eigen::MatrixXd& X);

struct LabeledVariant {
  std::string label;
  VariantSpec spec;
};

struct ScenarioSpec {
  std::string name;
  DgpSpec dgp;
  long replications = 1000;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<ScenarioSpec> scenarios;
  std::string model = "zero";  // fitted null model, via model_registry
  TestConfig test;
  std::vector<LabeledVariant> variants;
  std::vector<double> levels = {0.02, 0.05};
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct TableCell {
  std::string scenario;
  std::string test;
  double c = 0.0;  // 0 when the variant carries no penalty constant
  double level = 0.05;
  long rejections = 0;
  long replications = 0;

  double frequency() const;
  double mc_se() const;  // sqrt(p(1-p)/R)

  bool operator==(const TableCell&) const = default;
};

struct RejectionTable {
  std::vector<TableCell> cells;
  long failures = 0;              // replicates excluded after an error
  long invariant_violations = 0;  // penalized-selection identity failures
  long selection_checks = 0;      // identities checked (outcome count)

  bool operator==(const RejectionTable&) const = default;
};

// Runs every scenario x variant x level at the configured replication counts.
// Deterministic given (cfg.seed, cfg) for any cfg.jobs.
RejectionTable run_experiment(const ExperimentConfig& cfg);

void write_table_csv(const RejectionTable& table, std::ostream& out);
RejectionTable parse_table_csv(std::istream& in);

// Aligned text layout: one block row per scenario, one line per level,
// one column per (test, c).
std::string render_table(const RejectionTable& table);

// Writes the CSV to `path` and the text rendering beside it with a .txt
// extension.
void emit_table(const RejectionTable& table, const std::string& path);

// table1 .. table5 designs at desk scale (1000 null / 500 alternative
// replications, B = 199); full_scale raises replications to 5000/1000.
ExperimentConfig preset_experiment(const std::string& name,
                                   bool full_scale = false);

// Plain-text config: `key = value` lines with [scenario.NAME] sections.
ExperimentConfig load_experiment_config(std::istream& in);

}  // namespace aloft

#endif
