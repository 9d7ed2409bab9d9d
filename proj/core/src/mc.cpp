#include "aloft/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "aloft/errors.hpp"
#include "aloft/rng.hpp"

namespace aloft {

namespace {

constexpr std::uint64_t kDgpStream = 0x646770ULL;
constexpr std::uint64_t kScenarioStream = 0x7363656eULL;
constexpr std::uint64_t kBootStream = 0x626f6f74ULL;
constexpr std::uint64_t kFitStream = 0x66697430ULL;
constexpr double kTau = 6.283185307179586477;

std::string fmt_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_sig(double x, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size() || !std::isfinite(v))
    throw UsageError(what + ": expected a number, got '" + text + "'");
  return v;
}

long parse_long(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size())
    throw UsageError(what + ": expected an integer, got '" + text + "'");
  return v;
}

// Selection identities re-checked from the recorded per-bandwidth rows: the
// penalized objective is maximal at the selected index, and the selection
// leaves the baseline exactly when no finer bandwidth beats it.
int selection_violations(const TestOutcome& o) {
  int viol = 0;
  const auto& rows = o.per_h;
  const double base = rows[0].objective;  // vdiff is 0 at the baseline
  if (!(rows[static_cast<std::size_t>(o.selected_index)].objective >= base))
    ++viol;
  bool any_beats = false;
  for (std::size_t j = 1; j < rows.size(); ++j)
    if (rows[j].objective > base) any_beats = true;
  if ((o.selected_index != 0) != any_beats) ++viol;
  return viol;
}

LabeledVariant parse_variant_token(const std::string& token,
                                   const SmootherGrid& grid) {
  const auto colon = token.find(':');
  const std::string head = token.substr(0, colon);
  const std::string arg =
      colon == std::string::npos ? "" : token.substr(colon + 1);
  auto need_c = [&]() {
    const double c = parse_double(arg, "variant '" + head + "' penalty c");
    if (!(c > 0.0))
      throw UsageError("variant '" + head + "': c must be positive");
    return c;
  };
  if (token == "h0")
    return {"h0", VariantSpec{TestKind::fixed_h, 1.0, grid.values.front()}};
  if (token == "hJ" || token == "finest")
    return {"finest", VariantSpec{TestKind::fixed_h, 1.0, grid.values.back()}};
  if (token == "max")
    return {"max", VariantSpec{TestKind::max_studentized, 1.0, 0.0}};
  if (head == "ours")
    return {"ours", VariantSpec{TestKind::penalized, need_c(), 0.0}};
  if (head == "self")
    return {"self-norm", VariantSpec{TestKind::self_normalized, need_c(), 0.0}};
  throw UsageError("unknown variant token '" + token +
                   "' (known: h0, finest, max, ours:<c>, self:<c>)");
}

}  // namespace

const char* error_family_name(ErrorFamily family) {
  switch (family) {
    case ErrorFamily::gaussian: return "gaussian";
    case ErrorFamily::exponential_centered: return "exponential-centered";
    case ErrorFamily::student5_standardized: return "student5-standardized";
    case ErrorFamily::heteroscedastic_gaussian: return "heteroscedastic-gaussian";
  }
  return "?";
}

ErrorFamily parse_error_family(const std::string& name) {
  if (name == "gaussian" || name == "normal") return ErrorFamily::gaussian;
  if (name == "exponential" || name == "exponential-centered")
    return ErrorFamily::exponential_centered;
  if (name == "student5" || name == "student5-standardized")
    return ErrorFamily::student5_standardized;
  if (name == "heteroscedastic" || name == "heteroscedastic-gaussian")
    return ErrorFamily::heteroscedastic_gaussian;
  throw UsageError("unknown error family '" + name +
                   "' (known: gaussian, exponential-centered, "
                   "student5-standardized, heteroscedastic-gaussian)");
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> generate_dgp(const DgpSpec& spec,
                                                         std::uint64_t seed,
                                                         long replicate) {
  if (spec.n < 1) throw UsageError("generate_dgp: n must be >= 1");
  if (replicate < 0) throw UsageError("generate_dgp: replicate must be >= 0");

  Rng rng(seed, {kDgpStream, static_cast<std::uint64_t>(replicate)});
  Eigen::MatrixXd X(spec.n, 1);
  Eigen::VectorXd Y(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    double eps = 0.0;
    switch (spec.error_family) {
      case ErrorFamily::gaussian:
        eps = rng.normal();
        break;
      case ErrorFamily::exponential_centered:
        eps = rng.exponential() - 1.0;
        break;
      case ErrorFamily::student5_standardized: {
        const double z = rng.normal();
        double chi2 = 0.0;
        for (int k = 0; k < 5; ++k) {
          const double g = rng.normal();
          chi2 += g * g;
        }
        // t5 has variance 5/3; divide it out
        eps = z / std::sqrt(chi2 / 5.0) / std::sqrt(5.0 / 3.0);
        break;
      }
      case ErrorFamily::heteroscedastic_gaussian:
        eps = rng.normal() * std::sqrt((1.0 + 3.0 * x * x) / 3.0);
        break;
    }
    X(i, 0) = x;
    Y(i) = spec.theta1 + spec.theta2 * x +
           spec.r * std::cos(kTau * spec.t * x) + eps;
  }
  return {std::move(X), std::move(Y)};
}

Eigen::MatrixXd map_to_unit(const Eigen::MatrixXd& X) {
  return ((X.array() + 1.0) / 2.0).matrix();
}

double TableCell::frequency() const {
  return replications > 0
             ? static_cast<double>(rejections) / static_cast<double>(replications)
             : 0.0;
}

double TableCell::mc_se() const {
  if (replications <= 0) return 0.0;
  const double p = frequency();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(replications));
}

RejectionTable run_experiment(const ExperimentConfig& cfg) {
  if (cfg.scenarios.empty()) throw UsageError("run_experiment: no scenarios");
  if (cfg.variants.empty()) throw UsageError("run_experiment: no variants");
  if (cfg.levels.empty()) throw UsageError("run_experiment: no levels");
  for (double a : cfg.levels)
    if (!(a > 0.0 && a <= 1.0))
      throw UsageError("run_experiment: levels must lie in (0,1]");
  if (cfg.jobs < 1) throw UsageError("run_experiment: jobs must be >= 1");
  const std::size_t decisions = cfg.variants.size() * cfg.levels.size();
  if (decisions > 32)
    throw UsageError("run_experiment: at most 32 variant x level cells");

  const ParametricModel model = model_registry(cfg.model, 1);
  std::vector<VariantSpec> specs(cfg.variants.size());
  for (std::size_t v = 0; v < cfg.variants.size(); ++v)
    specs[v] = cfg.variants[v].spec;

  RejectionTable table;
  for (std::size_t si = 0; si < cfg.scenarios.size(); ++si) {
    const ScenarioSpec& scenario = cfg.scenarios[si];
    if (scenario.replications < 1)
      throw UsageError("run_experiment: replications must be >= 1");
    const long R = scenario.replications;
    const std::uint64_t dgp_seed =
        derive_seed(cfg.seed, {kScenarioStream, static_cast<std::uint64_t>(si)});

    struct RepResult {
      std::uint32_t reject_bits = 0;
      std::uint16_t checks = 0;
      std::uint16_t violations = 0;
      bool failed = false;
    };
    std::vector<RepResult> slots(static_cast<std::size_t>(R));

    auto worker = [&](long begin, long stride) {
      for (long rep = begin; rep < R; rep += stride) {
        RepResult& slot = slots[static_cast<std::size_t>(rep)];
        try {
          auto [Xraw, Y] = generate_dgp(scenario.dgp, dgp_seed, rep);
          const Eigen::MatrixXd X = map_to_unit(Xraw);
          TestConfig tc = cfg.test;
          tc.jobs = 1;  // parallelism lives at the replicate level
          tc.boot.seed = derive_seed(
              cfg.seed, {kBootStream, static_cast<std::uint64_t>(si),
                         static_cast<std::uint64_t>(rep)});
          tc.fit.seed = derive_seed(
              cfg.seed, {kFitStream, static_cast<std::uint64_t>(si),
                         static_cast<std::uint64_t>(rep)});
          const auto outcomes = run_variants(X, Y, model, tc, specs);
          int bit = 0;
          for (const auto& outcome : outcomes) {
            for (double level : cfg.levels) {
              if (reject_at(outcome, level))
                slot.reject_bits |= (1u << bit);
              ++bit;
            }
            if (outcome.kind == TestKind::penalized ||
                outcome.kind == TestKind::self_normalized) {
              slot.checks += 1;
              slot.violations +=
                  static_cast<std::uint16_t>(selection_violations(outcome));
            }
          }
        } catch (const std::exception&) {
          slot.failed = true;
        }
      }
    };

    const long jobs = std::clamp<long>(cfg.jobs, 1, R);
    if (jobs == 1) {
      worker(0, 1);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(jobs));
      for (long t = 0; t < jobs; ++t) pool.emplace_back(worker, t, jobs);
      for (auto& th : pool) th.join();
    }

    long failures = 0;
    std::vector<long> rejections(decisions, 0);
    for (const RepResult& slot : slots) {
      if (slot.failed) {
        ++failures;
        continue;
      }
      for (std::size_t d = 0; d < decisions; ++d)
        if (slot.reject_bits & (1u << d)) ++rejections[d];
      table.selection_checks += slot.checks;
      table.invariant_violations += slot.violations;
    }
    table.failures += failures;

    std::size_t d = 0;
    for (const auto& variant : cfg.variants) {
      const bool penalized = variant.spec.kind == TestKind::penalized ||
                             variant.spec.kind == TestKind::self_normalized;
      for (double level : cfg.levels) {
        TableCell cell;
        cell.scenario = scenario.name;
        cell.test = variant.label;
        cell.c = penalized ? variant.spec.c : 0.0;
        cell.level = level;
        cell.rejections = rejections[d++];
        cell.replications = R - failures;
        table.cells.push_back(std::move(cell));
      }
    }
  }
  return table;
}

namespace {
const char* kCsvHeader =
    "scenario,test,c,level,rejections,replications,frequency,mc_se";
}

void write_table_csv(const RejectionTable& table, std::ostream& out) {
  out << "# failures = " << table.failures << "\n";
  out << "# invariant_violations = " << table.invariant_violations << "\n";
  out << "# selection_checks = " << table.selection_checks << "\n";
  out << kCsvHeader << "\n";
  for (const auto& cell : table.cells) {
    out << cell.scenario << ',' << cell.test << ','
        << (cell.c == 0.0 ? std::string() : fmt_g17(cell.c)) << ','
        << fmt_g17(cell.level) << ',' << cell.rejections << ','
        << cell.replications << ',' << fmt_sig(cell.frequency(), "%.6g") << ','
        << fmt_sig(cell.mc_se(), "%.3g") << "\n";
  }
}

RejectionTable parse_table_csv(std::istream& in) {
  RejectionTable table;
  std::string line;
  bool header_seen = false;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        const std::string key = trim(line.substr(1, eq - 1));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "failures")
          table.failures = parse_long(value, "failures");
        else if (key == "invariant_violations")
          table.invariant_violations = parse_long(value, "invariant_violations");
        else if (key == "selection_checks")
          table.selection_checks = parse_long(value, "selection_checks");
      }
      continue;
    }
    if (!header_seen) {
      if (line != kCsvHeader)
        throw DataError("table CSV line " + std::to_string(line_no) +
                        ": unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 8)
      throw DataError("table CSV line " + std::to_string(line_no) +
                      ": expected 8 fields, got " +
                      std::to_string(fields.size()));
    TableCell cell;
    cell.scenario = fields[0];
    cell.test = fields[1];
    cell.c = fields[2].empty() ? 0.0 : parse_double(fields[2], "c");
    cell.level = parse_double(fields[3], "level");
    cell.rejections = parse_long(fields[4], "rejections");
    cell.replications = parse_long(fields[5], "replications");
    table.cells.push_back(std::move(cell));
  }
  if (!header_seen) throw DataError("table CSV: missing header row");
  return table;
}

std::string render_table(const RejectionTable& table) {
  // column identity is (test, c); order of first appearance
  std::vector<std::pair<std::string, double>> columns;
  std::vector<std::string> scenarios;
  for (const auto& cell : table.cells) {
    const std::pair<std::string, double> col{cell.test, cell.c};
    if (std::find(columns.begin(), columns.end(), col) == columns.end())
      columns.push_back(col);
    if (std::find(scenarios.begin(), scenarios.end(), cell.scenario) ==
        scenarios.end())
      scenarios.push_back(cell.scenario);
  }
  std::vector<std::string> labels(columns.size());
  for (std::size_t k = 0; k < columns.size(); ++k) {
    labels[k] = columns[k].first;
    if (columns[k].second != 0.0)
      labels[k] += " c=" + fmt_sig(columns[k].second, "%g");
  }

  auto find_cell = [&](const std::string& scenario,
                       const std::pair<std::string, double>& col,
                       double level) -> const TableCell* {
    for (const auto& cell : table.cells)
      if (cell.scenario == scenario && cell.test == col.first &&
          cell.c == col.second && cell.level == level)
        return &cell;
    return nullptr;
  };

  std::vector<double> levels;
  for (const auto& cell : table.cells)
    if (std::find(levels.begin(), levels.end(), cell.level) == levels.end())
      levels.push_back(cell.level);

  std::size_t name_w = 8;
  for (const auto& s : scenarios) name_w = std::max(name_w, s.size());

  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(name_w + 2)) << "scenario"
     << std::setw(7) << "level";
  for (const auto& label : labels)
    os << std::right << std::setw(static_cast<int>(std::max<std::size_t>(
              label.size() + 2, 8))) << label;
  os << "\n";
  for (const auto& scenario : scenarios) {
    bool first = true;
    for (double level : levels) {
      os << std::left << std::setw(static_cast<int>(name_w + 2))
         << (first ? scenario : std::string());
      first = false;
      os << std::setw(7) << (fmt_sig(level * 100.0, "%g") + "%");
      for (std::size_t k = 0; k < columns.size(); ++k) {
        const TableCell* cell = find_cell(scenario, columns[k], level);
        const int w = static_cast<int>(std::max<std::size_t>(
            labels[k].size() + 2, 8));
        os << std::right << std::setw(w)
           << (cell ? fmt_sig(cell->frequency() * 100.0, "%.1f") : "-");
      }
      os << "\n";
    }
  }
  if (table.failures > 0)
    os << "excluded replicates: " << table.failures << "\n";
  return os.str();
}

void emit_table(const RejectionTable& table, const std::string& path) {
  {
    std::ofstream csv(path);
    if (!csv) throw DataError("cannot write table CSV to '" + path + "'");
    write_table_csv(table, csv);
    if (!csv.good()) throw DataError("short write to '" + path + "'");
  }
  std::filesystem::path text_path(path);
  text_path.replace_extension(".txt");
  std::ofstream text(text_path);
  if (!text)
    throw DataError("cannot write table rendering to '" + text_path.string() +
                    "'");
  text << render_table(table);
}

ExperimentConfig preset_experiment(const std::string& name, bool full_scale) {
  const double amplitude = std::sqrt(2.0 / 3.0);
  const long null_reps = full_scale ? 5000 : 1000;
  const long alt_reps = full_scale ? 1000 : 500;

  ExperimentConfig cfg;
  cfg.name = name;
  cfg.test.grid = build_grid(0.25, 2.0, 5, /*piecewise=*/true);
  cfg.test.family.family = SmootherFamily::piecewise;
  cfg.test.family.qbar = 0;
  cfg.test.alpha = 0.05;
  cfg.test.mode = ThresholdMode::bootstrap;
  cfg.test.boot.B = 199;
  cfg.test.boot.multiplier = MultiplierLaw::two_point_golden;
  cfg.test.variance.method = VarianceMethod::rice;
  cfg.levels = {0.02, 0.05};

  ErrorFamily family = ErrorFamily::gaussian;
  double theta1 = 0.0, theta2 = 0.0;
  if (name == "table1") {
    // the only table that also reports the self-normalized comparator
  } else if (name == "table2") {
    family = ErrorFamily::exponential_centered;
  } else if (name == "table3") {
    family = ErrorFamily::student5_standardized;
  } else if (name == "table4") {
    family = ErrorFamily::heteroscedastic_gaussian;
    cfg.test.variance.method = VarianceMethod::local;
    // b_n = 1/8 on the raw [-1,1] scale is 1/16 after the [0,1] map
    cfg.test.variance.neighborhood = 1.0 / 16.0;
  } else if (name == "table5") {
    cfg.model = "linear";
    theta1 = 1.0;
    theta2 = 3.0;
  } else {
    throw UsageError("unknown preset '" + name +
                     "' (known: table1, table2, table3, table4, table5)");
  }

  const auto& grid = cfg.test.grid;
  cfg.variants.push_back(
      {"h0", VariantSpec{TestKind::fixed_h, 1.0, grid.values.front()}});
  cfg.variants.push_back(
      {"h5", VariantSpec{TestKind::fixed_h, 1.0, grid.values.back()}});
  cfg.variants.push_back({"max", VariantSpec{TestKind::max_studentized, 1.0, 0.0}});
  if (name == "table1")
    for (double c : {1.0, 1.5, 2.0})
      cfg.variants.push_back(
          {"self-norm", VariantSpec{TestKind::self_normalized, c, 0.0}});
  for (double c : {1.0, 1.5, 2.0})
    cfg.variants.push_back({"ours", VariantSpec{TestKind::penalized, c, 0.0}});

  auto scenario = [&](const std::string& sname, double r, int t, long reps) {
    ScenarioSpec s;
    s.name = sname;
    s.dgp.theta1 = theta1;
    s.dgp.theta2 = theta2;
    s.dgp.r = r;
    s.dgp.t = t;
    s.dgp.error_family = family;
    s.dgp.n = 150;
    s.replications = reps;
    return s;
  };
  cfg.scenarios.push_back(scenario("H0", 0.0, 2, null_reps));
  cfg.scenarios.push_back(scenario("t=2", amplitude, 2, alt_reps));
  cfg.scenarios.push_back(scenario("t=5", amplitude, 5, alt_reps));
  cfg.scenarios.push_back(scenario("t=10", amplitude, 10, alt_reps));
  return cfg;
}

ExperimentConfig load_experiment_config(std::istream& in) {
  ExperimentConfig cfg;
  cfg.test.mode = ThresholdMode::bootstrap;

  double h0 = 0.25, ratio = 2.0;
  int Jn = 5;
  std::string family_text = "piecewise:0";
  std::string variance_text = "rice";
  std::string variants_text = "h0,finest,max,ours:1";
  long null_reps = 1000, alt_reps = 500;

  struct PendingScenario {
    std::string name;
    DgpSpec dgp;
    long reps = -1;  // -1: use null_reps / alt_reps by amplitude
  };
  std::vector<PendingScenario> scenarios;
  PendingScenario* current = nullptr;

  std::string line;
  long line_no = 0;
  auto fail = [&](const std::string& message) {
    throw UsageError("config line " + std::to_string(line_no) + ": " + message);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      const std::string section = trim(line.substr(1, line.size() - 2));
      if (section.rfind("scenario.", 0) != 0)
        fail("unknown section '" + section + "' (expected [scenario.NAME])");
      const std::string sname = trim(section.substr(9));
      if (sname.empty()) fail("scenario name is empty");
      if (sname.find(',') != std::string::npos)
        fail("scenario name must not contain a comma");
      scenarios.push_back(PendingScenario{sname, DgpSpec{}, -1});
      current = &scenarios.back();
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail("expected 'key = value'");

    try {
      if (current == nullptr) {
        if (key == "name") cfg.name = value;
        else if (key == "seed") {
          std::size_t used = 0;
          cfg.seed = std::stoull(value, &used);
          if (used != value.size()) fail("seed: expected an unsigned integer");
        }
        else if (key == "jobs") cfg.jobs = static_cast<int>(parse_long(value, key));
        else if (key == "model") cfg.model = value;
        else if (key == "family") family_text = value;
        else if (key == "h0") h0 = parse_double(value, key);
        else if (key == "a") ratio = parse_double(value, key);
        else if (key == "Jn") Jn = static_cast<int>(parse_long(value, key));
        else if (key == "B") cfg.test.boot.B = static_cast<int>(parse_long(value, key));
        else if (key == "multiplier") cfg.test.boot.multiplier = parse_multiplier(value);
        else if (key == "variance") variance_text = value;
        else if (key == "alpha") cfg.test.alpha = parse_double(value, key);
        else if (key == "variants") variants_text = value;
        else if (key == "null_reps") null_reps = parse_long(value, key);
        else if (key == "alt_reps") alt_reps = parse_long(value, key);
        else if (key == "levels") {
          cfg.levels.clear();
          for (const auto& tok : split(value, ','))
            cfg.levels.push_back(parse_double(trim(tok), "level"));
        } else {
          fail("unknown key '" + key + "'");
        }
      } else {
        DgpSpec& dgp = current->dgp;
        if (key == "n") dgp.n = static_cast<int>(parse_long(value, key));
        else if (key == "theta1") dgp.theta1 = parse_double(value, key);
        else if (key == "theta2") dgp.theta2 = parse_double(value, key);
        else if (key == "r") dgp.r = parse_double(value, key);
        else if (key == "t") dgp.t = static_cast<int>(parse_long(value, key));
        else if (key == "errors") dgp.error_family = parse_error_family(value);
        else if (key == "reps") current->reps = parse_long(value, key);
        else fail("unknown scenario key '" + key + "'");
      }
    } catch (const UsageError& e) {
      if (std::string(e.what()).rfind("config line", 0) == 0) throw;
      fail(e.what());
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }

  if (scenarios.empty())
    throw UsageError("config: no [scenario.NAME] sections found");

  const FamilySpec family = parse_family(family_text);
  cfg.test.family = family;
  cfg.test.grid = build_grid(h0, ratio, Jn,
                             family.family == SmootherFamily::piecewise);
  cfg.test.variance = parse_variance(variance_text);
  for (const auto& tok : split(variants_text, ','))
    cfg.variants.push_back(parse_variant_token(trim(tok), cfg.test.grid));

  for (auto& pending : scenarios) {
    ScenarioSpec s;
    s.name = pending.name;
    s.dgp = pending.dgp;
    s.replications =
        pending.reps >= 0 ? pending.reps
                          : (pending.dgp.r == 0.0 ? null_reps : alt_reps);
    cfg.scenarios.push_back(std::move(s));
  }
  return cfg;
}

}  // namespace aloft
