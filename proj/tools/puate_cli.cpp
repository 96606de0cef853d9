// Command-line front end: synthetic data generation, single-shot estimation,
// and repeated-trial experiments.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime/estimation error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "puate/casecontrol.hpp"
#include "puate/censoring.hpp"
#include "puate/dgp.hpp"
#include "puate/errors.hpp"
#include "puate/montecarlo.hpp"
#include "puate/rng.hpp"

namespace {

using nlohmann::json;
using namespace puate;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Scenario files

void require_known_keys(const json& j, const std::vector<std::string>& known) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const auto& key : known) ok = ok || key == item.key();
    if (!ok) throw ConfigError("unknown scenario key '" + item.key() + "'");
  }
}

Vec json_vec(const json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

std::variant<CensoringScenario, CaseControlScenario> load_scenario_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario file is not valid JSON: ") +
                      e.what());
  }

  const std::string setting = j.value("setting", "censoring");
  if (setting == "censoring") {
    require_known_keys(j, {"setting", "flavor", "n", "p", "c", "tau0", "trunc",
                           "beta", "beta_prop1", "beta_prop2", "noise_sd"});
    CensoringScenario sc;
    if (j.value("flavor", "linear") == "nonlinear") {
      sc.flavor = CensoringScenario::Flavor::Nonlinear;
      sc.p = 10;
    } else if (j.value("flavor", "linear") != "linear") {
      throw ConfigError("flavor must be linear or nonlinear");
    }
    sc.n = j.value("n", sc.n);
    sc.p = j.value("p", sc.p);
    sc.c = j.value("c", sc.c);
    sc.tau0 = j.value("tau0", sc.tau0);
    sc.noise_sd = j.value("noise_sd", sc.noise_sd);
    if (j.contains("trunc")) {
      if (!j["trunc"].is_array() || j["trunc"].size() != 2) {
        throw ConfigError("trunc must be [lo, hi]");
      }
      sc.trunc_lo = j["trunc"][0].get<double>();
      sc.trunc_hi = j["trunc"][1].get<double>();
    }
    if (j.contains("beta") && j["beta"].is_array()) sc.beta = json_vec(j["beta"]);
    if (j.contains("beta_prop1")) sc.beta_prop1 = json_vec(j["beta_prop1"]);
    if (j.contains("beta_prop2")) sc.beta_prop2 = json_vec(j["beta_prop2"]);
    if (sc.n < 1 || sc.p < 1 || sc.c < 0.0 || sc.c > 1.0 ||
        !(sc.trunc_lo < sc.trunc_hi)) {
      throw ConfigError("scenario values out of range");
    }
    return sc;
  }
  if (setting == "casecontrol") {
    require_known_keys(j, {"setting", "flavor", "m", "l", "p", "mu_p", "mu_n",
                           "class_prior", "tau0", "beta", "noise_sd"});
    CaseControlScenario sc;
    if (j.value("flavor", "linear") == "nonlinear") {
      sc.flavor = CaseControlScenario::Flavor::Nonlinear;
    } else if (j.value("flavor", "linear") != "linear") {
      throw ConfigError("flavor must be linear or nonlinear");
    }
    sc.m = j.value("m", sc.m);
    sc.l = j.value("l", sc.l);
    sc.p = j.value("p", sc.p);
    sc.mu_p = j.value("mu_p", sc.mu_p);
    sc.mu_n = j.value("mu_n", sc.mu_n);
    sc.class_prior = j.value("class_prior", sc.class_prior);
    sc.tau0 = j.value("tau0", sc.tau0);
    sc.noise_sd = j.value("noise_sd", sc.noise_sd);
    if (j.contains("beta") && j["beta"].is_array()) sc.beta = json_vec(j["beta"]);
    if (sc.m < 1 || sc.l < 1 || sc.p < 1 || sc.class_prior <= 0.0 ||
        sc.class_prior >= 1.0) {
      throw ConfigError("scenario values out of range");
    }
    return sc;
  }
  throw ConfigError("setting must be censoring or casecontrol");
}

// ---------------------------------------------------------------------------
// Shared CLI options

struct CommonOptions {
  std::string scenario_path;
  std::string preset;
  std::string method = "all";
  std::string g_mode = "plugin";
  std::string e_mode = "plugin";
  int folds = 2;
  long trials = -1;
  std::uint64_t seed = 1;
  int workers = 1;
  double level = 0.95;
  double clip_eps = kDefaultClipEps;
  std::string out;
  bool with_oracle = false;
  std::string covariates_path;
  std::string covariates_schema;
  std::string view = "censoring";
};

void add_common_flags(CLI::App* cmd, CommonOptions* opts) {
  cmd->add_option("--scenario", opts->scenario_path, "Scenario file (JSON)");
  cmd->add_option("--seed", opts->seed, "Base random seed");
  cmd->add_option("--level", opts->level, "Confidence level")
      ->check(CLI::Range(0.5, 0.9999));
  cmd->add_option("--clip-eps", opts->clip_eps, "Probability clipping floor")
      ->check(CLI::Range(0.0, 0.499));
  cmd->add_option("--folds", opts->folds, "Cross-fitting folds")
      ->check(CLI::Range(2, 10));
  cmd->add_option("--out", opts->out, "Output path (or prefix)");
}

NuisanceMode parse_g_mode(const std::string& g) {
  if (g == "true") return NuisanceMode::TrueProp;
  if (g == "plugin") return NuisanceMode::PlugIn;
  if (g == "aux") return NuisanceMode::Aux;
  if (g == "oracle") return NuisanceMode::Oracle;
  throw ConfigError("--g must be one of true|plugin|aux|oracle");
}

NuisanceMode parse_e_mode(const std::string& e) {
  if (e == "true") return NuisanceMode::TrueProp;
  if (e == "plugin") return NuisanceMode::PlugIn;
  if (e == "oracle") return NuisanceMode::Oracle;
  throw ConfigError("--e must be one of true|plugin|oracle");
}

std::vector<Method> parse_methods(const std::string& method) {
  if (method == "all") return {Method::Ipw, Method::Dm, Method::Efficient};
  if (method == "eff") return {Method::Efficient};
  if (method == "ipw") return {Method::Ipw};
  if (method == "dm") return {Method::Dm};
  throw ConfigError("--method must be one of ipw|dm|eff|all");
}

// ---------------------------------------------------------------------------
// Dataset CSV writing/reading

void write_censoring_csv(const std::string& path, const CensoringDraw& draw,
                         bool with_oracle) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  const Eigen::Index p = draw.data.x.cols();
  for (Eigen::Index j = 0; j < p; ++j) out << "x" << (j + 1) << ',';
  out << "o,y";
  if (with_oracle) out << ",pi1,g1,mu_t,nu,d";
  out << '\n';
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (Eigen::Index i = 0; i < draw.data.size(); ++i) {
    for (Eigen::Index j = 0; j < p; ++j) out << num(draw.data.x(i, j)) << ',';
    out << draw.data.observed[static_cast<std::size_t>(i)] << ','
        << num(draw.data.y[i]);
    if (with_oracle) {
      const Vec x = draw.data.x.row(i).transpose();
      out << ',' << num(draw.oracle.pi1(x)) << ',' << num(draw.oracle.g1(x))
          << ',' << num(draw.oracle.mu_t(x)) << ',' << num(draw.oracle.nu(x))
          << ',' << draw.hidden_treatment[static_cast<std::size_t>(i)];
    }
    out << '\n';
  }
  if (!out) throw IoError("write failure on " + path);
}

void write_casecontrol_csv(const std::string& prefix,
                           const CaseControlDraw& draw, bool with_oracle) {
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  const Eigen::Index p = draw.data.x_treated.cols();

  {
    std::ofstream out(prefix + "_treated.csv");
    if (!out) throw IoError("cannot open " + prefix + "_treated.csv");
    for (Eigen::Index j = 0; j < p; ++j) out << "x" << (j + 1) << ',';
    out << 'y';
    if (with_oracle) out << ",e1,ratio,mu_t";
    out << '\n';
    for (Eigen::Index i = 0; i < draw.data.m(); ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        out << num(draw.data.x_treated(i, j)) << ',';
      }
      out << num(draw.data.y_treated[i]);
      if (with_oracle) {
        const Vec x = draw.data.x_treated.row(i).transpose();
        out << ',' << num(draw.oracle.e1(x)) << ',' << num(draw.oracle.ratio(x))
            << ',' << num(draw.oracle.mu_t(x));
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(prefix + "_unlabeled.csv");
    if (!out) throw IoError("cannot open " + prefix + "_unlabeled.csv");
    for (Eigen::Index j = 0; j < p; ++j) out << "x" << (j + 1) << ',';
    out << 'y';
    if (with_oracle) out << ",e1,ratio,mu_t,mu_u,d";
    out << '\n';
    for (Eigen::Index i = 0; i < draw.data.l(); ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        out << num(draw.data.x_unlabeled(i, j)) << ',';
      }
      out << num(draw.data.y_unlabeled[i]);
      if (with_oracle) {
        const Vec x = draw.data.x_unlabeled.row(i).transpose();
        out << ',' << num(draw.oracle.e1(x)) << ',' << num(draw.oracle.ratio(x))
            << ',' << num(draw.oracle.mu_t(x)) << ','
            << num(draw.oracle.mu_u(x)) << ','
            << draw.hidden_treatment[static_cast<std::size_t>(i)];
      }
      out << '\n';
    }
  }
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

RawTable read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file " + path);
  RawTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty data file " + path);
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
      cell.pop_back();
    }
    table.header.push_back(cell);
  }
  long row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    long col = 0;
    while (std::getline(ss, cell, ',')) {
      ++col;
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw CsvError("non-numeric cell '" + cell + "' in " + path, row_no,
                       col);
      }
    }
    if (row.size() != table.header.size()) {
      throw CsvError("wrong cell count in " + path, row_no,
                     static_cast<long>(row.size()) + 1);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw ConfigError("no data rows in " + path);
  return table;
}

long find_column(const RawTable& table, const std::string& name) {
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (table.header[j] == name) return static_cast<long>(j);
  }
  return -1;
}

CensoringDataset read_censoring_dataset(const std::string& path) {
  const RawTable table = read_numeric_csv(path);
  const long o_col = find_column(table, "o");
  const long y_col = find_column(table, "y");
  if (o_col < 0 || y_col < 0) {
    throw ConfigError("censoring data must have 'o' and 'y' columns");
  }
  std::vector<long> x_cols;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (table.header[j].rfind('x', 0) == 0) {
      x_cols.push_back(static_cast<long>(j));
    }
  }
  if (x_cols.empty()) throw ConfigError("no covariate columns named x1..xp");

  CensoringDataset data;
  const long n = static_cast<long>(table.rows.size());
  data.x.resize(n, static_cast<Eigen::Index>(x_cols.size()));
  data.y.resize(n);
  data.observed.resize(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < x_cols.size(); ++j) {
      data.x(i, static_cast<Eigen::Index>(j)) =
          row[static_cast<std::size_t>(x_cols[j])];
    }
    const double o = row[static_cast<std::size_t>(o_col)];
    if (o != 0.0 && o != 1.0) {
      throw ConfigError("observation column must be 0/1");
    }
    data.observed[static_cast<std::size_t>(i)] = o == 1.0 ? 1 : 0;
    data.y[i] = row[static_cast<std::size_t>(y_col)];
  }
  return data;
}

void read_xy(const std::string& path, Mat* x, Vec* y) {
  const RawTable table = read_numeric_csv(path);
  const long y_col = find_column(table, "y");
  if (y_col < 0) throw ConfigError("data must have a 'y' column");
  std::vector<long> x_cols;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (table.header[j].rfind('x', 0) == 0) {
      x_cols.push_back(static_cast<long>(j));
    }
  }
  if (x_cols.empty()) throw ConfigError("no covariate columns named x1..xp");
  const long n = static_cast<long>(table.rows.size());
  x->resize(n, static_cast<Eigen::Index>(x_cols.size()));
  y->resize(n);
  for (long i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < x_cols.size(); ++j) {
      (*x)(i, static_cast<Eigen::Index>(j)) =
          row[static_cast<std::size_t>(x_cols[j])];
    }
    (*y)[i] = row[static_cast<std::size_t>(y_col)];
  }
}

// ---------------------------------------------------------------------------
// Presets

McConfig build_preset(const CommonOptions& opts) {
  McConfig config;
  config.base_seed = opts.seed;
  config.level = opts.level;
  config.folds = opts.folds;
  config.workers = opts.workers;
  config.fit_options.clip_eps = opts.clip_eps;

  auto paired = [](std::vector<Method> methods, NuisanceMode known_mode) {
    std::vector<EstimatorChoice> choices;
    for (Method m : methods) choices.push_back({m, NuisanceMode::PlugIn});
    for (Method m : methods) choices.push_back({m, known_mode});
    return choices;
  };
  const std::vector<Method> all = {Method::Ipw, Method::Dm, Method::Efficient};

  if (opts.preset == "table1-censoring") {
    // Pinned design: coefficients frozen for reproducibility, labeling rate
    // 0.45, and a 0.01 probability floor so the fitted-propensity columns
    // keep bounded inverse weights.
    CensoringScenario sc;
    sc.n = 3000;
    sc.c = 0.45;
    sc.beta = Vec(3);
    sc.beta << 0.70710678118654746, -0.56568542494923801, 0.42426406871192851;
    config.scenario = sc;
    config.estimators = paired(all, NuisanceMode::TrueProp);
    config.trials = 500;
    config.fit_options.clip_eps = 0.01;
  } else if (opts.preset == "table1-casecontrol") {
    CaseControlScenario sc;
    sc.beta = Vec(3);
    sc.beta << 1.2, -0.9, 0.7;
    config.scenario = sc;
    config.estimators = paired(all, NuisanceMode::Oracle);
    config.trials = 500;
  } else if (opts.preset == "nonlinear-censoring") {
    CensoringScenario sc;
    sc.flavor = CensoringScenario::Flavor::Nonlinear;
    sc.p = 10;
    sc.n = 3000;
    sc.c = 0.5;
    config.scenario = sc;
    config.estimators = paired(all, NuisanceMode::TrueProp);
    config.trials = 500;
    config.fit_options.poly_degree = 2;
    config.fit_options.poly_interactions = true;
    config.fit_options.ridge = 1e-6;
    config.fit_options.clip_eps = 0.05;
  } else if (opts.preset == "nonlinear-casecontrol") {
    CaseControlScenario sc;
    sc.flavor = CaseControlScenario::Flavor::Nonlinear;
    config.scenario = sc;
    config.estimators = paired(all, NuisanceMode::Oracle);
    config.trials = 500;
    config.fit_options.poly_degree = 2;
    config.fit_options.poly_interactions = true;
    config.fit_options.ridge = 1e-6;
    config.fit_options.clip_eps = 0.05;
  } else if (opts.preset == "surfaceA" || opts.preset == "surfaceB") {
    SemiSyntheticScenario sc;
    sc.surface = opts.preset == "surfaceA" ? ResponseSurfaceSpec::Surface::A
                                           : ResponseSurfaceSpec::Surface::B;
    if (opts.view == "casecontrol") {
      sc.view = SemiSyntheticScenario::View::CaseControl;
    } else if (opts.view != "censoring") {
      throw ConfigError("--view must be censoring or casecontrol");
    }
    if (!opts.covariates_path.empty()) {
      if (opts.covariates_schema.empty()) {
        throw ConfigError("--covariates requires --covariates-schema");
      }
      std::ifstream in(opts.covariates_schema);
      if (!in) throw ConfigError("cannot open " + opts.covariates_schema);
      json js;
      try {
        in >> js;
      } catch (const json::exception& e) {
        throw ConfigError(std::string("schema is not valid JSON: ") + e.what());
      }
      require_known_keys(js,
                         {"continuous", "binary", "treatment", "standardize"});
      CsvSchema schema;
      for (const auto& c : js.value("continuous", json::array())) {
        schema.continuous.push_back(c.get<std::string>());
      }
      for (const auto& b : js.value("binary", json::array())) {
        schema.binary.push_back(b.get<std::string>());
      }
      schema.treatment = js.value("treatment", "");
      schema.standardize = js.value("standardize", false);
      if (schema.treatment.empty()) {
        throw ConfigError("schema must name the treatment column");
      }
      const CovariateTable table =
          load_covariates_csv(opts.covariates_path, schema);
      sc.covariates = table.x;
      sc.treatment = *table.treatment;
    } else {
      // No external file given: use the synthetic stand-in covariates.
      const StandInData stand_in = gen_standin_covariates(747, opts.seed);
      sc.covariates = stand_in.x;
      sc.treatment = stand_in.treatment;
    }
    config.scenario = sc;
    config.estimators = {{Method::Ipw, NuisanceMode::PlugIn},
                         {Method::Dm, NuisanceMode::PlugIn},
                         {Method::Efficient, NuisanceMode::PlugIn}};
    config.trials = 1000;
    config.fit_options.ridge = 1e-2;
  } else {
    throw ConfigError("unknown preset '" + opts.preset + "'");
  }
  if (opts.trials > 0) config.trials = opts.trials;
  return config;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_simulate(const CommonOptions& opts) {
  if (opts.scenario_path.empty()) {
    throw ConfigError("simulate requires --scenario");
  }
  auto scenario = load_scenario_file(opts.scenario_path);
  const std::string out = opts.out.empty() ? "dataset" : opts.out;

  if (auto* cens = std::get_if<CensoringScenario>(&scenario)) {
    cens->materialize(opts.seed);
    const CensoringDraw draw = gen_censoring(*cens, derive_seed(opts.seed, 1));
    write_censoring_csv(
        out.find(".csv") != std::string::npos ? out : out + ".csv", draw,
        opts.with_oracle);
    std::cout << "wrote " << draw.data.size() << " rows\n";
  } else {
    auto& cc = std::get<CaseControlScenario>(scenario);
    cc.materialize(opts.seed);
    const CaseControlDraw draw = gen_casecontrol(cc, derive_seed(opts.seed, 1));
    write_casecontrol_csv(out, draw, opts.with_oracle);
    std::cout << "wrote " << draw.data.m() << " treated and " << draw.data.l()
              << " unlabeled rows\n";
  }
  return 0;
}

void print_report(const EstimateReport& report) {
  std::printf("%-20s tau_hat=%9.4f  se=%7.4f  ci=[%8.4f, %8.4f]%s  clips=%ld\n",
              report.method.c_str(), report.tau_hat, report.se, report.ci_lo,
              report.ci_hi, report.naive_ci ? " (naive)" : "",
              report.clip_count);
}

json report_json(const EstimateReport& report) {
  json j;
  j["method"] = report.method;
  j["tau_hat"] = report.tau_hat;
  j["var_hat"] = report.var_hat;
  j["se"] = report.se;
  j["ci_lo"] = report.ci_lo;
  j["ci_hi"] = report.ci_hi;
  j["level"] = report.level;
  j["n_effective"] = report.n_effective;
  j["clip_count"] = report.clip_count;
  j["naive_ci"] = report.naive_ci;
  return j;
}

int cmd_estimate(const CommonOptions& opts, const std::string& data_path,
                 const std::string& treated_path,
                 const std::string& unlabeled_path, double prior) {
  std::vector<EstimateReport> reports;

  const bool have_cc_files = !treated_path.empty() || !unlabeled_path.empty();
  if (!data_path.empty() && have_cc_files) {
    throw ConfigError("--data conflicts with --treated/--unlabeled");
  }

  // Scenario files drive which setting is estimated; data files imply it.
  bool censoring_setting = !data_path.empty();
  std::variant<CensoringScenario, CaseControlScenario> scenario;
  if (!data_path.empty() && !opts.scenario_path.empty()) {
    throw ConfigError("--data conflicts with --scenario");
  }
  if (!opts.scenario_path.empty()) {
    scenario = load_scenario_file(opts.scenario_path);
    censoring_setting = std::holds_alternative<CensoringScenario>(scenario);
    if (have_cc_files) {
      throw ConfigError("--scenario conflicts with --treated/--unlabeled");
    }
  } else if (!have_cc_files && data_path.empty()) {
    throw ConfigError(
        "estimate needs --scenario, --data, or --treated/--unlabeled");
  }

  NuisanceFitOptions fit_options;
  fit_options.clip_eps = opts.clip_eps;

  if (censoring_setting) {
    CensoringDataset data;
    std::optional<CensOracle> oracle;
    if (!data_path.empty()) {
      data = read_censoring_dataset(data_path);
    } else {
      auto& cens = std::get<CensoringScenario>(scenario);
      cens.materialize(opts.seed);
      CensoringDraw draw = gen_censoring(cens, derive_seed(opts.seed, 1));
      data = std::move(draw.data);
      oracle = draw.oracle;
    }

    const NuisanceMode mode = parse_g_mode(opts.g_mode);
    if ((mode == NuisanceMode::TrueProp || mode == NuisanceMode::Oracle) &&
        !oracle.has_value()) {
      throw ConfigError("--g true/oracle needs a scenario-generated dataset");
    }
    if (mode == NuisanceMode::Aux) {
      throw ConfigError("--g aux applies to the mc subcommand");
    }

    CensNuisanceEval eval;
    if (mode == NuisanceMode::Oracle) {
      eval = oracle_nuisance_eval(data, *oracle, opts.clip_eps);
    } else {
      const FoldAssignment folds =
          make_folds(data.size(), opts.folds, derive_seed(opts.seed, 11));
      GSource g_source = GSource::plug_in();
      if (mode == NuisanceMode::TrueProp) {
        g_source =
            GSource::oracle([o = *oracle](const Vec& x) { return o.g1(x); });
      }
      const FoldNuisancesCens fit =
          fit_nuisances_censoring(data, folds, g_source, fit_options);
      eval = evaluate_nuisances(data, fit);
    }

    for (Method m : parse_methods(opts.method)) {
      switch (m) {
        case Method::Efficient:
          reports.push_back(
              estimate_censoring_efficient(data, eval, opts.level));
          break;
        case Method::Ipw:
          reports.push_back(estimate_censoring_ipw(
              data, eval, opts.level, mode != NuisanceMode::Oracle));
          break;
        case Method::Dm:
          reports.push_back(estimate_censoring_dm(data, eval, opts.level));
          break;
      }
    }
  } else {
    CaseControlData data;
    std::optional<CcOracle> oracle;
    if (have_cc_files) {
      if (treated_path.empty() || unlabeled_path.empty()) {
        throw ConfigError("need both --treated and --unlabeled");
      }
      if (!(prior > 0.0 && prior < 1.0)) {
        throw ConfigError("case-control files require --prior in (0,1)");
      }
      read_xy(treated_path, &data.x_treated, &data.y_treated);
      read_xy(unlabeled_path, &data.x_unlabeled, &data.y_unlabeled);
      data.validate();
    } else {
      auto& cc = std::get<CaseControlScenario>(scenario);
      cc.materialize(opts.seed);
      CaseControlDraw draw = gen_casecontrol(cc, derive_seed(opts.seed, 1));
      data = std::move(draw.data);
      oracle = draw.oracle;
      prior = cc.class_prior;
    }

    const NuisanceMode mode = parse_e_mode(opts.e_mode);
    if ((mode == NuisanceMode::TrueProp || mode == NuisanceMode::Oracle) &&
        !oracle.has_value()) {
      throw ConfigError("--e true/oracle needs a scenario-generated dataset");
    }

    CcNuisanceEval eval;
    if (mode == NuisanceMode::Oracle) {
      eval = oracle_nuisance_eval(data, *oracle, opts.clip_eps);
    } else {
      ESource e_source = ESource::plug_in(prior);
      if (mode == NuisanceMode::TrueProp) {
        e_source =
            ESource::oracle([o = *oracle](const Vec& x) { return o.e1(x); },
                            [o = *oracle](const Vec& x) { return o.ratio(x); });
      }
      const FoldNuisancesCC fit = fit_nuisances_casecontrol(
          data, opts.folds, derive_seed(opts.seed, 11), e_source, fit_options);
      eval = evaluate_nuisances(data, fit);
    }

    for (Method m : parse_methods(opts.method)) {
      switch (m) {
        case Method::Efficient:
          reports.push_back(estimate_cc_efficient(data, eval, opts.level));
          break;
        case Method::Ipw:
          reports.push_back(estimate_cc_ipw(data, eval, opts.level,
                                            mode == NuisanceMode::PlugIn));
          break;
        case Method::Dm:
          reports.push_back(estimate_cc_dm(data, eval, opts.level));
          break;
      }
    }
  }

  for (const auto& report : reports) print_report(report);
  if (!opts.out.empty()) {
    json j = json::array();
    for (const auto& report : reports) j.push_back(report_json(report));
    std::ofstream out(opts.out);
    if (!out) throw IoError("cannot open " + opts.out);
    out << j.dump(2) << '\n';
  }
  return 0;
}

int cmd_mc(const CommonOptions& opts) {
  McConfig config;
  if (!opts.preset.empty()) {
    config = build_preset(opts);
    config.base_seed = opts.seed;
    config.level = opts.level;
    config.folds = opts.folds;
    config.workers = opts.workers;
  } else if (!opts.scenario_path.empty()) {
    auto scenario = load_scenario_file(opts.scenario_path);
    if (auto* cens = std::get_if<CensoringScenario>(&scenario)) {
      config.scenario = *cens;
      for (Method m : parse_methods(opts.method)) {
        config.estimators.push_back({m, parse_g_mode(opts.g_mode)});
      }
    } else {
      config.scenario = std::get<CaseControlScenario>(scenario);
      for (Method m : parse_methods(opts.method)) {
        config.estimators.push_back({m, parse_e_mode(opts.e_mode)});
      }
    }
    config.trials = opts.trials > 0 ? opts.trials : 500;
    config.base_seed = opts.seed;
    config.level = opts.level;
    config.folds = opts.folds;
    config.workers = opts.workers;
    config.fit_options.clip_eps = opts.clip_eps;
  } else {
    throw ConfigError("mc needs --preset or --scenario");
  }
  if (opts.trials > 0) config.trials = opts.trials;

  const McSummary summary = run_trials(config);
  std::cout << summarize_table(summary);
  if (!opts.out.empty()) {
    export_csv(summary, opts.out + ".csv");
    export_json(summary, opts.out + ".json");
    std::cout << "wrote " << opts.out << ".csv and " << opts.out << ".json\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ATE estimation from positive and unlabeled observations"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string data_path, treated_path, unlabeled_path;
  double prior = 0.0;

  CLI::App* simulate = app.add_subcommand("simulate", "Generate a dataset");
  add_common_flags(simulate, &opts);
  simulate->add_flag("--with-oracle", opts.with_oracle,
                     "Include true nuisance columns");

  CLI::App* estimate = app.add_subcommand("estimate", "Estimate once");
  add_common_flags(estimate, &opts);
  estimate->add_option("--data", data_path, "Censoring dataset CSV");
  estimate->add_option("--treated", treated_path, "Treated sample CSV");
  estimate->add_option("--unlabeled", unlabeled_path, "Unlabeled sample CSV");
  estimate->add_option("--prior", prior, "Class prior for case-control files");
  estimate->add_option("--method", opts.method, "ipw|dm|eff|all");
  estimate->add_option("--g", opts.g_mode, "true|plugin|oracle");
  estimate->add_option("--e", opts.e_mode, "true|plugin|oracle");

  CLI::App* mc = app.add_subcommand("mc", "Repeated-trial experiment");
  add_common_flags(mc, &opts);
  mc->add_option("--preset", opts.preset,
                 "table1-censoring|table1-casecontrol|nonlinear-censoring|"
                 "nonlinear-casecontrol|surfaceA|surfaceB");
  mc->add_option("--method", opts.method, "ipw|dm|eff|all");
  mc->add_option("--g", opts.g_mode, "true|plugin|aux|oracle");
  mc->add_option("--e", opts.e_mode, "true|plugin|oracle");
  mc->add_option("--trials", opts.trials, "Number of trials");
  mc->add_option("--workers", opts.workers, "Parallel workers")
      ->check(CLI::Range(1, 64));
  mc->add_option("--view", opts.view,
                 "Surface presets: censoring|casecontrol view");
  mc->add_option("--covariates", opts.covariates_path,
                 "External covariate CSV for surface presets");
  mc->add_option("--covariates-schema", opts.covariates_schema,
                 "JSON schema for the covariate CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opts);
    if (estimate->parsed()) {
      return cmd_estimate(opts, data_path, treated_path, unlabeled_path, prior);
    }
    return cmd_mc(opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CsvError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SchemaError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
