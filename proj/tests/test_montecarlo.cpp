#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "puate/errors.hpp"
#include "puate/montecarlo.hpp"

using namespace puate;

namespace {

McConfig small_censoring_config() {
  CensoringScenario sc;
  sc.n = 400;
  sc.c = 0.5;
  McConfig config;
  config.scenario = sc;
  config.estimators = {{Method::Efficient, NuisanceMode::TrueProp},
                       {Method::Ipw, NuisanceMode::TrueProp},
                       {Method::Dm, NuisanceMode::TrueProp}};
  config.trials = 30;
  config.base_seed = 2024;
  return config;
}

}  // namespace

TEST_CASE("single noise-free oracle trial has zero error and full coverage") {
  CensoringScenario sc;
  sc.n = 300;
  sc.c = 1.0;
  sc.noise_sd = 0.0;
  McConfig config;
  config.scenario = sc;
  config.estimators = {{Method::Efficient, NuisanceMode::Oracle}};
  config.trials = 1;
  config.base_seed = 5;
  config.fit_options.clip_eps = 0.0;

  const McSummary summary = run_trials(config);
  REQUIRE(summary.estimators.size() == 1);
  CHECK(summary.estimators[0].failed == 0);
  CHECK(summary.estimators[0].mse <= 1e-12);
  CHECK(std::fabs(summary.estimators[0].bias) <= 1e-9);
  CHECK(summary.estimators[0].coverage == 1.0);
}

TEST_CASE("identical configurations give identical runs") {
  const McConfig config = small_censoring_config();
  const McSummary a = run_trials(config);
  const McSummary b = run_trials(config);
  REQUIRE(a.estimators.size() == b.estimators.size());
  for (std::size_t e = 0; e < a.estimators.size(); ++e) {
    REQUIRE(a.estimators[e].trials.size() == b.estimators[e].trials.size());
    for (std::size_t t = 0; t < a.estimators[e].trials.size(); ++t) {
      CHECK(a.estimators[e].trials[t].tau_hat ==
            b.estimators[e].trials[t].tau_hat);
    }
    CHECK(a.estimators[e].mse == b.estimators[e].mse);
  }
}

TEST_CASE("parallel workers reproduce the single-threaded run") {
  McConfig config = small_censoring_config();
  config.trials = 16;
  const McSummary serial = run_trials(config);
  config.workers = 3;
  const McSummary parallel = run_trials(config);
  for (std::size_t e = 0; e < serial.estimators.size(); ++e) {
    for (std::size_t t = 0; t < serial.estimators[e].trials.size(); ++t) {
      CHECK(serial.estimators[e].trials[t].tau_hat ==
            parallel.estimators[e].trials[t].tau_hat);
    }
  }
}

TEST_CASE("error decomposition is exact") {
  const McSummary summary = run_trials(small_censoring_config());
  for (const auto& es : summary.estimators) {
    const double recomposed = es.bias * es.bias + es.variance;
    CHECK(es.mse == doctest::Approx(recomposed).epsilon(1e-10));
  }
}

TEST_CASE("doubling the trials moves the error estimate within noise") {
  McConfig config = small_censoring_config();
  config.estimators = {{Method::Efficient, NuisanceMode::TrueProp}};
  config.trials = 60;
  const McSummary first = run_trials(config);
  config.trials = 120;
  const McSummary second = run_trials(config);

  auto mse_se = [&](const McSummary& s) {
    // Standard error of the mean of squared errors.
    std::vector<double> sq;
    for (const auto& r : s.estimators[0].trials) {
      if (r.ok) sq.push_back((r.tau_hat - 3.0) * (r.tau_hat - 3.0));
    }
    double mean = 0.0;
    for (double v : sq) mean += v;
    mean /= static_cast<double>(sq.size());
    double var = 0.0;
    for (double v : sq) var += (v - mean) * (v - mean);
    var /= static_cast<double>(sq.size() - 1);
    return std::sqrt(var / static_cast<double>(sq.size()));
  };
  const double gap = std::fabs(first.estimators[0].mse - second.estimators[0].mse);
  const double combined =
      std::sqrt(std::pow(mse_se(first), 2) + std::pow(mse_se(second), 2));
  CHECK(gap <= 3.0 * combined);
}

TEST_CASE("default scenarios never fail trials") {
  McConfig config = small_censoring_config();
  config.estimators.push_back({Method::Efficient, NuisanceMode::PlugIn});
  config.estimators.push_back({Method::Efficient, NuisanceMode::Oracle});
  const McSummary summary = run_trials(config);
  for (const auto& es : summary.estimators) CHECK(es.failed == 0);

  // Auxiliary-sample propensity path.
  McConfig aux_config = small_censoring_config();
  aux_config.estimators = {{Method::Efficient, NuisanceMode::Aux}};
  aux_config.trials = 5;
  aux_config.n_aux = 2000;
  const McSummary aux_summary = run_trials(aux_config);
  CHECK(aux_summary.estimators[0].failed == 0);

  CaseControlScenario cc;
  cc.m = 300;
  cc.l = 600;
  McConfig cc_config;
  cc_config.scenario = cc;
  cc_config.estimators = {{Method::Efficient, NuisanceMode::TrueProp},
                          {Method::Efficient, NuisanceMode::PlugIn},
                          {Method::Ipw, NuisanceMode::TrueProp},
                          {Method::Dm, NuisanceMode::TrueProp}};
  cc_config.trials = 20;
  cc_config.base_seed = 11;
  const McSummary cc_summary = run_trials(cc_config);
  for (const auto& es : cc_summary.estimators) CHECK(es.failed == 0);
}

TEST_CASE("csv export writes one row per successful trial and reads back") {
  McConfig config = small_censoring_config();
  config.trials = 25;
  const McSummary summary = run_trials(config);
  const std::string path = "/tmp/puate_test_export.csv";
  export_csv(summary, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "trial,estimator,tau_hat,se,ci_lo,ci_hi,covered,clip_count");
  long rows = 0;
  double first_tau = 0.0;
  while (std::getline(in, line)) {
    if (rows == 0) {
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');  // trial
      std::getline(ss, cell, ',');  // estimator
      std::getline(ss, cell, ',');  // tau_hat
      first_tau = std::stod(cell);
    }
    ++rows;
  }
  CHECK(rows == 25 * 3);
  // 17-digit output round-trips exactly.
  CHECK(first_tau == summary.estimators[0].trials[0].tau_hat);
  std::remove(path.c_str());
}

TEST_CASE("json export echoes the config and the histogram") {
  McConfig config = small_censoring_config();
  config.trials = 12;
  const McSummary summary = run_trials(config);
  const std::string path = "/tmp/puate_test_export.json";
  export_json(summary, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  CHECK(text.find("\"setting\": \"censoring\"") != std::string::npos);
  CHECK(text.find("\"edges\"") != std::string::npos);
  CHECK(text.find("\"tau0\": 3.0") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("table renders one column per estimator") {
  const McSummary summary = run_trials(small_censoring_config());
  const std::string table = summarize_table(summary);
  CHECK(table.find("eff(true-prop)") != std::string::npos);
  CHECK(table.find("ipw(true-prop)") != std::string::npos);
  CHECK(table.find("dm(true-prop)") != std::string::npos);
  CHECK(table.find("MSE") != std::string::npos);
  CHECK(table.find("Cov. ratio") != std::string::npos);

  McSummary empty;
  empty.tau0 = 3.0;
  const std::string empty_table = summarize_table(empty);
  CHECK(empty_table.find("MSE") != std::string::npos);
}

TEST_CASE("plug-in variance is consistent with the across-trial variance") {
  // With every nuisance at its true value the estimator's sampling variance
  // must match the average plug-in estimate se^2; this is the Monte Carlo
  // check of the variance-bound formula in both settings.
  {
    CensoringScenario sc;
    sc.n = 1500;
    sc.c = 0.5;
    McConfig config;
    config.scenario = sc;
    config.estimators = {{Method::Efficient, NuisanceMode::Oracle}};
    config.trials = 400;
    config.base_seed = 777;
    const McSummary summary = run_trials(config);
    double mean_se2 = 0.0;
    for (const auto& r : summary.estimators[0].trials) mean_se2 += r.se * r.se;
    mean_se2 /= static_cast<double>(summary.estimators[0].trials.size());
    CHECK(summary.estimators[0].variance ==
          doctest::Approx(mean_se2).epsilon(0.2));
  }
  {
    CaseControlScenario sc;
    sc.m = 600;
    sc.l = 1200;
    McConfig config;
    config.scenario = sc;
    config.estimators = {{Method::Efficient, NuisanceMode::Oracle}};
    config.trials = 400;
    config.base_seed = 778;
    const McSummary summary = run_trials(config);
    double mean_se2 = 0.0;
    for (const auto& r : summary.estimators[0].trials) mean_se2 += r.se * r.se;
    mean_se2 /= static_cast<double>(summary.estimators[0].trials.size());
    CHECK(summary.estimators[0].variance ==
          doctest::Approx(mean_se2).epsilon(0.2));
  }
}

TEST_CASE("invalid configurations are rejected") {
  McConfig config = small_censoring_config();
  config.trials = 0;
  CHECK_THROWS_AS(run_trials(config), InvalidInput);

  config = small_censoring_config();
  config.estimators.clear();
  CHECK_THROWS_AS(run_trials(config), InvalidInput);

  CaseControlScenario cc;
  McConfig cc_config;
  cc_config.scenario = cc;
  cc_config.estimators = {{Method::Efficient, NuisanceMode::Aux}};
  CHECK_THROWS_AS(run_trials(cc_config), InvalidInput);
}
