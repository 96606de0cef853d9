#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "puate/crossfit.hpp"
#include "puate/dgp.hpp"

namespace puate {

enum class Method { Efficient, Ipw, Dm };

// Which nuisances are fed to an estimator.
//   Oracle: every nuisance is the known truth.
//   TrueProp: propensity known, outcome/observation models cross-fitted.
//   PlugIn: everything estimated (labeled-fraction pipeline / risk fit).
//   Aux: censoring only; propensity fitted once per trial on an auxiliary
//        observation-only sample, other nuisances cross-fitted.
enum class NuisanceMode { Oracle, TrueProp, PlugIn, Aux };

struct EstimatorChoice {
  Method method = Method::Efficient;
  NuisanceMode mode = NuisanceMode::TrueProp;
  std::string tag() const;
};

// Repeated-surface experiment over fixed external covariates: each trial
// redraws the response-surface coefficients and outcomes, re-derives the PU
// observation pattern, and estimates with fitted nuisances. The estimand is
// trial-specific (the drawn surface's average effect).
struct SemiSyntheticScenario {
  Mat covariates;
  std::vector<int> treatment;
  ResponseSurfaceSpec::Surface surface = ResponseSurfaceSpec::Surface::A;
  enum class View { Censoring, CaseControl } view = View::Censoring;
  double label_prob = 0.1;   // censoring view
  double class_prior = 0.1;  // case-control view
};

struct McConfig {
  std::variant<CensoringScenario, CaseControlScenario, SemiSyntheticScenario>
      scenario;
  std::vector<EstimatorChoice> estimators;
  long trials = 500;
  std::uint64_t base_seed = 1;
  double level = 0.95;
  int folds = 2;
  int workers = 1;
  long n_aux = 10000;
  NuisanceFitOptions fit_options;
};

struct TrialRecord {
  double tau_hat = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double tau0 = 0.0;  // trial estimand
  long clip_count = 0;
  bool ok = false;
  bool covered = false;
  std::string error;
};

struct Histogram {
  std::vector<double> edges;  // size bins + 1
  std::vector<long> counts;
};

struct EstimatorSummary {
  std::string tag;
  double mse = 0.0;
  double bias = 0.0;
  double coverage = 0.0;
  double variance = 0.0;  // population variance of the estimates
  double mean_clip_count = 0.0;
  long failed = 0;
  std::vector<TrialRecord> trials;
  Histogram histogram;
};

struct McSummary {
  McConfig config;  // scenario materialized (coefficients resolved)
  double tau0 = 0.0;  // constant estimand; mean of trial estimands otherwise
  std::vector<EstimatorSummary> estimators;
};

// Runs the configured trials. Deterministic for a fixed config, including
// under parallel workers: trial t always uses the seed derived from
// (base_seed, t).
McSummary run_trials(const McConfig& config);

// Fixed-width table, one metric row per line, estimators as columns.
std::string summarize_table(const McSummary& summary);

// Per-trial rows: trial, estimator, tau_hat, se, ci_lo, ci_hi, covered,
// clip_count. 17 significant digits.
void export_csv(const McSummary& summary, const std::string& path);

// Mirrors the CSV rows plus config echo, aggregate metrics, and histogram
// bin edges.
void export_json(const McSummary& summary, const std::string& path);

}  // namespace puate
