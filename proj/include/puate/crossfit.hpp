#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "puate/data.hpp"
#include "puate/pu_nuisance.hpp"
#include "puate/regression.hpp"

namespace puate {

// Balanced random partition of {0, ..., n-1} into L folds. Fold sizes differ
// by at most one; same (n, L, seed) always yields the same assignment.
struct FoldAssignment {
  long n = 0;
  int num_folds = 0;
  std::vector<int> fold_of;                 // index -> fold id in [0, L)
  std::vector<std::vector<long>> members;   // per-fold sample indices
  std::vector<std::vector<long>> complements;  // per-fold training indices
};

FoldAssignment make_folds(long n, int num_folds, std::uint64_t seed);

// Shared knobs for nuisance fitting. The polynomial map is applied to raw
// covariates before every fit and every prediction.
struct NuisanceFitOptions {
  int poly_degree = 1;
  bool poly_interactions = false;
  double ridge = 0.0;
  double clip_eps = kDefaultClipEps;
  int logistic_max_iter = 100;
  double logistic_tol = 1e-8;
};

// Where the censoring propensity g comes from.
struct GSource {
  enum class Kind {
    PlugIn,     // labeled-fraction pipeline refit per fold
    Auxiliary,  // one propensity fitted on an auxiliary sample, shared
    Oracle,     // known function of the raw covariates
  };
  Kind kind = Kind::PlugIn;
  CensoringPropensity aux;
  std::function<double(const Vec&)> g1_oracle;

  static GSource plug_in() { return {}; }
  static GSource auxiliary(CensoringPropensity cp) {
    GSource s;
    s.kind = Kind::Auxiliary;
    s.aux = std::move(cp);
    return s;
  }
  static GSource oracle(std::function<double(const Vec&)> g1) {
    GSource s;
    s.kind = Kind::Oracle;
    s.g1_oracle = std::move(g1);
    return s;
  }
};

// Per-fold nuisance models for the censoring setting. Fold l's models are
// fitted on the complement of fold l only; the training index sets are kept
// so that provenance can be asserted.
struct FoldNuisancesCens {
  FoldAssignment folds;
  std::vector<LinearModel> mu_t;  // outcome regression on labeled units
  std::vector<LinearModel> nu;    // outcome regression on unlabeled units
  std::vector<LogisticModel> pi;  // observation model
  std::vector<CensoringPropensity> g_plugin;  // per fold when plug-in
  GSource g_source;
  NuisanceFitOptions options;
  std::vector<std::vector<long>> train_idx;
};

FoldNuisancesCens fit_nuisances_censoring(const CensoringDataset& data,
                                          const FoldAssignment& folds,
                                          const GSource& g_source,
                                          const NuisanceFitOptions& options = {});

// Where the case-control propensity e (and the density ratio) comes from.
struct ESource {
  enum class Kind {
    PlugIn,  // risk-minimization fit, shared across folds unless per_fold
    Oracle,
  };
  Kind kind = Kind::PlugIn;
  double class_prior = 0.5;
  bool per_fold = false;  // ablation: refit the propensity per fold
  std::function<double(const Vec&)> e1_oracle;
  std::function<double(const Vec&)> r_oracle;
  UnbiasedPuOptions pu_options;

  static ESource plug_in(double prior, bool per_fold = false) {
    ESource s;
    s.class_prior = prior;
    s.per_fold = per_fold;
    return s;
  }
  static ESource oracle(std::function<double(const Vec&)> e1,
                        std::function<double(const Vec&)> r) {
    ESource s;
    s.kind = Kind::Oracle;
    s.e1_oracle = std::move(e1);
    s.r_oracle = std::move(r);
    return s;
  }
};

// Per-fold nuisances for the case-control setting: independent fold
// assignments on the treated and unlabeled samples, outcome regressions per
// complement, propensity per ESource.
struct FoldNuisancesCC {
  FoldAssignment treated_folds;
  FoldAssignment unlabeled_folds;
  std::vector<LinearModel> mu_t;
  std::vector<LinearModel> mu_u;
  std::vector<CaseControlPropensity> e_models;  // size 1, or L when per-fold
  ESource e_source;
  NuisanceFitOptions options;
  std::vector<std::vector<long>> treated_train_idx;
  std::vector<std::vector<long>> unlabeled_train_idx;
};

FoldNuisancesCC fit_nuisances_casecontrol(const CaseControlData& data,
                                          int num_folds, std::uint64_t seed,
                                          const ESource& e_source,
                                          const NuisanceFitOptions& options = {});

// Per-sample nuisance values for the censoring estimators, evaluated with
// each sample's own-fold models.
struct CensNuisanceEval {
  Vec mu_t;
  Vec nu;
  Vec pi1;
  Vec g1;
  long clip_count = 0;
};

CensNuisanceEval evaluate_nuisances(const CensoringDataset& data,
                                    const FoldNuisancesCens& nuisances);

// Per-sample nuisance values for the case-control estimators.
struct CcNuisanceEval {
  Vec mu_t_treated;   // length m
  Vec e1_treated;     // length m
  Vec ratio_treated;  // length m
  Vec mu_t_unlabeled;  // length l
  Vec mu_u_unlabeled;  // length l
  Vec e1_unlabeled;    // length l
  long clip_count = 0;
};

CcNuisanceEval evaluate_nuisances(const CaseControlData& data,
                                  const FoldNuisancesCC& nuisances);

}  // namespace puate
