#pragma once

#include "puate/crossfit.hpp"
#include "puate/data.hpp"
#include "puate/report.hpp"

namespace puate {

// Treated-sample score: (1 - e1/e0) (y1 - mu_t) r, with e0 = 1 - e1. Mean
// zero at the true nuisances.
double score_treated(double y1, double mu_t, double e1, double ratio);

// Unlabeled-sample score: -(yU - mu_u)/e0 + mu_t - mu_u/e0 + (e1/e0) mu_t.
// Mean equal to the ATE at the true nuisances, and pointwise insensitive to
// the unlabeled outcome model.
double score_unlabeled(double y_u, double mu_t, double mu_u, double e1);

// Efficient estimator: treated-score mean plus unlabeled-score mean.
// Variance combines the strata as Var_T/alpha + Var_U/(1-alpha) and the
// interval scales by sqrt(var / (m + l)).
EstimateReport estimate_cc_efficient(const CaseControlData& data,
                                     const CcNuisanceEval& eval,
                                     double level = 0.95);
EstimateReport estimate_cc_efficient(const CaseControlData& data,
                                     const FoldNuisancesCC& nuisances,
                                     double level = 0.95);

// Moment-based estimator from the identification identities:
//   E[Y(1)] as the ratio-weighted treated mean, E[Y(0)] from the unlabeled
//   inverse-weighted mean minus the ratio-weighted treated contamination.
EstimateReport estimate_cc_ipw(const CaseControlData& data,
                               const CcNuisanceEval& eval, double level = 0.95,
                               bool nuisances_estimated = true);

// Plug-in contrast averaged over the unlabeled covariates; naive interval.
EstimateReport estimate_cc_dm(const CaseControlData& data,
                              const CcNuisanceEval& eval, double level = 0.95);
EstimateReport estimate_cc_dm(const CaseControlData& data,
                              const FoldNuisancesCC& nuisances,
                              double level = 0.95);

// Per-stratum score vectors, exposed for the decomposition checks.
struct CcScoreVectors {
  Vec treated;    // length m
  Vec unlabeled;  // length l
};
CcScoreVectors cc_scores(const CaseControlData& data,
                         const CcNuisanceEval& eval);

}  // namespace puate
