#pragma once

#include "puate/crossfit.hpp"
#include "puate/data.hpp"
#include "puate/report.hpp"

namespace puate {

// Uncentered efficient influence value for one censoring-setting sample:
//
//   1[o=1](y - mu_t)/pi1 - 1[o=0](y - nu)/(g0 pi0)
//     + g1 1[o=1](y - mu_t)/(g0 pi1) + mu_t - nu/g0 + (g1/g0) mu_t
//
// with pi0 = 1 - pi1 and g0 = 1 - g1. Inputs are assumed pre-clipped.
double influence_censoring(int o, double y, double mu_t, double nu, double pi1,
                           double g1);

// Efficient estimator: mean of per-sample influence values under each
// sample's own-fold nuisances. Variance is the sample variance of the
// influence values; the interval is tau_hat +/- z * sqrt(var/n).
EstimateReport estimate_censoring_efficient(const CensoringDataset& data,
                                            const CensNuisanceEval& eval,
                                            double level = 0.95);
EstimateReport estimate_censoring_efficient(const CensoringDataset& data,
                                            const FoldNuisancesCens& nuisances,
                                            double level = 0.95);

// Inverse-weighting estimator. It uses only pi and g from the evaluation;
// set `nuisances_estimated` when those weights were fitted rather than known,
// which marks the interval as naive.
EstimateReport estimate_censoring_ipw(const CensoringDataset& data,
                                      const CensNuisanceEval& eval,
                                      double level = 0.95,
                                      bool nuisances_estimated = true);

// Plug-in regression estimator: mean over all covariates of
// mu_t - nu/g0 + (g1/g0) mu_t. The interval is always naive.
EstimateReport estimate_censoring_dm(const CensoringDataset& data,
                                     const CensNuisanceEval& eval,
                                     double level = 0.95);
EstimateReport estimate_censoring_dm(const CensoringDataset& data,
                                     const FoldNuisancesCens& nuisances,
                                     double level = 0.95);

}  // namespace puate
