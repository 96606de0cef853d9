#pragma once

#include <utility>
#include <vector>

#include "puate/regression.hpp"

namespace puate {

// Fitted observation model plus labeling constant for the censoring setting.
// g(d | x) is derived from these via the labeled-fraction correction; the
// conversion clips and reports how often the clip was hit.
struct CensoringPropensity {
  LogisticModel pi_model;
  double c_hat = 1.0;
  double clip_eps = kDefaultClipEps;

  // P(O = 1 | x) from the fitted model, clipped.
  double pi1_at(const Vec& features) const {
    return predict_proba_at(pi_model, features, clip_eps);
  }

  // (g(1|x), g(0|x)). Increments *clip_events when the output hits a bound.
  std::pair<double, double> g_at(const Vec& features,
                                 long* clip_events = nullptr) const;
};

// Treated-vs-population score model for the case-control setting.
struct CaseControlPropensity {
  LogisticModel score_model;
  double class_prior = 0.5;  // e(1)
  double clip_eps = kDefaultClipEps;

  // e(1 | x), clipped.
  double e1_at(const Vec& features) const {
    return predict_proba_at(score_model, features, clip_eps);
  }

  // Density ratio zeta_0 / zeta_T at x: class_prior / e(1|x), capped at
  // 1/clip_eps.
  double density_ratio_at(const Vec& features) const;
};

// Logistic model for P(O = 1 | X) on censoring data.
LogisticModel fit_observation_model(const DesignMatrix& X,
                                    const std::vector<int>& observed,
                                    int max_iter = 100, double tol = 1e-8);

// Labeled-fraction constant: mean of pi_hat(1 | X_i) over observed samples,
// clipped into [clip_eps, 1].
double estimate_labeling_constant(const LogisticModel& pi_hat,
                                  const DesignMatrix& X,
                                  const std::vector<int>& observed,
                                  double clip_eps = kDefaultClipEps);

// Fits the full censoring propensity (observation model + labeling constant)
// on an auxiliary (X, O) sample.
CensoringPropensity fit_censoring_propensity_from_aux(
    const Mat& aux_raw, const std::vector<int>& aux_observed,
    double clip_eps = kDefaultClipEps);

struct UnbiasedPuOptions {
  int max_iter = 500;
  double tol = 1e-6;        // infinity norm of the mean-risk gradient
  double initial_step = 1.0;
  double backtrack = 0.5;
  int max_backtracks = 60;
  double clip_eps = kDefaultClipEps;
};

// Risk-minimization fit of the treated-class probability from positive and
// unlabeled covariates, using the class prior to rewrite the negative-class
// risk. Logistic loss over linear scores; full-batch descent with
// backtracking. The score may legitimately drive the objective negative.
CaseControlPropensity fit_unbiased_pu(const Mat& pos_raw, const Mat& unl_raw,
                                      double class_prior,
                                      const UnbiasedPuOptions& opts = {});

// Objective value of the rewritten risk at a given coefficient vector
// (intercept first). Exposed for tests and diagnostics.
double unbiased_pu_risk(const DesignMatrix& pos, const DesignMatrix& unl,
                        double class_prior, const Vec& beta);

}  // namespace puate
