#include "puate/pu_nuisance.hpp"

#include <algorithm>
#include <cmath>

#include "puate/errors.hpp"

namespace puate {

std::pair<double, double> CensoringPropensity::g_at(const Vec& features,
                                                    long* clip_events) const {
  const double pi1 = pi1_at(features);
  const double pi0 = 1.0 - pi1;
  // g(1|x) = (1 - c) * kappa(x) / pi(0|x) with kappa = pi(1|x) / c.
  const double raw = (1.0 - c_hat) * pi1 / (c_hat * pi0);
  const double g1 = clamp_prob(raw, clip_eps);
  if (clip_events != nullptr && g1 != raw) ++(*clip_events);
  return {g1, 1.0 - g1};
}

double CaseControlPropensity::density_ratio_at(const Vec& features) const {
  const double e1 = e1_at(features);
  return std::min(class_prior / e1, 1.0 / clip_eps);
}

LogisticModel fit_observation_model(const DesignMatrix& X,
                                    const std::vector<int>& observed,
                                    int max_iter, double tol) {
  return fit_logistic(X, observed, max_iter, tol);
}

double estimate_labeling_constant(const LogisticModel& pi_hat,
                                  const DesignMatrix& X,
                                  const std::vector<int>& observed,
                                  double clip_eps) {
  if (static_cast<Eigen::Index>(observed.size()) != X.rows()) {
    throw InvalidInput("estimate_labeling_constant: O length mismatch");
  }
  const Vec prob = predict_proba(pi_hat, X, clip_eps);
  double sum = 0.0;
  long count = 0;
  double largest = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (observed[static_cast<std::size_t>(i)] == 1) {
      sum += prob[i];
      ++count;
    }
    largest = std::max(largest, prob[i]);
  }
  if (count == 0) {
    throw NoPositives("estimate_labeling_constant: no observed samples");
  }
  // The labeled fraction bounds every observation probability from above
  // (P(O=1|x) = c P(D=1|x) <= c), so the estimate is floored by the largest
  // fitted probability. Without the floor the positive-sample average is
  // badly downward-biased whenever treatment probabilities are far from 0/1,
  // and the derived propensity saturates.
  return std::clamp(std::max(sum / static_cast<double>(count), largest),
                    clip_eps, 1.0);
}

CensoringPropensity fit_censoring_propensity_from_aux(
    const Mat& aux_raw, const std::vector<int>& aux_observed,
    double clip_eps) {
  if (aux_raw.rows() == 0) {
    throw NoData("fit_censoring_propensity_from_aux: empty auxiliary sample");
  }
  const DesignMatrix X = DesignMatrix::from_raw(aux_raw);
  CensoringPropensity cp;
  cp.pi_model = fit_observation_model(X, aux_observed);
  cp.c_hat = estimate_labeling_constant(cp.pi_model, X, aux_observed, clip_eps);
  cp.clip_eps = clip_eps;
  return cp;
}

double unbiased_pu_risk(const DesignMatrix& pos, const DesignMatrix& unl,
                        double class_prior, const Vec& beta) {
  const Vec h_pos = pos.values() * beta;
  const Vec h_unl = unl.values() * beta;
  double pos_as_pos = 0.0;  // loss of labeling positives as positive
  double pos_as_neg = 0.0;  // loss of labeling positives as negative
  for (Eigen::Index j = 0; j < h_pos.size(); ++j) {
    pos_as_pos += softplus(-h_pos[j]);
    pos_as_neg += softplus(h_pos[j]);
  }
  double unl_as_neg = 0.0;
  for (Eigen::Index k = 0; k < h_unl.size(); ++k) {
    unl_as_neg += softplus(h_unl[k]);
  }
  const double m = static_cast<double>(h_pos.size());
  const double l = static_cast<double>(h_unl.size());
  return class_prior * pos_as_pos / m + unl_as_neg / l -
         class_prior * pos_as_neg / m;
}

CaseControlPropensity fit_unbiased_pu(const Mat& pos_raw, const Mat& unl_raw,
                                      double class_prior,
                                      const UnbiasedPuOptions& opts) {
  if (pos_raw.rows() == 0 || unl_raw.rows() == 0) {
    throw NoData("fit_unbiased_pu: both samples must be non-empty");
  }
  if (!(class_prior > 0.0 && class_prior <= 1.0)) {
    throw InvalidInput("fit_unbiased_pu: class_prior must be in (0, 1]");
  }
  if (pos_raw.cols() != unl_raw.cols()) {
    throw InvalidInput("fit_unbiased_pu: covariate dimension mismatch");
  }

  const DesignMatrix pos = DesignMatrix::from_raw(pos_raw);
  const DesignMatrix unl = DesignMatrix::from_raw(unl_raw);
  const Eigen::Index p = pos.cols();
  const double l = static_cast<double>(unl.rows());

  // Mean positive feature vector; the positive-side loss terms telescope to a
  // linear function of the score, so the gradient needs only this average.
  const Vec pos_mean = pos.values().colwise().mean().transpose();

  CaseControlPropensity cp;
  cp.class_prior = class_prior;
  cp.clip_eps = opts.clip_eps;
  cp.score_model.coef = Vec::Zero(p);

  Vec beta = Vec::Zero(p);
  double risk = unbiased_pu_risk(pos, unl, class_prior, beta);
  Vec best = beta;
  double best_risk = risk;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    cp.score_model.iterations = iter + 1;

    const Vec h_unl = unl.values() * beta;
    Vec pred(h_unl.size());
    for (Eigen::Index k = 0; k < h_unl.size(); ++k) {
      pred[k] = sigmoid(h_unl[k]);
    }
    const Vec grad =
        -class_prior * pos_mean + unl.values().transpose() * pred / l;

    if (grad.lpNorm<Eigen::Infinity>() <= opts.tol) {
      cp.score_model.converged = true;
      cp.score_model.coef = beta;
      return cp;
    }

    double step = opts.initial_step;
    Vec proposal = beta - step * grad;
    double risk_new = unbiased_pu_risk(pos, unl, class_prior, proposal);
    int backtracks = 0;
    while (!(risk_new < risk) && backtracks < opts.max_backtracks) {
      step *= opts.backtrack;
      proposal = beta - step * grad;
      risk_new = unbiased_pu_risk(pos, unl, class_prior, proposal);
      ++backtracks;
    }
    if (!(risk_new < risk)) {
      // No descent direction step accepted; treat the current point as final.
      break;
    }
    beta = proposal;
    risk = risk_new;
    if (risk < best_risk) {
      best_risk = risk;
      best = beta;
    }

    if (beta.lpNorm<Eigen::Infinity>() > kSeparationCap) {
      cp.score_model.separation = true;
      cp.score_model.converged = false;
      cp.score_model.coef = beta;
      return cp;
    }
  }

  cp.score_model.converged = false;
  cp.score_model.coef = best;
  return cp;
}

}  // namespace puate
