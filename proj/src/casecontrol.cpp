#include "puate/casecontrol.hpp"

#include <cmath>

#include "puate/errors.hpp"

namespace puate {

namespace {

void check_eval(const CaseControlData& data, const CcNuisanceEval& eval) {
  if (eval.mu_t_treated.size() != data.m() ||
      eval.e1_treated.size() != data.m() ||
      eval.ratio_treated.size() != data.m() ||
      eval.mu_t_unlabeled.size() != data.l() ||
      eval.mu_u_unlabeled.size() != data.l() ||
      eval.e1_unlabeled.size() != data.l()) {
    throw InvalidInput("case-control estimator: evaluation length mismatch");
  }
}

// Stratified variance and interval. tau_hat = mean(treated) + sign *
// mean(unlabeled) has variance Var_T/m + Var_U/l = (Var_T/alpha +
// Var_U/(1-alpha)) / n with n = m + l.
EstimateReport finalize(std::string method, const CaseControlData& data,
                        Vec treated_part, Vec unlabeled_part, double sign,
                        double level, long clip_count, bool naive_ci) {
  EstimateReport report;
  report.method = std::move(method);
  report.level = level;
  report.clip_count = clip_count;
  report.naive_ci = naive_ci;
  const double alpha = data.alpha();
  const long n = data.m() + data.l();
  report.n_effective = n;
  // Per-sample contributions scaled so the plain mean over all n entries is
  // the estimator itself (the estimation-equation identity).
  const double w_t = static_cast<double>(n) / static_cast<double>(data.m());
  const double w_u = static_cast<double>(n) / static_cast<double>(data.l());
  Vec influence(n);
  influence.head(treated_part.size()) = w_t * treated_part;
  influence.tail(unlabeled_part.size()) = sign * w_u * unlabeled_part;
  report.tau_hat = mean_of(influence);
  report.var_hat = sample_variance(treated_part) / alpha +
                   sample_variance(unlabeled_part) / (1.0 - alpha);
  report.se = std::sqrt(report.var_hat / static_cast<double>(n));
  const double z = z_for_level(level);
  report.ci_lo = report.tau_hat - z * report.se;
  report.ci_hi = report.tau_hat + z * report.se;
  report.influence = std::move(influence);
  return report;
}

}  // namespace

double score_treated(double y1, double mu_t, double e1, double ratio) {
  const double e0 = 1.0 - e1;
  return (1.0 - e1 / e0) * (y1 - mu_t) * ratio;
}

double score_unlabeled(double y_u, double mu_t, double mu_u, double e1) {
  const double e0 = 1.0 - e1;
  // The outcome residual enters negatively, mirroring the censoring-setting
  // score. This makes the score exactly insensitive to perturbations of the
  // unlabeled outcome model (the two mu_u appearances cancel), which the
  // positive-residual variant does not achieve.
  return -(y_u - mu_u) / e0 + mu_t - mu_u / e0 + (e1 / e0) * mu_t;
}

CcScoreVectors cc_scores(const CaseControlData& data,
                         const CcNuisanceEval& eval) {
  check_eval(data, eval);
  CcScoreVectors scores;
  scores.treated.resize(data.m());
  for (Eigen::Index j = 0; j < data.m(); ++j) {
    scores.treated[j] = score_treated(data.y_treated[j], eval.mu_t_treated[j],
                                      eval.e1_treated[j], eval.ratio_treated[j]);
  }
  scores.unlabeled.resize(data.l());
  for (Eigen::Index k = 0; k < data.l(); ++k) {
    scores.unlabeled[k] =
        score_unlabeled(data.y_unlabeled[k], eval.mu_t_unlabeled[k],
                        eval.mu_u_unlabeled[k], eval.e1_unlabeled[k]);
  }
  return scores;
}

EstimateReport estimate_cc_efficient(const CaseControlData& data,
                                     const CcNuisanceEval& eval, double level) {
  CcScoreVectors scores = cc_scores(data, eval);
  return finalize("cc-efficient", data, std::move(scores.treated),
                  std::move(scores.unlabeled), /*sign=*/1.0, level,
                  eval.clip_count, /*naive_ci=*/false);
}

EstimateReport estimate_cc_efficient(const CaseControlData& data,
                                     const FoldNuisancesCC& nuisances,
                                     double level) {
  return estimate_cc_efficient(data, evaluate_nuisances(data, nuisances), level);
}

EstimateReport estimate_cc_ipw(const CaseControlData& data,
                               const CcNuisanceEval& eval, double level,
                               bool nuisances_estimated) {
  check_eval(data, eval);
  // Treated summand: Y r (for E[Y(1)]) plus the contamination correction
  // (e1/e0) Y r entering E[Y(0)] with a minus sign; combined here so the
  // stratified variance sees one treated-sample summand.
  Vec treated_part(data.m());
  for (Eigen::Index j = 0; j < data.m(); ++j) {
    const double e1 = eval.e1_treated[j];
    const double e0 = 1.0 - e1;
    treated_part[j] =
        data.y_treated[j] * eval.ratio_treated[j] * (1.0 + e1 / e0);
  }
  // Unlabeled summand: Y / e0, entering tau with a minus sign.
  Vec unlabeled_part(data.l());
  for (Eigen::Index k = 0; k < data.l(); ++k) {
    unlabeled_part[k] = data.y_unlabeled[k] / (1.0 - eval.e1_unlabeled[k]);
  }
  return finalize("cc-ipw", data, std::move(treated_part),
                  std::move(unlabeled_part), /*sign=*/-1.0, level,
                  eval.clip_count, nuisances_estimated);
}

EstimateReport estimate_cc_dm(const CaseControlData& data,
                              const CcNuisanceEval& eval, double level) {
  check_eval(data, eval);
  Vec values(data.l());
  for (Eigen::Index k = 0; k < data.l(); ++k) {
    const double e1 = eval.e1_unlabeled[k];
    const double e0 = 1.0 - e1;
    const double mu_t = eval.mu_t_unlabeled[k];
    values[k] = mu_t - eval.mu_u_unlabeled[k] / e0 + (e1 / e0) * mu_t;
  }
  // Single-stratum plug-in: report with the plain sample variance over the
  // unlabeled covariates.
  EstimateReport report;
  report.method = "cc-dm";
  report.level = level;
  report.n_effective = data.l();
  report.clip_count = eval.clip_count;
  report.naive_ci = true;
  report.tau_hat = mean_of(values);
  report.var_hat = sample_variance(values);
  report.se = std::sqrt(report.var_hat / static_cast<double>(data.l()));
  const double z = z_for_level(level);
  report.ci_lo = report.tau_hat - z * report.se;
  report.ci_hi = report.tau_hat + z * report.se;
  report.influence = std::move(values);
  return report;
}

EstimateReport estimate_cc_dm(const CaseControlData& data,
                              const FoldNuisancesCC& nuisances, double level) {
  return estimate_cc_dm(data, evaluate_nuisances(data, nuisances), level);
}

}  // namespace puate
